"""Forward-solver tests: free-space exactness, solver cross-checks,
series convergence, and trace serialization."""

import numpy as np
import pytest

from convexwave.forward import (
    Coefficient,
    TEST_COEFFICIENTS,
    TraceData,
    default_forward_grid,
    extract_traces,
    impulse_front,
    solve_forward_fd,
    solve_forward_volterra,
)
from convexwave.mesh import make_grid


def test_coefficient_clamps_outside_support():
    a = TEST_COEFFICIENTS[2]
    x = np.array([-0.5, 0.0, 0.5, 1.0, 1.5])
    v = a(x)
    assert v[0] == 0.0 and v[1] == 0.0 and v[3] == 0.0 and v[4] == 0.0
    assert v[2] == pytest.approx(10.0)


def test_coefficient_from_samples_interpolates():
    x = np.linspace(0, 1, 11)
    a = Coefficient.from_samples(x, x * (1 - x))
    assert a(0.35) == pytest.approx(0.35 * 0.65, abs=5e-3)


def test_test4_is_finite_near_its_singular_point():
    a = TEST_COEFFICIENTS[4]
    x = np.linspace(0.55, 0.57, 101)
    assert np.all(np.isfinite(a(x)))


def test_fd_rejects_cfl_violation():
    grid = make_grid(-2.2, 2.2, 0.0, 4.0, 256, 64)  # h_t > h_x
    with pytest.raises(ValueError, match="CFL"):
        solve_forward_fd(Coefficient.zero(), grid)


def test_fd_zero_potential_matches_free_field():
    grid = default_forward_grid(512)
    u = solve_forward_fd(Coefficient.zero(), grid)
    X, T = grid.meshgrid()
    u0 = impulse_front(X, T, 3.0 * grid.h_x)
    # compare away from the absorbing boundaries; dispersive ripples trail
    # the numerical front, so the natural agreement measure is relative L2
    inner = (np.abs(X) < 1.8) & (T < 3.5)
    diff = (u.values - u0)[inner]
    assert np.sqrt((diff**2).sum() / (u0[inner] ** 2).sum()) < 0.01


def test_volterra_terms_decay_below_tolerance():
    grid = default_forward_grid(256)
    _, sups = solve_forward_volterra(
        TEST_COEFFICIENTS[2], grid, tol=1e-10, return_terms=True
    )
    assert sups[-1] < 1e-10
    # factorial-type decay: each late term much smaller than its predecessor
    tail = np.array(sups[3:])
    assert np.all(tail[1:] < tail[:-1])


def test_solver_cross_agreement_moderate_grid():
    grid = default_forward_grid(512)
    a = TEST_COEFFICIENTS[1]
    u_fd = solve_forward_fd(a, grid)
    u_v = solve_forward_volterra(a, grid, x_window=(-0.1, 1.05), t_max=2.1)
    i0 = np.searchsorted(grid.x, u_v.grid.x[0])
    j0 = 0
    sub = u_fd.values[i0 : i0 + u_v.grid.n_x, j0 : j0 + u_v.grid.n_t]
    X, T = u_v.grid.meshgrid()
    tri = (X > 0) & (T > 0) & (X + T / 2 < 1)
    diff = np.sqrt(((sub - u_v.values)[tri] ** 2).sum())
    norm = np.sqrt((sub[tri] ** 2).sum())
    assert diff / norm < 0.01


def test_extract_traces_free_field_values(fd_traces):
    traces = fd_traces(1)
    t = traces.t_nodes
    # before the scattered wave returns, f0 sits at the impulse amplitude 1/2
    early = (t > 0.2) & (t < 0.5)
    assert np.abs(traces.f0.values[early] - 0.5).max() < 0.02


def test_trace_csv_round_trip(fd_traces):
    traces = fd_traces(1)
    back = TraceData.from_csv(traces.to_csv())
    assert np.array_equal(back.f0.values, traces.f0.values)
    assert np.array_equal(back.f1.values, traces.f1.values)
    assert np.array_equal(back.t_nodes, traces.t_nodes)
