"""End-to-end acceptance gates for the reconstruction benchmark.

Each test evaluates one quantitative criterion, prints a single summary
line ("[accept NN] ...: PASS/FAIL ...") and then asserts it.  The gates are
intentionally hard numbers; a failing test documents a real shortfall, not
a flaky tolerance.
"""

import time

import numpy as np
import pytest

from convexwave.carleman import carleman_ratio, random_smooth_field, volterra_bound_check
from convexwave.forward import (
    Coefficient,
    TEST_COEFFICIENTS,
    default_forward_grid,
    solve_forward_fd,
    solve_forward_volterra,
)
from convexwave.mesh import ScalarField, make_grid
from convexwave.objective import CarlemanParams, InverseConfig, fd_grad_oracle, grad_J
from convexwave.optimize import compute_error, initial_guess, minimize, run_sweep
from convexwave.pipeline import ExperimentConfig, clean_traces, prepare_case, run_case
from convexwave.transform import default_inverse_grid, reconstruct_a, u_to_w

from conftest import random_field


def _report(num: int, name: str, passed: bool, detail: str) -> None:
    print(f"[accept {num:02d}] {name}: {'PASS' if passed else 'FAIL'} ({detail})")


def test_01_zero_potential_end_to_end():
    t0 = time.perf_counter()
    zero = Coefficient.zero()
    traces = clean_traces(zero, solver="fd")
    t = traces.t_nodes
    window = (t >= 0.2) & (t <= 2.0)
    trace_dev = float(np.abs(traces.f0.values[window] - 0.5).max())

    cfg = InverseConfig()
    boundary, _ = prepare_case(zero, 0.0, 1, cfg.grid, solver="fd")
    rec = minimize(initial_guess(boundary, cfg.grid), boundary, cfg)
    sup = float(np.abs(rec.a_rec).max())
    elapsed = time.perf_counter() - t0

    ok = trace_dev < 0.02 * 0.5 and sup < 0.05 and elapsed < 10.0
    _report(
        1,
        "zero potential end to end",
        ok,
        f"trace dev {trace_dev:.2e}, sup|a| {sup:.2e}, {elapsed:.1f}s",
    )
    assert trace_dev < 0.02 * 0.5
    assert sup < 0.05
    assert elapsed < 10.0


def test_02_forward_solver_cross_validation():
    t0 = time.perf_counter()
    grid = default_forward_grid(1024)
    a = TEST_COEFFICIENTS[1]
    u_fd = solve_forward_fd(a, grid)
    u_v = solve_forward_volterra(a, grid, x_window=(-0.1, 1.05), t_max=2.1)
    i0 = int(np.searchsorted(grid.x, u_v.grid.x[0]))
    sub = u_fd.values[i0 : i0 + u_v.grid.n_x, : u_v.grid.n_t]
    X, T = u_v.grid.meshgrid()
    tri = (X > 0) & (T > 0) & (X + T / 2 < 1)
    rel = float(
        np.sqrt(((sub - u_v.values)[tri] ** 2).sum() / (sub[tri] ** 2).sum())
    )
    elapsed = time.perf_counter() - t0
    ok = rel <= 0.01 and elapsed < 300.0
    _report(2, "solver cross-validation", ok, f"rel L2 {rel:.4f}, {elapsed:.0f}s")
    assert rel <= 0.01
    assert elapsed < 300.0


@pytest.mark.parametrize("test", [1, 2, 3, 4])
def test_03_transform_round_trip(test):
    a = TEST_COEFFICIENTS[test]
    u = solve_forward_volterra(
        a,
        default_forward_grid(1024),
        source_cells=0.0,
        x_window=(-0.1, 1.15),
        t_max=3.2,
    )
    grid = make_grid(0.0, 1.1, 0.0, 2.0, 256, 200)
    w = u_to_w(u, grid, source_width=0.0)
    x, a_rec = reconstruct_a(w)
    err = compute_error(x, a_rec, a)
    ok = err < 0.05
    _report(3, f"round trip test {test}", ok, f"error {err:.4f}")
    assert err < 0.05


def test_04_gradient_matches_oracle(small_grid):
    worst = 0.0
    for lam, alpha in ((2.0, 0.5), (5.0, 0.2), (0.0, 0.5)):
        cfg = InverseConfig(carleman=CarlemanParams(lam, alpha), grid=small_grid)
        for seed in range(10):
            w = random_field(small_grid, seed)
            from convexwave.preprocess import BoundaryData
            from convexwave.forward import TimeSeries

            p0 = w.values[0, :]
            p1 = (w.values[1, :] - w.values[0, :]) / small_grid.h_x
            b = BoundaryData(
                TimeSeries(small_grid.t, p0), TimeSeries(small_grid.t, p1)
            )
            G = grad_J(w, b, cfg).values
            O = fd_grad_oracle(w, b, cfg).values
            worst = max(worst, float(np.abs(G - O).max() / np.abs(O).max()))
    ok = worst < 1e-5
    _report(4, "exact gradient vs central differences", ok, f"worst rel sup {worst:.2e}")
    assert worst < 1e-5


def test_05_integral_bound_battery():
    grid = make_grid(0.0, 1.0, 0.0, 2.0, 80, 120)
    violations = 0
    worst = 0.0
    for seed in range(100):
        g = random_smooth_field(grid, seed)
        for lam in (1.0, 2.0, 5.0):
            for alpha in (0.2, 0.5):
                rep = volterra_bound_check(g, lam, alpha)
                worst = max(worst, rep.ratio)
                if rep.lhs > rep.rhs * (1 + 1e-6):
                    violations += 1
    ok = violations == 0
    _report(
        5, "integral bound, 600 cases", ok,
        f"{violations} violations, max ratio {worst:.4f}",
    )
    assert violations == 0


def test_06_energy_estimate_lambda_scaling():
    grid = make_grid(0.0, 1.0, 0.0, 2.0, 80, 120)
    X, T = grid.meshgrid()
    v = X**2 * (1 - X) ** 2 * np.sin(np.pi * T / grid.t_max)
    v[:2, :] = 0.0
    u = ScalarField(grid, v)
    base = carleman_ratio(u, 2.0, 0.25).ratio
    ratios = {lam: carleman_ratio(u, lam, 0.25).ratio for lam in (2.0, 4.0, 8.0, 16.0)}
    floor = min(ratios.values())
    ok = floor >= 0.5 * base
    _report(
        6, "energy-estimate ratio floor", ok,
        f"floor {floor:.4f} vs half base {0.5 * base:.4f}",
    )
    assert floor >= 0.5 * base


GATES = {1: 0.25, 2: 0.40, 3: 0.15, 4: 0.45}


@pytest.mark.parametrize("test", [1, 2, 3, 4])
def test_07_noisy_benchmark_medians(test):
    t0 = time.perf_counter()
    cfg = InverseConfig()
    errs, ns, decs = [], [], []
    for seed in (1, 2, 3):
        boundary, truth = prepare_case(test, 0.1, seed, cfg.grid, solver="fd")
        rec = minimize(initial_guess(boundary, cfg.grid), boundary, cfg, truth=truth)
        errs.append(rec.error)
        ns.append(rec.n_star)
        decs.append(rec.J[0] / rec.J[-1])
    err = float(np.median(errs))
    n_star = float(np.median(ns))
    dec = float(np.median(decs))
    elapsed = time.perf_counter() - t0
    ok = err <= GATES[test] and n_star <= 100 and dec >= 100 and elapsed < 60
    _report(
        7, f"noisy benchmark test {test}", ok,
        f"median error {err:.3f} (gate {GATES[test]}), n* {n_star:.0f}, "
        f"J decrease {dec:.0f}x, {elapsed:.0f}s",
    )
    assert err <= GATES[test]
    assert n_star <= 100
    assert dec >= 100
    assert elapsed < 60


def test_08_weight_strength_sweep():
    records = run_sweep("lambda", [0, 1, 2, 5], InverseConfig(), test=1, noise=0.0)
    by_lam = dict(zip([0, 1, 2, 5], records))
    diverged_fast = by_lam[0].diverged and by_lam[0].n_star <= 10
    e1, e2, e5 = by_lam[1].error, by_lam[2].error, by_lam[5].error
    close = abs(e2 - e5) <= 0.2 * min(e2, e5)
    better = e2 < e1 and e5 < e1
    ok = diverged_fast and close and better
    _report(
        8, "weight strength sweep", ok,
        f"lam=0 diverged={by_lam[0].diverged} n*={by_lam[0].n_star}; "
        f"errors lam1 {e1:.4f}, lam2 {e2:.4f}, lam5 {e5:.4f}",
    )
    assert diverged_fast
    assert close
    assert better


def test_09_time_slope_insensitivity():
    values = [0.2, 0.3, 0.4, 0.5]
    records = run_sweep("alpha", values, InverseConfig(), test=1, noise=0.0)
    errs = [r.error for r in records]
    spread_ok = max(errs) <= 1.2 * min(errs)
    detail = ", ".join(f"alpha {v}: {e:.4f}" for v, e in zip(values, errs))
    _report(9, "weight slope insensitivity", spread_ok, detail)
    assert spread_ok


def test_10_determinism_and_monotonicity(tmp_path):
    cfg = ExperimentConfig(
        test=2, noise=0.1, seed=3, out_dir=tmp_path / "a"
    )
    r1 = run_case(cfg)
    r2 = run_case(
        ExperimentConfig(test=2, noise=0.1, seed=3, out_dir=tmp_path / "b")
    )
    identical = (
        np.array_equal(r1.w_final.values, r2.w_final.values)
        and np.array_equal(r1.J, r2.J)
        and r1.error == r2.error
    )
    files_match = (
        (tmp_path / "a" / "test2_seed3_reconstruction.csv").read_bytes()
        == (tmp_path / "b" / "test2_seed3_reconstruction.csv").read_bytes()
    )
    monotone = bool(np.all(np.diff(r1.J) < 0))
    ok = identical and files_match and monotone
    _report(
        10, "determinism and monotone objective", ok,
        f"bit-identical={identical and files_match}, monotone J={monotone}",
    )
    assert identical
    assert files_match
    assert monotone
