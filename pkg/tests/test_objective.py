"""Objective, residual stencil, exact gradient/Jacobian/metric checks
against independent finite-difference oracles."""

import numpy as np
import pytest

from convexwave.forward import TimeSeries
from convexwave.mesh import ScalarField, make_grid
from convexwave.objective import (
    CarlemanParams,
    InverseConfig,
    apply_L,
    cwf,
    eval_J,
    fd_grad_oracle,
    gauss_newton_hessian,
    grad_J,
    residual_jacobian,
    residual_window,
)
from convexwave.preprocess import BoundaryData

from conftest import random_field


def _boundary_of(w: ScalarField) -> BoundaryData:
    """Boundary series consistent with the field's first two columns."""
    g = w.grid
    p0 = w.values[0, :].copy()
    p1 = (w.values[1, :] - w.values[0, :]) / g.h_x
    return BoundaryData(TimeSeries(g.t, p0), TimeSeries(g.t, p1))


def _config(grid, lam=2.0, alpha=0.5) -> InverseConfig:
    return InverseConfig(carleman=CarlemanParams(lam, alpha), grid=grid)


def test_weight_is_one_for_zero_lambda():
    p = CarlemanParams(0.0, 0.5)
    x = np.linspace(0, 1, 7)
    assert np.array_equal(cwf(x, x, p), np.ones(7))
    assert cwf(0.3, 0.7, CarlemanParams(2.0, 0.5)) == pytest.approx(
        np.exp(-2 * 2.0 * (0.3 + 0.5 * 0.7))
    )


def test_carleman_params_validation():
    with pytest.raises(ValueError):
        CarlemanParams(-1.0, 0.5)
    with pytest.raises(ValueError):
        CarlemanParams(2.0, 0.7)
    with pytest.raises(ValueError):
        CarlemanParams(2.0, 0.0)


def test_constant_field_has_zero_residual(small_grid):
    w = ScalarField(small_grid, np.full((14, 10), 0.7))
    assert np.abs(residual_window(w)).max() == 0.0
    assert np.abs(apply_L(w).values).max() == 0.0


def test_residual_matches_loop_oracle(small_grid):
    # independent pointwise re-derivation of the half-step stencil
    g = small_grid
    w = random_field(g, 11)
    v = w.values
    hx, ht = g.h_x, g.h_t
    r = residual_window(w)
    assert r.shape == (g.n_x - 2, g.n_t - 1)

    dxc = (v[2:, :] - v[:-2, :]) / (2 * hx)
    for i in (1, 5, g.n_x - 2):
        for j in (0, 3, g.n_t - 2):
            wxx = 0.5 * (
                (v[i - 1, j] - 2 * v[i, j] + v[i + 1, j]) / hx**2
                + (v[i - 1, j + 1] - 2 * v[i, j + 1] + v[i + 1, j + 1]) / hx**2
            )
            wxt = (
                v[i + 1, j + 1] - v[i - 1, j + 1] - v[i + 1, j] + v[i - 1, j]
            ) / (2 * hx * ht)
            wx = 0.5 * (dxc[i - 1, j] + dxc[i - 1, j + 1])
            wt = (v[i, j + 1] - v[i, j]) / ht
            wm = 0.5 * (v[i, j] + v[i, j + 1])

            def cum(jj):
                if jj == 0:
                    return 0.0
                return ht * np.sum(0.5 * (dxc[i - 1, 1 : jj + 1] + dxc[i - 1, :jj]))

            s = 0.5 * (cum(j) + cum(j + 1))
            expect = wxx - 2 * wxt + 2 * wx * s - 2 * wx * wm - 2 * wt * s
            assert r[i - 1, j] == pytest.approx(expect, rel=1e-12, abs=1e-14)


def test_objective_is_nonnegative_and_reported(small_grid):
    w = random_field(small_grid, 2)
    rep = eval_J(w, _boundary_of(w), _config(small_grid), with_gradient=True)
    assert rep.J >= 0
    assert rep.weighted_residual_sup <= rep.residual_sup + 1e-15
    assert np.isfinite(rep.grad_sup)


def test_boundary_mismatch_raises(small_grid):
    w = random_field(small_grid, 3)
    b = _boundary_of(w)
    bad = ScalarField(small_grid, w.values + 1.0)
    with pytest.raises(ValueError, match="boundary"):
        eval_J(bad, b, _config(small_grid))


@pytest.mark.parametrize("lam,alpha", [(2.0, 0.5), (0.0, 0.5), (5.0, 0.2)])
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_gradient_matches_central_difference(small_grid, seed, lam, alpha):
    w = random_field(small_grid, seed)
    b = _boundary_of(w)
    cfg = _config(small_grid, lam, alpha)
    G = grad_J(w, b, cfg).values
    O = fd_grad_oracle(w, b, cfg).values
    scale = np.abs(O).max()
    assert np.abs(G - O).max() / scale < 1e-5
    # fixed data columns never move
    assert np.abs(G[:2, :]).max() == 0.0


def test_residual_jacobian_matches_finite_differences(small_grid):
    g = small_grid
    w = random_field(g, 7)
    Jr = residual_jacobian(w).toarray()
    eps = 1e-7
    rng = np.random.default_rng(0)
    for _ in range(20):
        k = rng.integers(0, g.n_x * g.n_t)
        vp = w.values.ravel().copy()
        vp[k] += eps
        vm = w.values.ravel().copy()
        vm[k] -= eps
        col = (
            residual_window(ScalarField(g, vp.reshape(g.n_x, g.n_t)))
            - residual_window(ScalarField(g, vm.reshape(g.n_x, g.n_t)))
        ).ravel() / (2 * eps)
        assert np.abs(Jr[:, k] - col).max() < 1e-6 * max(1.0, np.abs(col).max())


def test_gauss_newton_is_exact_hessian_at_zero_residual():
    # the residual vanishes at w = 0, so the Gauss-Newton matrix equals the
    # true Hessian there; probe it against differenced exact gradients
    g = make_grid(0.0, 1.1, 0.0, 2.0, 8, 6)
    w = ScalarField.zeros(g)
    b = _boundary_of(w)
    cfg = _config(g)
    H = gauss_newton_hessian(w, cfg)
    n_free = (g.n_x - 2) * g.n_t
    assert H.shape == (n_free, n_free)
    eps = 1e-6
    rng = np.random.default_rng(1)
    for _ in range(10):
        k = rng.integers(0, n_free)
        bump = np.zeros((g.n_x, g.n_t))
        bump.ravel()[2 * g.n_t + k] = eps
        gp = grad_J(ScalarField(g, w.values + bump), b, cfg).values
        gm = grad_J(ScalarField(g, w.values - bump), b, cfg).values
        col = ((gp - gm) / (2 * eps))[2:, :].ravel()
        assert np.abs(H[:, k] - col).max() < 1e-6 * max(1.0, np.abs(col).max())


def test_gauss_newton_is_positive_definite(small_grid):
    w = random_field(small_grid, 5)
    H = gauss_newton_hessian(w, _config(small_grid))
    assert np.abs(H - H.T).max() < 1e-10 * np.abs(H).max()
    assert np.linalg.eigvalsh(H).min() > 0
