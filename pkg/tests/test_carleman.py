"""Weighted-inequality checks: explicit-constant integral bound and the
energy-estimate ratio probe."""

import numpy as np
import pytest
from scipy.integrate import quad

from convexwave.carleman import (
    carleman_ratio,
    random_smooth_field,
    volterra_bound_check,
)
from convexwave.mesh import ScalarField, make_grid


@pytest.fixture(scope="module")
def rect():
    return make_grid(0.0, 1.0, 0.0, 2.0, 60, 90)


def test_bound_rejects_bad_parameters(rect):
    g = ScalarField.zeros(rect)
    with pytest.raises(ValueError):
        volterra_bound_check(g, 0.0, 0.5)
    with pytest.raises(ValueError):
        volterra_bound_check(g, 2.0, -0.1)


def test_bound_zero_field_is_degenerate(rect):
    rep = volterra_bound_check(ScalarField.zeros(rect), 2.0, 0.5)
    assert rep.degenerate and rep.lhs == 0.0


def test_bound_constant_field_closed_form():
    # g = 1: the running integral is t, so both sides reduce to separable
    # 1D integrals computable by quadrature
    grid = make_grid(0.0, 1.0, 0.0, 2.0, 300, 500)
    lam, alpha = 2.0, 0.5
    rep = volterra_bound_check(
        ScalarField(grid, np.ones((300, 500))), lam, alpha
    )
    ix = quad(lambda x: np.exp(-2 * lam * x), 0, 1)[0]
    lhs = ix * quad(lambda t: t**2 * np.exp(-2 * lam * alpha * t), 0, 2)[0]
    rhs = ix * quad(lambda t: np.exp(-2 * lam * alpha * t), 0, 2)[0]
    rhs /= (lam * alpha) ** 2
    assert rep.lhs == pytest.approx(lhs, rel=0.02)
    assert rep.rhs == pytest.approx(rhs, rel=0.02)
    assert rep.ratio < 1.0


def test_bound_holds_on_random_field_battery(rect):
    worst = 0.0
    for seed in range(100):
        g = random_smooth_field(rect, seed)
        for lam in (1.0, 2.0, 5.0):
            for alpha in (0.2, 0.5):
                rep = volterra_bound_check(g, lam, alpha)
                assert rep.lhs <= rep.rhs * (1 + 1e-6)
                worst = max(worst, rep.ratio)
    assert worst <= 1.0 + 1e-6


def test_ratio_requires_zero_data_columns(rect):
    g = random_smooth_field(rect, 0)  # generically nonzero at x=0
    with pytest.raises(ValueError, match="vanish"):
        carleman_ratio(g, 2.0, 0.25)


def test_ratio_zero_field_is_degenerate(rect):
    rep = carleman_ratio(ScalarField.zeros(rect), 2.0, 0.25)
    assert rep.degenerate


def test_ratio_positive_on_polynomial_field(rect):
    X, T = rect.meshgrid()
    v = X**2 * (1 - X) ** 2 * np.sin(np.pi * T / rect.t_max)
    v[:2, :] = 0.0
    rep = carleman_ratio(ScalarField(rect, v), 2.0, 0.25)
    assert rep.lhs > 0 and rep.rhs > 0 and rep.ratio > 0


def test_ratio_does_not_collapse_as_lambda_grows(rect):
    X, T = rect.meshgrid()
    v = X**2 * (1 - X) ** 2 * np.sin(np.pi * T / rect.t_max)
    v[:2, :] = 0.0
    u = ScalarField(rect, v)
    base = carleman_ratio(u, 2.0, 0.25).ratio
    ratios = [carleman_ratio(u, lam, 0.25).ratio for lam in (2.0, 4.0, 8.0, 16.0)]
    assert min(ratios) >= 0.5 * base


def test_random_smooth_field_zero_columns_flag(rect):
    f = random_smooth_field(rect, 4, zero_columns=True)
    assert np.abs(f.values[:2, :]).max() == 0.0
    assert np.abs(f.values).max() > 0.0
