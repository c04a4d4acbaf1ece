"""Numeric verification of the two weighted inequalities behind the method.

Both live on the rectangle R = (0,1) x (0,T) with the exponential weight
``phi(x,t) = exp(-2 lambda (x + alpha t))``.

1. A Volterra-type bound with a fully explicit constant: the weighted L2
   norm of the running time integral of g is at most ``1/(lambda alpha)^2``
   times the weighted norm of g itself.  This is a sharp machine check —
   zero violations are tolerated.

2. A weighted energy estimate for fields vanishing along x=0: the weighted
   norm of ``u_xx - 2 u_xt`` dominates lambda-scaled lower-order weighted
   norms, up to an unknowable constant.  We therefore probe the *ratio*
   lhs / (lambda-scaled positive rhs) and assert it stays uniformly bounded
   below as lambda grows — the qualitative content that survives without the
   constant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .mesh import ScalarField


@dataclass(frozen=True)
class InequalityReport:
    """One evaluation of an inequality: both sides and their ratio."""

    lhs: float
    rhs: float
    ratio: float
    lam: float
    alpha: float
    degenerate: bool = False


def volterra_bound_check(
    g: ScalarField, lam: float, alpha: float
) -> InequalityReport:
    """Check  integral of (running time integral of g)^2 * phi  <=
    (1/(lam*alpha))^2 * integral of g^2 * phi  over the field's rectangle.

    The running integral uses cumulative trapezoid in t; both outer
    integrals use the plain node-sum quadrature.  Returns lhs, rhs (already
    scaled by the explicit constant) and their ratio.
    """
    if lam <= 0 or alpha <= 0:
        raise ValueError("lambda and alpha must be positive")
    grid = g.grid
    v = g.values
    ht = grid.h_t
    inner = np.zeros_like(v)
    np.cumsum(0.5 * (v[:, 1:] + v[:, :-1]) * ht, axis=1, out=inner[:, 1:])
    phi = np.exp(-2 * lam * (grid.x[:, None] + alpha * grid.t[None, :]))
    cell = grid.h_x * grid.h_t
    lhs = cell * float((inner**2 * phi).sum())
    rhs = cell * float((v**2 * phi).sum()) / (lam * alpha) ** 2
    ratio = lhs / rhs if rhs > 0 else (0.0 if lhs == 0 else np.inf)
    return InequalityReport(lhs, rhs, float(ratio), lam, alpha, rhs == 0.0)


def carleman_ratio(u: ScalarField, lam: float, alpha: float) -> InequalityReport:
    """Probe the weighted energy estimate on a field with zero data columns.

    lhs  = node sum of (u_xx - 2 u_xt)^2 * phi over interior nodes.
    rhs  = lam * int (u_x^2 + u_t^2) phi + lam^3 * int u^2 phi
         + lam * int u_x^2(x,0) e^{-2 lam x} + lam^3 * int u^2(x,0) e^{-2 lam x}
         - the two t=T boundary integrals scaled by e^{-2 lam alpha T}.
    Central stencils throughout; the report's ratio is lhs / max(rhs, tiny).
    """
    grid = u.grid
    v = u.values
    if np.abs(v[:2, :]).max() > 1e-12:
        raise ValueError("field must vanish on the first two x-columns")
    hx, ht = grid.h_x, grid.h_t
    ux = np.gradient(v, hx, axis=0)
    ut = np.gradient(v, ht, axis=1)
    uxx = np.zeros_like(v)
    uxx[1:-1, :] = (v[:-2, :] - 2 * v[1:-1, :] + v[2:, :]) / hx**2
    uxt = np.gradient(ux, ht, axis=1)
    phi = np.exp(-2 * lam * (grid.x[:, None] + alpha * grid.t[None, :]))
    cell = hx * ht
    inner = (slice(1, -1), slice(1, -1))
    lhs = cell * float((((uxx - 2 * uxt) ** 2) * phi)[inner].sum())

    wx = np.exp(-2 * lam * grid.x)
    rhs = (
        lam * cell * float(((ux**2 + ut**2) * phi)[inner].sum())
        + lam**3 * cell * float(((v**2) * phi)[inner].sum())
        + lam * hx * float((ux[:, 0] ** 2 * wx).sum())
        + lam**3 * hx * float((v[:, 0] ** 2 * wx).sum())
        - lam * np.exp(-2 * lam * alpha * grid.t_max) * hx * float((ux[:, -1] ** 2).sum())
        - lam**3
        * np.exp(-2 * lam * alpha * grid.t_max)
        * hx
        * float((v[:, -1] ** 2).sum())
    )
    degenerate = lhs == 0.0 and rhs <= 0.0
    ratio = lhs / max(rhs, 1e-300)
    return InequalityReport(lhs, float(rhs), float(ratio), lam, alpha, degenerate)


def random_smooth_field(
    grid, seed: int, modes: int = 5, zero_columns: bool = False
) -> ScalarField:
    """Truncated random Fourier sum with 1/k^2-decaying coefficients; test
    fodder for the inequality battery."""
    rng = np.random.default_rng(seed)
    X, T = grid.meshgrid()
    Lx = grid.x_max - grid.x_min
    Lt = grid.t_max - grid.t_min
    v = np.zeros_like(X)
    for kx in range(1, modes + 1):
        for kt in range(1, modes + 1):
            amp = rng.normal() / (kx * kt) ** 2
            px, pt = rng.uniform(0, 2 * np.pi, 2)
            v += amp * np.sin(np.pi * kx * (X - grid.x_min) / Lx + px) * np.sin(
                np.pi * kt * (T - grid.t_min) / Lt + pt
            )
    if zero_columns:
        ramp = np.clip((X - grid.x_min - 2 * grid.h_x) / (0.2 * Lx), 0.0, 1.0)
        v *= ramp**2
        v[:2, :] = 0.0
    return ScalarField(grid, v)
