"""The exponentially weighted least-squares objective and its exact gradient.

The w-field satisfies, in exact arithmetic, the quasilinear equation

    w_xx - 2 w_xt + 2 w_x * I(w_x) - 2 w_x * w - 2 w_t * I(w_x) = 0,

where ``I`` is the running time integral from 0 to t.  The objective squares
the discrete residual of this equation, weighted by the convexifying factor
``phi(x,t) = exp(-2 lambda (x + alpha t))``, and adds a small discrete
H2-style Tikhonov term plus a penalty steering the outflow slope at x = A
to zero.  The weight concentrates the misfit near the measurement corner,
which is what makes the landscape effectively convex on bounded sets.

Stencil conventions: every residual is collocated at a half-step point
(x_i, t_{j+1/2}) for i = 1..n_x-2, j = 0..n_t-2, so each term is a
second-order approximation at the same point — centered differences in x,
a forward difference in t (centered about the half step), averages over
the two time levels for undifferentiated factors, and the cumulative
trapezoid rule for the running integral.  One-sided first-order stencils
were tried first and their O(h) truncation bias dominates the
reconstruction error on the default grid.  The first two node columns
carry the boundary data and are never optimization variables.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from numpy.typing import NDArray

from .mesh import ScalarField, UniformGrid
from .preprocess import BoundaryData
from .transform import default_inverse_grid


@dataclass(frozen=True)
class CarlemanParams:
    """Weight parameters: lambda >= 0 (0 disables the weight), alpha in (0, 1/2]."""

    lam: float = 2.0
    alpha: float = 0.5

    def __post_init__(self) -> None:
        if self.lam < 0:
            raise ValueError("lambda must be nonnegative")
        if not 0.0 < self.alpha <= 0.5:
            raise ValueError("alpha must lie in (0, 1/2]")


def cwf(x: NDArray | float, t: NDArray | float, params: CarlemanParams) -> NDArray:
    """The weight exp(-2*lambda*(x + alpha*t)); identically 1 for lambda=0."""
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    return np.exp(-2 * params.lam * (x + params.alpha * t))


@dataclass(frozen=True)
class InverseConfig:
    """Everything a reconstruction run needs besides the data."""

    carleman: CarlemanParams = CarlemanParams()
    beta: float = 1e-4
    mu: float = 1e2
    gamma0: float = 0.5
    stop_tol: float = 1e-2
    max_iter: int = 200
    grid: UniformGrid = field(default_factory=default_inverse_grid)

    def __post_init__(self) -> None:
        if not 0.0 < self.beta < 1.0:
            raise ValueError("beta must lie in (0, 1)")
        if self.mu < 0:
            raise ValueError("mu must be nonnegative")
        if self.gamma0 <= 0:
            raise ValueError("gamma0 must be positive")


@dataclass(frozen=True)
class ObjectiveReport:
    """Objective value plus the diagnostics logged per iteration."""

    J: float
    residual_sup: float
    weighted_residual_sup: float
    grad_sup: float = float("nan")

    def __post_init__(self) -> None:
        if not (np.isfinite(self.J) and self.J >= 0):
            raise ValueError("objective value must be finite and nonnegative")


def _halfstep_factors(values: NDArray, grid: UniformGrid):
    """The five state factors of the residual, each collocated at the
    half-step anchors (x_i, t_{j+1/2}); all arrays have shape
    (n_x-2, n_t-1)."""
    hx, ht = grid.h_x, grid.h_t
    v = values
    dxc = (v[2:, :] - v[:-2, :]) / (2 * hx)  # centered w_x at i=1..nx-2
    strap = np.zeros_like(dxc)
    strap[:, 1:] = ht * np.cumsum(0.5 * (dxc[:, 1:] + dxc[:, :-1]), axis=1)
    wx = 0.5 * (dxc[:, 1:] + dxc[:, :-1])
    wt = (v[1:-1, 1:] - v[1:-1, :-1]) / ht
    wmid = 0.5 * (v[1:-1, 1:] + v[1:-1, :-1])
    s = 0.5 * (strap[:, 1:] + strap[:, :-1])
    return dxc, wx, wt, wmid, s


def residual_window(w: ScalarField) -> NDArray[np.float64]:
    """Discrete residual at every stencil anchor; shape (n_x-2, n_t-1)."""
    g = w.grid
    hx, ht = g.h_x, g.h_t
    v = w.values
    _, wx, wt, wmid, s = _halfstep_factors(v, g)
    wxx = (v[:-2, :] - 2 * v[1:-1, :] + v[2:, :]) / hx**2
    wxx_mid = 0.5 * (wxx[:, 1:] + wxx[:, :-1])
    wxt = (v[2:, 1:] - v[:-2, 1:] - v[2:, :-1] + v[:-2, :-1]) / (2 * hx * ht)
    return wxx_mid - 2 * wxt + 2 * wx * s - 2 * wx * wmid - 2 * wt * s


def _anchor_phi(grid: UniformGrid, params: CarlemanParams) -> NDArray:
    """The weight sampled at the half-step anchor points."""
    return cwf(
        grid.x[1 : grid.n_x - 1, None],
        grid.t[None, : grid.n_t - 1] + grid.h_t / 2,
        params,
    )


class _MisfitOps:
    """Constant sparse operators mapping the raveled field to the raveled
    anchor window; cached per grid shape.  Every residual term is a
    state-dependent diagonal scaling of one of these, which gives the exact
    gradient, Jacobian, and Gauss-Newton Hessian for free.
    """

    def __init__(self, grid: UniformGrid):
        nx, nt = grid.n_x, grid.n_t
        hx, ht = grid.h_x, grid.h_t
        ex = np.ones(nx - 2)
        dcx = sp.diags_array(
            [-ex / (2 * hx), ex / (2 * hx)], offsets=[0, 2], shape=(nx - 2, nx)
        )
        d2x = sp.diags_array(
            [ex / hx**2, -2 * ex / hx**2, ex / hx**2],
            offsets=[0, 1, 2],
            shape=(nx - 2, nx),
        )
        mid = sp.diags_array([ex], offsets=[1], shape=(nx - 2, nx))
        et = np.ones(nt - 1)
        d1t = sp.diags_array(
            [-et / ht, et / ht], offsets=[0, 1], shape=(nt - 1, nt)
        )
        avg = sp.diags_array(
            [0.5 * et, 0.5 * et], offsets=[0, 1], shape=(nt - 1, nt)
        )
        trap = np.tril(np.full((nt, nt), ht), -1)
        trap[1:, 0] = ht / 2
        np.fill_diagonal(trap[1:, 1:], ht / 2)
        cum = sp.csr_array(trap)

        self.wxx = sp.csr_array(sp.kron(d2x, avg))
        self.wxt = sp.csr_array(sp.kron(dcx, d1t))
        self.wx = sp.csr_array(sp.kron(dcx, avg))
        self.wt = sp.csr_array(sp.kron(mid, d1t))
        self.wmid = sp.csr_array(sp.kron(mid, avg))
        self.s = sp.csr_array(sp.kron(dcx, avg @ cum))
        self.const = sp.csr_array(self.wxx - 2 * self.wxt)


_op_cache: dict[tuple, _MisfitOps] = {}


def _misfit_ops(grid: UniformGrid) -> _MisfitOps:
    key = (grid.n_x, grid.n_t, grid.h_x, grid.h_t)
    if key not in _op_cache:
        _op_cache[key] = _MisfitOps(grid)
    return _op_cache[key]


def apply_L(w: ScalarField) -> ScalarField:
    """The residual as a field on the same grid (zero outside the anchors)."""
    out = np.zeros_like(w.values)
    out[1:-1, :-1] = residual_window(w)
    return ScalarField(w.grid, out)


def _check_boundary(w: ScalarField, boundary: BoundaryData | None) -> None:
    if boundary is None:
        return
    g = w.grid
    col0 = boundary.p0.values
    col1 = boundary.p0.values + g.h_x * boundary.p1.values
    scale = max(1.0, np.abs(col0).max(), np.abs(col1).max())
    if (
        np.abs(w.values[0, :] - col0).max() > 1e-8 * scale
        or np.abs(w.values[1, :] - col1).max() > 1e-8 * scale
    ):
        raise ValueError("w does not carry the prescribed boundary columns")


def boundary_columns(
    boundary: BoundaryData, grid: UniformGrid
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """The two fixed node columns encoding w(0,t)=p0 and w_x(0,t)=p1."""
    col0 = boundary.p0.values.copy()
    return col0, col0 + grid.h_x * boundary.p1.values


def eval_J(
    w: ScalarField,
    boundary: BoundaryData | None,
    config: InverseConfig,
    with_gradient: bool = False,
) -> ObjectiveReport:
    """Evaluate the weighted objective.

    J = h_x h_t sum(residual^2 * phi)  over the stencil anchors
      + beta * h_x h_t * (sum w^2 + w_x^2 + w_t^2 + w_xx^2 + w_tt^2)
      + mu * sum_j ((w[-1,j] - w[-2,j]) / h_x)^2.
    """
    _check_boundary(w, boundary)
    g = w.grid
    hx, ht = g.h_x, g.h_t
    v = w.values
    r = residual_window(w)
    phi = _anchor_phi(g, config.carleman)
    J_res = hx * ht * float((r**2 * phi).sum())

    Dx = (v[1:, :] - v[:-1, :]) / hx
    Dt = (v[:, 1:] - v[:, :-1]) / ht
    Dxx = (v[:-2, :] - 2 * v[1:-1, :] + v[2:, :]) / hx**2
    Dtt = (v[:, :-2] - 2 * v[:, 1:-1] + v[:, 2:]) / ht**2
    reg = (v**2).sum() + (Dx**2).sum() + (Dt**2).sum() + (Dxx**2).sum() + (Dtt**2).sum()
    J_reg = config.beta * hx * ht * float(reg)

    slope = (v[-1, :] - v[-2, :]) / hx
    J_mu = config.mu * float((slope**2).sum())

    grad_sup = float("nan")
    if with_gradient:
        grad_sup = float(np.abs(grad_J(w, boundary, config).values).max())
    return ObjectiveReport(
        J=J_res + J_reg + J_mu,
        residual_sup=float(np.abs(r).max()) if r.size else 0.0,
        weighted_residual_sup=float(np.abs(r * phi).max()) if r.size else 0.0,
        grad_sup=grad_sup,
    )


def grad_J(
    w: ScalarField, boundary: BoundaryData | None, config: InverseConfig
) -> ScalarField:
    """Exact gradient of eval_J with respect to the free nodes.

    The misfit part is the residual Jacobian transposed against the weighted
    residual, evaluated with the cached constant operators (each residual
    term is a state-diagonal scaling of one of them); the quadratic
    regularization and penalty parts are accumulated by slice scatters.  The
    two fixed columns get gradient zero by construction.
    """
    _check_boundary(w, boundary)
    g = w.grid
    hx, ht = g.h_x, g.h_t
    nx, nt = g.n_x, g.n_t
    v = w.values
    ops = _misfit_ops(g)
    _, wx, wt, wmid, s = _halfstep_factors(v, g)
    r = residual_window(w)
    phi = _anchor_phi(g, config.carleman)
    q = (2 * hx * ht * r * phi).ravel()  # dJ_res/d(residual entry)

    wx = wx.ravel()
    wt = wt.ravel()
    wmid = wmid.ravel()
    s = s.ravel()
    G = (
        ops.const.T @ q
        + ops.wx.T @ ((2 * s - 2 * wmid) * q)
        + ops.s.T @ ((2 * wx - 2 * wt) * q)
        - ops.wmid.T @ (2 * wx * q)
        - ops.wt.T @ (2 * s * q)
    ).reshape(nx, nt)

    # regularization
    b2 = 2 * config.beta * hx * ht
    G += b2 * v
    Dx = (v[1:, :] - v[:-1, :]) / hx
    c = b2 * Dx / hx
    G[1:, :] += c
    G[:-1, :] -= c
    Dt = (v[:, 1:] - v[:, :-1]) / ht
    c = b2 * Dt / ht
    G[:, 1:] += c
    G[:, :-1] -= c
    Dxx = (v[:-2, :] - 2 * v[1:-1, :] + v[2:, :]) / hx**2
    c = b2 * Dxx / hx**2
    G[:-2, :] += c
    G[1:-1, :] -= 2 * c
    G[2:, :] += c
    Dtt = (v[:, :-2] - 2 * v[:, 1:-1] + v[:, 2:]) / ht**2
    c = b2 * Dtt / ht**2
    G[:, :-2] += c
    G[:, 1:-1] -= 2 * c
    G[:, 2:] += c

    # outflow slope penalty
    slope = (v[-1, :] - v[-2, :]) / hx
    G[-1, :] += 2 * config.mu * slope / hx
    G[-2, :] -= 2 * config.mu * slope / hx

    G[0, :] = 0.0
    G[1, :] = 0.0
    return ScalarField(g, G)


def residual_jacobian(w: ScalarField):
    """Sparse Jacobian of the anchor residuals with respect to every node.

    Rows follow ``residual_window(w).ravel()``, columns ``w.values.ravel()``
    (x-major).  The residual is quadratic in w, so the Jacobian is affine in
    the field: the constant stencil operators plus state-dependent diagonal
    scalings of the factor operators.
    """
    ops = _misfit_ops(w.grid)
    _, wx, wt, wmid, s = _halfstep_factors(w.values, w.grid)
    wx = wx.ravel()
    wt = wt.ravel()
    wmid = wmid.ravel()
    s = s.ravel()

    def scale(diag, op):
        return sp.csr_array(op.T.multiply(diag).T)

    return (
        ops.const
        + scale(2 * s - 2 * wmid, ops.wx)
        + scale(2 * wx - 2 * wt, ops.s)
        - scale(2 * wx, ops.wmid)
        - scale(2 * s, ops.wt)
    )


def gauss_newton_hessian(w: ScalarField, config: InverseConfig) -> NDArray:
    """Dense Gauss-Newton Hessian of eval_J over the free nodes at w.

    Misfit part: 2 h_x h_t J_r^T diag(phi) J_r with J_r the residual
    Jacobian; regularization and outflow-penalty parts are exact (they are
    quadratic).  Rows/columns for the two fixed data columns are dropped.
    This is the metric that preconditions the descent.
    """
    g = w.grid
    hx, ht = g.h_x, g.h_t
    nx, nt = g.n_x, g.n_t
    Jr = residual_jacobian(w)
    phi = _anchor_phi(g, config.carleman).ravel()
    H = 2 * hx * ht * (Jr.T.multiply(phi) @ Jr)

    one_x = np.ones(nx - 1)
    d1x = sp.diags_array(
        [-one_x / hx, one_x / hx], offsets=[0, 1], shape=(nx - 1, nx)
    )
    one_t = np.ones(nt - 1)
    d1t = sp.diags_array(
        [-one_t / ht, one_t / ht], offsets=[0, 1], shape=(nt - 1, nt)
    )
    one_xx = np.ones(nx - 2)
    d2x = sp.diags_array(
        [one_xx / hx**2, -2 * one_xx / hx**2, one_xx / hx**2],
        offsets=[0, 1, 2],
        shape=(nx - 2, nx),
    )
    one_tt = np.ones(nt - 2)
    d2t = sp.diags_array(
        [one_tt / ht**2, -2 * one_tt / ht**2, one_tt / ht**2],
        offsets=[0, 1, 2],
        shape=(nt - 2, nt),
    )
    ix = sp.eye_array(nx)
    it = sp.eye_array(nt)
    OPx = sp.kron(d1x, it)
    OPt = sp.kron(ix, d1t)
    OPxx = sp.kron(d2x, it)
    OPtt = sp.kron(ix, d2t)
    H = H + (2 * config.beta * hx * ht) * (
        sp.eye_array(nx * nt)
        + OPx.T @ OPx
        + OPt.T @ OPt
        + OPxx.T @ OPxx
        + OPtt.T @ OPtt
    )
    edge = sp.csr_array(
        ([-1.0 / hx, 1.0 / hx], ([0, 0], [nx - 2, nx - 1])), shape=(1, nx)
    )
    E = sp.kron(edge, it)
    H = H + (2 * config.mu) * (E.T @ E)

    return sp.csr_array(H)[2 * nt :, 2 * nt :].toarray()


def fd_grad_oracle(
    w: ScalarField,
    boundary: BoundaryData | None,
    config: InverseConfig,
    eps: float = 1e-6,
) -> ScalarField:
    """Central-difference gradient over the free nodes; the test oracle for
    grad_J, never used in the production path."""
    g = w.grid
    base = w.values
    G = np.zeros_like(base)
    for i in range(2, g.n_x):
        for j in range(g.n_t):
            bumped = base.copy()
            bumped[i, j] = base[i, j] + eps
            jp = eval_J(ScalarField(g, bumped), boundary, config).J
            bumped[i, j] = base[i, j] - eps
            jm = eval_J(ScalarField(g, bumped), boundary, config).J
            G[i, j] = (jp - jm) / (2 * eps)
    return ScalarField(g, G)
