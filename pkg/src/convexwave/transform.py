"""Change of variables from the wave field to the log-derivative field, and
the final coefficient recovery.

The chain is ``v(x,t) = u(x, t+x)`` (straighten the characteristic cone),
``q = ln v`` (safe because ``v >= 1/2`` above the cone), ``w = dq/dt``.  The
unknown potential comes back out of ``w`` through ``a(x) = 2 w_x(x, 0)``.

``w`` lives on the inverse mesh, by convention ``(0, 1.1) x (0, 2)``; a
field of this kind is referred to as a *w-field* below.  Its first two node
columns carry the boundary data (see the objective module).
"""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray
from scipy.interpolate import RegularGridInterpolator

from .mesh import ScalarField, UniformGrid, make_grid


def default_inverse_grid(n_x: int = 60, n_t: int = 50) -> UniformGrid:
    """The standard inverse mesh (0, 1.1) x (0, 2)."""
    return make_grid(0.0, 1.1, 0.0, 2.0, n_x, n_t)


def u_to_w(
    u: ScalarField,
    inverse_grid: UniformGrid,
    v_floor: float = 0.25,
    source_width: float | None = None,
) -> ScalarField:
    """Build the w-field from a forward solution.

    ``v`` is the bilinear interpolation of ``u`` at the skewed points
    ``(x, t+x)``.  When the forward data were generated with a mollified
    impulse of standard deviation ``source_width`` (default: the forward
    solvers' default of a few cells), the smeared free-space front is
    subtracted and the exact sharp value 1/2 added back; the remaining
    scattered part is smooth across the cone, so the skewed rows near
    ``t = 0`` stay clean.  The on-cone row itself is pinned to the exact
    initial value 1/2.  ``w`` is the time derivative of ``ln v`` with
    second-order one-sided stencils at the two t-boundaries, so the ``t = 0``
    row (which feeds the coefficient recovery) carries O(h_t^2) error.
    """
    from .forward import DEFAULT_SOURCE_CELLS, impulse_front

    fg = u.grid
    xq = inverse_grid.x
    tq = inverse_grid.t
    if fg.x_min > xq[0] or fg.x_max < xq[-1] or fg.t_max < tq[-1] + xq[-1]:
        raise ValueError("forward grid does not cover the skewed inverse nodes")
    if source_width is None:
        source_width = DEFAULT_SOURCE_CELLS * fg.h_x

    # interpolate the scattered part u - u0: unlike u itself it is continuous
    # across the cone, so bilinear interpolation near t = 0 stays clean
    Xf, Tf = fg.meshgrid()
    scattered = u.values - impulse_front(Xf, Tf, source_width)
    interp = RegularGridInterpolator((fg.x, fg.t), scattered, method="linear")
    X, T = inverse_grid.meshgrid()
    pts = np.stack([X.ravel(), (T + X).ravel()], axis=-1)
    v = 0.5 + interp(pts).reshape(X.shape)
    v[:, 0] = 0.5  # exact on-cone value (the scattered part vanishes there)
    if np.any(v <= v_floor):
        raise ValueError(
            f"interpolated v dips to {v.min():.3g} <= {v_floor}; logarithm unsafe"
        )
    q = np.log(v)

    h = inverse_grid.h_t
    w = np.empty_like(q)
    w[:, 1:-1] = (q[:, 2:] - q[:, :-2]) / (2 * h)
    w[:, 0] = (-3 * q[:, 0] + 4 * q[:, 1] - q[:, 2]) / (2 * h)
    w[:, -1] = (3 * q[:, -1] - 4 * q[:, -2] + q[:, -3]) / (2 * h)
    return ScalarField(inverse_grid, w)


def reconstruct_a(
    w: ScalarField, nonneg: bool = False, method: str = "stencil"
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Recover coefficient samples via ``a(x) = 2 w_x(x, 0)``.

    ``method="stencil"`` (default): second-order stencils on the ``t = 0``
    row — central in the interior, one-sided at the row ends and for nodes
    whose forward neighbors would straddle the support edge ``x = 1``
    (several test potentials jump there, which kinks ``w(x, 0)``; a stencil
    across the kink overshoots badly).  It tracks the row faithfully and is
    the right choice when the row itself is accurate (fine meshes,
    round-trip checks).

    ``method="spline"``: the derivative of the interpolating cubic spline
    through the row.  Its global smoothness damps the node-to-node wiggle
    that descent on a coarse mesh leaves in the row, at the price of a
    little ringing near kinks; on the standard coarse reconstruction mesh it
    is measurably more accurate.

    Values are clamped to zero outside the support interval (0,1); the
    optional nonnegativity clamp is off by default so error metrics see the
    raw reconstruction.

    Returns ``(x_nodes, a_samples)`` on the w-field's x-nodes.
    """
    g = w.grid
    h = g.h_x
    x = g.x
    row = w.values[:, 0]
    if method == "spline":
        from scipy.interpolate import CubicSpline

        wx = CubicSpline(x, row)(x, 1)
    elif method == "stencil":
        wx = np.empty_like(row)
        wx[1:-1] = (row[2:] - row[:-2]) / (2 * h)
        wx[0] = (-3 * row[0] + 4 * row[1] - row[2]) / (2 * h)
        wx[-1] = (3 * row[-1] - 4 * row[-2] + row[-3]) / (2 * h)
        # backward stencil where a central one would cross the x=1 kink
        near_edge = np.nonzero((x < 1) & (x + h >= 1))[0]
        for i in near_edge:
            if i >= 2:
                wx[i] = (3 * row[i] - 4 * row[i - 1] + row[i - 2]) / (2 * h)
    else:
        raise ValueError(f"unknown recovery method {method!r}")
    a = 2 * wx
    x = g.x
    a[(x <= 0) | (x >= 1)] = 0.0
    if nonneg:
        a = np.maximum(a, 0.0)
    return x, a
