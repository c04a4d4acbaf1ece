"""Uniform space-time grids, scalar fields and the discrete calculus on them.

Everything downstream (wave solvers, the weighted objective, the inequality
checks) works on a rectangular mesh with spacings ``h_x`` and ``h_t``.  Fields
are stored x-major: ``values[i, j]`` is the sample at ``(x_i, t_j)``, so all
time samples for a fixed ``x`` are contiguous.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np
from numpy.typing import NDArray


@dataclass(frozen=True)
class UniformGrid:
    """Rectangular mesh on ``[x_min, x_max] x [t_min, t_max]``.

    ``n_x`` and ``n_t`` count grid *points* (not cells), so the spacings are
    ``(x_max - x_min)/(n_x - 1)`` and ``(t_max - t_min)/(n_t - 1)``.
    """

    x_min: float
    x_max: float
    t_min: float
    t_max: float
    n_x: int
    n_t: int

    def __post_init__(self) -> None:
        for name in ("x_min", "x_max", "t_min", "t_max"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.x_max <= self.x_min:
            raise ValueError("x_max must exceed x_min")
        if self.t_max <= self.t_min:
            raise ValueError("t_max must exceed t_min")
        if self.n_x < 4 or self.n_t < 4:
            raise ValueError("need at least 4 points along each axis")

    @property
    def h_x(self) -> float:
        return (self.x_max - self.x_min) / (self.n_x - 1)

    @property
    def h_t(self) -> float:
        return (self.t_max - self.t_min) / (self.n_t - 1)

    @property
    def x(self) -> NDArray[np.float64]:
        return np.linspace(self.x_min, self.x_max, self.n_x)

    @property
    def t(self) -> NDArray[np.float64]:
        return np.linspace(self.t_min, self.t_max, self.n_t)

    def meshgrid(self) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        """Coordinate matrices ``X[i, j] = x_i`` and ``T[i, j] = t_j``."""
        return np.meshgrid(self.x, self.t, indexing="ij")


def make_grid(
    x_min: float,
    x_max: float,
    t_min: float,
    t_max: float,
    n_x: int,
    n_t: int,
) -> UniformGrid:
    """Validated constructor for :class:`UniformGrid`."""
    return UniformGrid(
        float(x_min), float(x_max), float(t_min), float(t_max), int(n_x), int(n_t)
    )


@dataclass(frozen=True)
class ScalarField:
    """Real samples of a function on a :class:`UniformGrid`.

    ``values`` has shape ``(n_x, n_t)``; treat it as read-only after
    construction, all operations on fields are pure.
    """

    grid: UniformGrid
    values: NDArray[np.float64] = field(repr=False)

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n_x, self.grid.n_t):
            raise ValueError(
                f"values shape {v.shape} does not match grid "
                f"({self.grid.n_x}, {self.grid.n_t})"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("field contains non-finite values")
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(
        cls, grid: UniformGrid, fn: Callable[[NDArray, NDArray], NDArray]
    ) -> "ScalarField":
        X, T = grid.meshgrid()
        return cls(grid, np.asarray(fn(X, T), dtype=float) + np.zeros_like(X))

    @classmethod
    def zeros(cls, grid: UniformGrid) -> "ScalarField":
        return cls(grid, np.zeros((grid.n_x, grid.n_t)))

    def to_csv(self) -> str:
        """Serialize as ``x,t,value`` rows at full precision."""
        X, T = self.grid.meshgrid()
        buf = io.StringIO()
        buf.write("x,t,value\n")
        for x, t, v in zip(X.ravel(), T.ravel(), self.values.ravel()):
            buf.write(f"{float(x)!r},{float(t)!r},{float(v)!r}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ScalarField":
        rows = np.loadtxt(io.StringIO(text), delimiter=",", skiprows=1)
        xs = np.unique(rows[:, 0])
        ts = np.unique(rows[:, 1])
        grid = make_grid(xs[0], xs[-1], ts[0], ts[-1], len(xs), len(ts))
        values = rows[:, 2].reshape(len(xs), len(ts))
        return cls(grid, values)


RegionKind = Literal["rectangle", "triangle-Tr", "triangle-Tr-alpha-eps"]


@dataclass(frozen=True)
class Region:
    """Integration region: the full rectangle, the data triangle
    ``{x > 0, t > 0, x + t/2 < 1}``, or its shrunken variant
    ``{x > 0, t > 0, x + alpha*t < 2*alpha - eps}``.

    Membership is strict: a node lies inside iff its coordinates satisfy the
    strict inequalities, so boundary nodes are excluded deterministically.
    """

    kind: RegionKind = "rectangle"
    alpha: float = 0.5
    eps: float = 0.0

    def contains(self, x: NDArray, t: NDArray) -> NDArray[np.bool_]:
        x = np.asarray(x)
        t = np.asarray(t)
        if self.kind == "rectangle":
            return np.ones(np.broadcast(x, t).shape, dtype=bool)
        if self.kind == "triangle-Tr":
            return (x > 0) & (t > 0) & (x + t / 2 < 1)
        if self.kind == "triangle-Tr-alpha-eps":
            return (x > 0) & (t > 0) & (x + self.alpha * t < 2 * self.alpha - self.eps)
        raise ValueError(f"unknown region kind {self.kind!r}")


def weighted_sum(
    field: ScalarField,
    weight: Callable[[NDArray, NDArray], NDArray] | None = None,
    region: Region | None = None,
) -> float:
    """Discrete integral ``h_x*h_t * sum of value(i,j)*weight(x_i,t_j)``
    over the nodes inside ``region``.

    This is the plain node-sum quadrature used by the discrete objective, not
    a trapezoid rule; keeping the two consistent matters more than quadrature
    order.
    """
    g = field.grid
    X, T = g.meshgrid()
    w = np.ones_like(X) if weight is None else np.asarray(weight(X, T), dtype=float)
    vals = field.values * w
    if region is not None:
        vals = np.where(region.contains(X, T), vals, 0.0)
    return float(g.h_x * g.h_t * vals.sum())


DiffScheme = Literal["forward", "central", "second"]


def diff_x(field: ScalarField, i: int, j: int, scheme: DiffScheme) -> float:
    """Divided difference in x at node ``(i, j)``.

    ``second`` is the one-sided three-point second difference over nodes
    ``i, i+1, i+2``, matching the stencil of the discrete objective.
    """
    v = field.values
    h = field.grid.h_x
    if scheme == "forward":
        return float((v[i + 1, j] - v[i, j]) / h)
    if scheme == "central":
        if i == 0:
            raise IndexError("central diff_x needs i >= 1")
        return float((v[i + 1, j] - v[i - 1, j]) / (2 * h))
    if scheme == "second":
        return float((v[i, j] - 2 * v[i + 1, j] + v[i + 2, j]) / h**2)
    raise ValueError(f"unknown scheme {scheme!r}")


def diff_t(field: ScalarField, i: int, j: int, scheme: DiffScheme) -> float:
    """Divided difference in t at node ``(i, j)``; see :func:`diff_x`."""
    v = field.values
    h = field.grid.h_t
    if scheme == "forward":
        return float((v[i, j + 1] - v[i, j]) / h)
    if scheme == "central":
        if j == 0:
            raise IndexError("central diff_t needs j >= 1")
        return float((v[i, j + 1] - v[i, j - 1]) / (2 * h))
    if scheme == "second":
        return float((v[i, j] - 2 * v[i, j + 1] + v[i, j + 2]) / h**2)
    raise ValueError(f"unknown scheme {scheme!r}")
