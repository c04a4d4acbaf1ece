"""Trace conditioning: multiplicative noise, constrained cubic smoothing
splines, and derivation of the inverse-problem boundary data.

The measured traces are ``f0 = u(0,t)`` and ``f1 = u_x(0,t)``.  After optional
noising and smoothing they turn into the boundary series ``p0 = f0'/f0`` and
``p1 = d/dt[(f0' + f1)/f0]``, which pin the first two node columns of the
w-field.  Differentiation goes through the fitted splines, never through
divided differences of noisy samples.

Also houses the travel-time reduction of an acoustic sound-speed profile to
an equivalent zeroth-order potential.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy.interpolate import BSpline, CubicSpline

from .forward import TimeSeries, TraceData
from .mesh import UniformGrid


@dataclass(frozen=True)
class NoiseSpec:
    """Multiplicative uniform noise: each sample scaled by (1 + r) with r
    uniform on [-level, level], drawn from a stream seeded by ``seed``."""

    level: float
    seed: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.level < 1.0:
            raise ValueError("noise level must lie in [0, 1)")


def add_noise(series: TimeSeries, spec: NoiseSpec) -> TimeSeries:
    """Corrupt a series with seeded multiplicative uniform noise."""
    rng = np.random.default_rng(spec.seed)
    r = rng.uniform(-spec.level, spec.level, size=len(series.values))
    return TimeSeries(series.t_nodes, series.values * (1 + r))


def noise_traces(traces: TraceData, spec: NoiseSpec) -> TraceData:
    """Noise both traces with independent child streams of ``spec.seed``."""
    children = np.random.SeedSequence(spec.seed).spawn(2)
    out = []
    for series, child in zip((traces.f0, traces.f1), children):
        r = np.random.default_rng(child).uniform(
            -spec.level, spec.level, len(series.values)
        )
        out.append(TimeSeries(series.t_nodes, series.values * (1 + r)))
    return TraceData(out[0], out[1])


def bin_average(series: TimeSeries, block: int) -> TimeSeries:
    """Average consecutive blocks of ``block`` samples (nodes and values).

    A trailing partial block is dropped.  Block means of iid noise shrink its
    standard deviation by ``sqrt(block)`` while the smooth signal only picks
    up an O(block_width^2) quadrature bias, so this is a cheap variance
    reduction ahead of the spline fit.
    """
    if block <= 1:
        return series
    n = (len(series.values) // block) * block
    if n < 4 * block:
        raise ValueError("too few samples to bin")
    t = series.t_nodes[:n].reshape(-1, block).mean(axis=1)
    y = series.values[:n].reshape(-1, block).mean(axis=1)
    return TimeSeries(t, y)


@dataclass(frozen=True)
class SmoothingSpline:
    """Cubic smoothing spline with optional clamped end conditions.

    Minimizer of ``p * sum(residuals^2) + (1 - p) * int(s'')^2`` over cubic
    splines with knots at the data nodes, subject to the hard constraints
    ``s(t_first) = end_value`` (if requested) and ``s''(t_last) = 0`` (if
    requested).  ``p = 1`` gives interpolation.
    """

    spline: BSpline
    smoothing: float

    def __call__(self, t: NDArray | float, derivative: int = 0) -> NDArray[np.float64]:
        return np.asarray(self.spline(t, nu=derivative), dtype=float)


def _basis_matrices(t_nodes: NDArray) -> tuple[NDArray, NDArray, NDArray]:
    """Design matrix B at the nodes, the Gram matrix of second derivatives,
    and the knot vector, for the cubic B-spline space on the node knots."""
    knots = np.concatenate([[t_nodes[0]] * 4, t_nodes[1:-1], [t_nodes[-1]] * 4])
    m = len(knots) - 4
    B = BSpline.design_matrix(t_nodes, knots, 3).toarray()
    # s'' is piecewise linear, so 2-point Gauss per interval integrates the
    # products exactly
    mid = 0.5 * (t_nodes[:-1] + t_nodes[1:])
    half = 0.5 * (t_nodes[1:] - t_nodes[:-1])
    g = 1 / np.sqrt(3)
    pts = np.concatenate([mid - g * half, mid + g * half])
    wts = np.concatenate([half, half])
    basis = BSpline(knots, np.eye(m), 3)
    D = basis(pts, nu=2)  # (n_pts, m)
    omega = (D * wts[:, None]).T @ D
    return B, omega, knots


def fit_spline(
    series: TimeSeries,
    smoothing: float = 1.0,
    end_value: float | None = None,
    flat_end_curvature: bool = False,
    end_value_at: float | None = None,
    flat_start_slope: bool = False,
) -> SmoothingSpline:
    """Fit the constrained cubic smoothing spline to a series.

    ``end_value`` clamps ``s`` at ``end_value_at`` (default: the first node;
    a point slightly before it constrains the cubic extension of the first
    piece); ``flat_end_curvature`` clamps ``s''`` to zero at the last node.
    Both are hard equality constraints solved through the KKT system of the
    penalized least-squares problem, not penalties.
    """
    p = float(smoothing)
    if not 0.0 < p <= 1.0:
        raise ValueError("smoothing parameter must lie in (0, 1]")
    t = series.t_nodes
    y = series.values
    if len(t) < 4:
        raise ValueError("need at least 4 samples")
    B, omega, knots = _basis_matrices(t)
    m = B.shape[1]
    basis = BSpline(knots, np.eye(m), 3)

    cons = []
    rhs_c = []
    if end_value is not None:
        where = t[0] if end_value_at is None else end_value_at
        cons.append(basis(where, nu=0))
        rhs_c.append(end_value)
        if flat_start_slope:
            cons.append(basis(where, nu=1))
            rhs_c.append(0.0)
    if flat_end_curvature:
        cons.append(basis(t[-1], nu=2))
        rhs_c.append(0.0)
    if p == 1.0:
        # exact interpolation; the spline space has two spare degrees of
        # freedom, spent on minimum curvature (and the end conditions)
        A = 2 * omega
        rhs = np.zeros(m)
        cons = list(B) + cons
        rhs_c = list(y) + rhs_c
    else:
        A = 2 * (p * B.T @ B + (1 - p) * omega)
        rhs = 2 * p * B.T @ y
    nc = len(cons)
    if nc:
        C = np.asarray(cons)
        kkt = np.zeros((m + nc, m + nc))
        kkt[:m, :m] = A
        kkt[:m, m:] = C.T
        kkt[m:, :m] = C
        full_rhs = np.concatenate([rhs, rhs_c])
    else:
        kkt = A
        full_rhs = rhs
    try:
        sol = np.linalg.solve(kkt, full_rhs)
    except np.linalg.LinAlgError:
        # constraints may be redundant (e.g. a clamp coinciding with an
        # interpolated sample); a consistent singular system is still fine
        sol = np.linalg.lstsq(kkt, full_rhs, rcond=None)[0]
        if not np.allclose(kkt @ sol, full_rhs, atol=1e-8 * max(1.0, np.abs(full_rhs).max())):
            raise ValueError("inconsistent or singular spline system")
    coef = sol[:m]
    return SmoothingSpline(BSpline(knots, coef, 3), p)


def auto_smoothing(
    series: TimeSeries,
    noise_level: float,
    end_value: float | None = None,
    flat_end_curvature: bool = False,
    end_value_at: float | None = None,
    flat_start_slope: bool = False,
) -> float:
    """Discrepancy-principle smoothing parameter.

    Largest ``p`` whose fit residual RMS still reaches the expected noise RMS
    ``noise_level * signal_rms / sqrt(3)`` (uniform multiplicative noise);
    located by bisection on ``log p``.  Returns 1 for noiseless input.
    """
    if noise_level == 0.0:
        return 1.0
    target = noise_level * np.sqrt((series.values**2).mean()) / np.sqrt(3)

    def resid_rms(p: float) -> float:
        s = fit_spline(
            series, p, end_value, flat_end_curvature, end_value_at, flat_start_slope
        )
        return float(np.sqrt(((s(series.t_nodes) - series.values) ** 2).mean()))

    lo, hi = -14.0, 0.0  # log10 p
    if resid_rms(10.0**hi) >= target:
        return 1.0
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        if resid_rms(10.0**mid) >= target:
            lo = mid
        else:
            hi = mid
    return 10.0**lo


def smooth_traces(
    traces: TraceData,
    noise_level: float,
    smoothing: float | None = None,
    t_cut: float = 0.08,
    bin_block: int = 8,
) -> tuple[SmoothingSpline, SmoothingSpline]:
    """Fit the two trace splines with their clamped end conditions.

    The f0 spline is clamped to the exact initial value 1/2 at t=0, the f1
    spline to 0, both with zero slope there (the potential vanishes at the
    receiver, so the exact traces start flat; without the slope clamp the
    fitted left-end derivative is noise-dominated and the quotients below
    blow up exactly where they matter most); both splines have zero curvature
    at the final time.  Samples with
    ``t < t_cut`` are excluded from the fit: they record the impulse front
    sweeping past the receiver (the sampled f0 ramps 0 -> 1/2 there), and the
    clamp at t=0 carries the correct limit instead.

    Noisy traces are additionally block-averaged (``bin_block`` samples per
    bin, after the cut) before fitting, and the discrepancy target drops by
    ``sqrt(bin_block)`` accordingly; this keeps the knot count small and the
    fitted derivatives far steadier near t=0.  ``smoothing`` overrides the
    discrepancy choice when given.
    """
    fits = []
    for series, end_value in ((traces.f0, 0.5), (traces.f1, 0.0)):
        keep = series.t_nodes >= t_cut
        clipped = TimeSeries(series.t_nodes[keep], series.values[keep])
        eff_noise = noise_level
        if noise_level > 0.0 and bin_block > 1:
            clipped = bin_average(clipped, bin_block)
            eff_noise = noise_level / np.sqrt(bin_block)
        p = (
            smoothing
            if smoothing is not None
            # the discrepancy search omits the slope clamp: with it, the
            # p=1 probe becomes an inconsistent constrained interpolation
            # whose least-squares residual can exceed the target, and the
            # search then wrongly settles on interpolation
            else auto_smoothing(clipped, eff_noise, end_value, True, 0.0)
        )
        fits.append(
            fit_spline(
                clipped,
                p,
                end_value=end_value,
                flat_end_curvature=True,
                end_value_at=0.0,
                flat_start_slope=True,
            )
        )
    return fits[0], fits[1]


@dataclass(frozen=True)
class BoundaryData:
    """The series p0, p1 sampled on the inverse grid's time nodes."""

    p0: TimeSeries
    p1: TimeSeries


def compute_boundary_data(
    traces: TraceData,
    inverse_grid: UniformGrid,
    noise_level: float = 0.0,
    smoothing: float | None = None,
    f0_floor: float = 0.25,
    bin_block: int = 8,
) -> BoundaryData:
    """Boundary data ``p0 = f0'/f0`` and ``p1 = d/dt[(f0' + f1)/f0]`` on the
    inverse grid's time nodes, via spline derivatives.

    Rejects traces whose smoothed f0 dips below ``f0_floor`` (the exact field
    satisfies f0 >= 1/2; half of that tolerates 10% noise plus smoothing
    transients, anything lower makes the quotients unsafe).
    """
    s0, s1 = smooth_traces(traces, noise_level, smoothing, bin_block=bin_block)
    tq = inverse_grid.t
    f0 = s0(tq)
    if np.any(f0 < f0_floor):
        raise ValueError(
            f"smoothed f0 dips to {f0.min():.3g} < {f0_floor}; quotient unsafe"
        )
    d0, dd0 = s0(tq, 1), s0(tq, 2)
    f1, d1 = s1(tq), s1(tq, 1)
    p0 = d0 / f0
    p1 = (dd0 + d1) / f0 - (d0 + f1) * d0 / f0**2
    return BoundaryData(TimeSeries(tq, p0), TimeSeries(tq, p1))


def reduce_acoustic(
    y: NDArray, c: NDArray
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Reduce a sound-speed profile to travel-time coordinates and an
    equivalent potential.

    Returns ``(x_nodes, p_samples)`` where ``x(y)`` is the cumulative travel
    time ``int_0^y ds/c`` and ``p = c''c/2 - (c')^2/4`` with derivatives in
    ``y``, evaluated along the map.  The wave problem in ``x`` with potential
    ``p`` is equivalent to the acoustic one in ``y``.
    """
    from scipy.integrate import cumulative_trapezoid

    y = np.asarray(y, dtype=float)
    c = np.asarray(c, dtype=float)
    if np.any(c <= 0):
        raise ValueError("sound speed must be strictly positive")
    x = cumulative_trapezoid(1 / c, y, initial=0.0)
    cs = CubicSpline(y, c)
    p = 0.5 * cs(y, 2) * c - 0.25 * cs(y, 1) ** 2
    return x, p
