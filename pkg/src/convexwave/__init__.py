"""Globally convergent reconstruction of a 1D wave-equation potential from
single-measurement boundary traces, via a Carleman-weighted convex objective."""

from .mesh import Region, ScalarField, UniformGrid, diff_t, diff_x, make_grid, weighted_sum
from .forward import (
    Coefficient,
    TEST_COEFFICIENTS,
    TimeSeries,
    TraceData,
    default_forward_grid,
    extract_traces,
    solve_forward_fd,
    solve_forward_volterra,
)
from .preprocess import (
    BoundaryData,
    NoiseSpec,
    SmoothingSpline,
    add_noise,
    auto_smoothing,
    bin_average,
    compute_boundary_data,
    fit_spline,
    noise_traces,
    reduce_acoustic,
    smooth_traces,
)
from .transform import default_inverse_grid, reconstruct_a, u_to_w
from .objective import (
    CarlemanParams,
    InverseConfig,
    ObjectiveReport,
    cwf,
    eval_J,
    grad_J,
    residual_window,
)
from .optimize import (
    RunRecord,
    compute_error,
    initial_guess,
    minimize,
    run_sweep,
)
from .carleman import (
    InequalityReport,
    carleman_ratio,
    random_smooth_field,
    volterra_bound_check,
)
from .pipeline import (
    ExperimentConfig,
    REFERENCE_ERRORS,
    clean_traces,
    prepare_case,
    reproduce_table,
    run_case,
)

__all__ = [
    "BoundaryData",
    "CarlemanParams",
    "Coefficient",
    "ExperimentConfig",
    "InequalityReport",
    "InverseConfig",
    "NoiseSpec",
    "ObjectiveReport",
    "REFERENCE_ERRORS",
    "Region",
    "RunRecord",
    "ScalarField",
    "SmoothingSpline",
    "TEST_COEFFICIENTS",
    "TimeSeries",
    "TraceData",
    "UniformGrid",
    "add_noise",
    "auto_smoothing",
    "bin_average",
    "carleman_ratio",
    "clean_traces",
    "compute_boundary_data",
    "compute_error",
    "cwf",
    "default_forward_grid",
    "default_inverse_grid",
    "diff_t",
    "diff_x",
    "eval_J",
    "extract_traces",
    "fit_spline",
    "grad_J",
    "initial_guess",
    "make_grid",
    "minimize",
    "noise_traces",
    "prepare_case",
    "random_smooth_field",
    "reconstruct_a",
    "reduce_acoustic",
    "reproduce_table",
    "residual_window",
    "run_case",
    "run_sweep",
    "smooth_traces",
    "solve_forward_fd",
    "solve_forward_volterra",
    "u_to_w",
    "volterra_bound_check",
    "weighted_sum",
]
