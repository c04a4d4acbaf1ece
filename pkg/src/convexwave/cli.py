"""Command-line front end.

Subcommands: ``simulate`` (forward solve, trace CSV), ``preprocess`` (traces
-> boundary series CSV), ``invert`` (one full reconstruction), ``sweep``
(lambda/alpha parameter study), ``verify`` (weighted-inequality battery),
``reproduce`` (full multi-seed benchmark table).  All numeric outputs are
CSV, all plots SVG; every invert run writes a key=value manifest from which
it replays bit-identically.  Exit code 0 on success; failures name the stage
that broke on stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .forward import (
    TEST_COEFFICIENTS,
    TraceData,
    default_forward_grid,
    extract_traces,
    solve_forward_fd,
    solve_forward_volterra,
)
from .objective import CarlemanParams, InverseConfig
from .optimize import run_sweep
from .pipeline import (
    ExperimentConfig,
    config_from_mapping,
    parse_config_file,
    plot_reconstruction,
    run_case,
    reproduce_table,
)
from .preprocess import NoiseSpec, compute_boundary_data, noise_traces
from .transform import default_inverse_grid


def _add_common(p: argparse.ArgumentParser) -> None:
    # defaults stay None so a --config file's values win over absent flags
    p.add_argument("--test", type=int, default=None, choices=(1, 2, 3, 4))
    p.add_argument("--noise", type=float, default=None, metavar="XI")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", type=Path, default=None, metavar="DIR")


def _add_inverse(p: argparse.ArgumentParser) -> None:
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--mu", type=float, default=None)
    p.add_argument("--gamma0", type=float, default=None)
    p.add_argument("--config", type=Path, default=None, metavar="FILE")


def _experiment_config(args: argparse.Namespace) -> ExperimentConfig:
    """Merge --config file values with explicit flags (flags win)."""
    if args.config is not None:
        cfg = config_from_mapping(parse_config_file(args.config))
    else:
        cfg = ExperimentConfig()
    inv = cfg.inverse
    carleman = CarlemanParams(
        lam=args.lam if args.lam is not None else inv.carleman.lam,
        alpha=args.alpha if args.alpha is not None else inv.carleman.alpha,
    )
    inv = replace(
        inv,
        carleman=carleman,
        beta=args.beta if args.beta is not None else inv.beta,
        mu=args.mu if args.mu is not None else inv.mu,
        gamma0=args.gamma0 if args.gamma0 is not None else inv.gamma0,
    )
    return replace(
        cfg,
        test=args.test if args.test is not None else cfg.test,
        noise=args.noise if args.noise is not None else cfg.noise,
        seed=args.seed if args.seed is not None else cfg.seed,
        inverse=inv,
        out_dir=args.out,
    )


def _cmd_simulate(args: argparse.Namespace) -> int:
    a = TEST_COEFFICIENTS[args.test or 1]
    grid = default_forward_grid(args.n)
    solve = solve_forward_volterra if args.solver == "volterra" else solve_forward_fd
    u = solve(a, grid)
    traces = extract_traces(u)
    out = args.out or Path(".")
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"test{args.test or 1}_traces.csv"
    path.write_text(traces.to_csv())
    print(f"wrote {path}")
    if args.field:
        fpath = out / f"test{args.test or 1}_field.csv"
        fpath.write_text(u.to_csv())
        print(f"wrote {fpath}")
    return 0


def _cmd_preprocess(args: argparse.Namespace) -> int:
    noise = args.noise or 0.0
    if args.traces is not None:
        traces = TraceData.from_csv(Path(args.traces).read_text())
    else:
        grid = default_forward_grid()
        traces = extract_traces(
            solve_forward_fd(TEST_COEFFICIENTS[args.test or 1], grid)
        )
    if noise > 0:
        traces = noise_traces(traces, NoiseSpec(noise, args.seed or 1))
    smoothing = None if args.smoothing == "auto" else float(args.smoothing)
    boundary = compute_boundary_data(
        traces, default_inverse_grid(), noise_level=noise, smoothing=smoothing
    )
    out = args.out or Path(".")
    out.mkdir(parents=True, exist_ok=True)
    lines = ["t,p0,p1"]
    for t, p0, p1 in zip(
        boundary.p0.t_nodes, boundary.p0.values, boundary.p1.values
    ):
        lines.append(f"{float(t)!r},{float(p0)!r},{float(p1)!r}")
    path = out / "boundary.csv"
    path.write_text("\n".join(lines) + "\n")
    print(f"wrote {path}")
    return 0


def _cmd_invert(args: argparse.Namespace) -> int:
    config = _experiment_config(args)
    record = run_case(config)
    dec = record.J[0] / record.J[-1] if record.J[-1] > 0 else float("inf")
    err = "n/a" if record.error is None else f"{record.error:.4f}"
    print(
        f"test={config.test} noise={config.noise} seed={config.seed}: "
        f"error={err} n*={record.n_star} J {record.J[0]:.4g} -> "
        f"{record.J[-1]:.4g} ({dec:.1f}x)"
    )
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    values = [float(v) for v in args.values.split(",")]
    test = args.test or 1
    config = _experiment_config(args).inverse
    records = run_sweep(
        args.parameter, values, config, test=test, noise=args.noise or 0.0,
        seed=args.seed or 1,
    )
    lines = [f"{args.parameter},error,n_star,diverged"]
    for value, rec in zip(values, records):
        err = "" if rec.error is None else f"{rec.error:.6f}"
        lines.append(f"{value!r},{err},{rec.n_star},{int(rec.diverged)}")
        print(f"{args.parameter}={value}: error={err or 'n/a'} "
              f"n*={rec.n_star}{' DIVERGED' if rec.diverged else ''}")
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        path = args.out / f"sweep_{args.parameter}.csv"
        path.write_text("\n".join(lines) + "\n")
        truth = TEST_COEFFICIENTS[test]
        for value, rec in zip(values, records):
            plot_reconstruction(
                rec.x_nodes, rec.a_rec, truth(rec.x_nodes),
                args.out / f"sweep_{args.parameter}_{value:g}.svg",
            )
        print(f"wrote {path}")
    return 0


def _cmd_verify(args: argparse.Namespace) -> int:
    from .carleman import carleman_ratio, random_smooth_field, volterra_bound_check
    from .mesh import make_grid

    rows = ["check,detail,result"]
    ok = True

    grid = make_grid(0.0, 1.0, 0.0, 2.0, 80, 120)
    worst = 0.0
    violations = 0
    for lam in (1.0, 2.0, 5.0):
        for alpha in (0.2, 0.5):
            for seed in range(args.samples):
                g = random_smooth_field(grid, seed)
                rep = volterra_bound_check(g, lam, alpha)
                worst = max(worst, rep.ratio)
                if rep.lhs > rep.rhs * (1 + 1e-6):
                    violations += 1
    passed = violations == 0
    ok &= passed
    rows.append(
        f"integral-bound,{6 * args.samples} samples max ratio {worst:.4f},"
        f"{'pass' if passed else 'FAIL'}"
    )

    X, T = grid.meshgrid()
    from .mesh import ScalarField

    v = X**2 * (1 - X) ** 2 * np.sin(np.pi * T / grid.t_max)
    v[:2, :] = 0.0  # discrete zero-data columns required by the estimate
    u = ScalarField(grid, v)
    base = carleman_ratio(u, 2.0, 0.25).ratio
    floor = min(carleman_ratio(u, lam, 0.25).ratio for lam in (2.0, 4.0, 8.0, 16.0))
    passed = floor >= 0.5 * base
    ok &= passed
    rows.append(
        f"energy-estimate,ratio floor {floor:.4f} vs half of base {0.5 * base:.4f},"
        f"{'pass' if passed else 'FAIL'}"
    )

    table = "\n".join(rows) + "\n"
    print(table, end="")
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "verify.csv").write_text(table)
    return 0 if ok else 1


def _cmd_reproduce(args: argparse.Namespace) -> int:
    seeds = tuple(int(s) for s in args.seeds.split(","))
    base = _experiment_config(args).inverse
    table = reproduce_table(
        seeds=seeds, noise=args.noise if args.noise is not None else 0.1,
        base=base, out_dir=args.out,
    )
    print(table, end="")
    return 1 if "FAILED" in table else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="convexwave",
        description="Potential reconstruction for the 1D wave equation "
        "from boundary impulse-response traces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="forward solve; write trace CSV")
    _add_common(p)
    p.add_argument("--solver", choices=("fd", "volterra"), default="fd")
    p.add_argument("--n", type=int, default=1024, help="forward grid size")
    p.add_argument("--field", action="store_true", help="also write the full field")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("preprocess", help="traces -> boundary series CSV")
    _add_common(p)
    p.add_argument("--traces", type=Path, default=None, metavar="CSV")
    p.add_argument("--smoothing", default="auto", metavar="auto|P")
    p.set_defaults(func=_cmd_preprocess)

    p = sub.add_parser("invert", help="one full reconstruction run")
    _add_common(p)
    _add_inverse(p)
    p.set_defaults(func=_cmd_invert)

    p = sub.add_parser("sweep", help="lambda/alpha parameter study")
    _add_common(p)
    _add_inverse(p)
    p.add_argument("--parameter", choices=("lambda", "alpha"), default="lambda")
    p.add_argument("--values", default="0,1,2,5", metavar="V1,V2,...")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("verify", help="weighted-inequality battery")
    p.add_argument("--samples", type=int, default=100, help="random fields per case")
    p.add_argument("--out", type=Path, default=None, metavar="DIR")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("reproduce", help="multi-seed benchmark table")
    _add_common(p)
    _add_inverse(p)
    p.add_argument("--seeds", default="1,2,3", metavar="S1,S2,...")
    p.set_defaults(func=_cmd_reproduce, noise=0.1)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
