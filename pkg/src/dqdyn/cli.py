"""Command line front end: run scenario configs, compare trajectory files.

Exit codes: 0 success, 2 config or validation error, 3 solver divergence,
4 I/O error. Runs are deterministic; repeating one writes a byte-identical
trajectory file.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

from .errors import (
    ConfigError,
    SingularMatrixError,
    SolverDivergenceError,
    StepTooLargeError,
    ValidationError,
)
from .scenario import (
    INTEGRATOR_RK4,
    INTEGRATOR_VARIATIONAL,
    ScenarioConfig,
    build_run,
    load_config,
)
from .trajectory import compare_trajectories, read_trajectory, summarize, write_trajectory

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGENCE = 3
EXIT_IO = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dqdyn",
        description="Rigid-body simulation with a variational dual "
        "quaternion integrator (plus an RK4 reference).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="integrate one or more scenario configs")
    run.add_argument(
        "--config",
        action="append",
        required=True,
        metavar="PATH",
        help="scenario YAML; repeat for a batch",
    )
    run.add_argument("--output", metavar="PATH", help="trajectory file (single config only)")
    run.add_argument("--h", type=float, help="time step override")
    run.add_argument("--steps", type=int, help="step count override")
    run.add_argument("--tol", type=float, help="Newton tolerance override")
    run.add_argument("--max-iter", type=int, dest="max_iter", help="Newton iteration cap override")
    run.add_argument(
        "--integrator",
        choices=(INTEGRATOR_VARIATIONAL, INTEGRATOR_RK4),
        help="integrator override",
    )
    run.add_argument("--stride", type=int, help="output thinning override")
    run.add_argument("--jobs", type=int, default=1, help="batch parallelism (default 1)")

    comparison = sub.add_parser("compare", help="difference statistics of two trajectory files")
    comparison.add_argument("file_a", metavar="A")
    comparison.add_argument("file_b", metavar="B")
    return parser


def _apply_overrides(config: ScenarioConfig, args) -> ScenarioConfig:
    overrides = {}
    if args.output is not None:
        overrides["output_path"] = args.output
    if args.h is not None:
        if args.h <= 0.0:
            raise ConfigError("--h: time step must be positive")
        overrides["h"] = args.h
    if args.steps is not None:
        if args.steps < 0:
            raise ConfigError("--steps: must be non-negative")
        overrides["steps"] = args.steps
    if args.tol is not None:
        if args.tol <= 0.0:
            raise ConfigError("--tol: must be positive")
        overrides["tolerance"] = args.tol
    if args.max_iter is not None:
        if args.max_iter < 1:
            raise ConfigError("--max-iter: must be at least 1")
        overrides["max_iterations"] = args.max_iter
    if args.integrator is not None:
        overrides["integrator"] = args.integrator
    if args.stride is not None:
        if args.stride < 1:
            raise ConfigError("--stride: must be at least 1")
        overrides["stride"] = args.stride
    return replace(config, **overrides) if overrides else config


def _format_float(value: float) -> str:
    return f"{value:.6e}"


def _run_one(path: str, args) -> str:
    # imported lazily so `dqdyn compare` stays usable without a compiled
    # numba cache warm-up
    from .integrator import simulate
    from .newton_euler import rk4_simulate

    config = _apply_overrides(load_config(path), args)
    inputs = build_run(config)
    integrate = simulate if inputs.integrator == INTEGRATOR_VARIATIONAL else rk4_simulate
    traj = integrate(
        inputs.pose,
        inputs.twist,
        inputs.inertia,
        inputs.forces,
        inputs.settings,
        inputs.n_steps,
    )
    stats = summarize(traj)
    lines = [
        f"config: {path}",
        f"integrator: {inputs.integrator}",
        f"steps: {inputs.n_steps}",
    ]
    if "mean_newton_iterations" in stats:
        lines.append(f"mean newton iterations: {stats['mean_newton_iterations']:.3f}")
        lines.append(f"max residual: {_format_float(stats['max_residual_norm'])}")
    else:
        lines.append("mean newton iterations: n/a")
        lines.append("max residual: n/a")
    lines.append(f"energy drift: {_format_float(stats.get('energy_drift', 0.0))}")
    lines.append(f"momentum drift: {_format_float(stats.get('momentum_drift', 0.0))}")
    lines.append(f"norm drift: {_format_float(stats['max_unit_norm_error'])}")
    if config.output_path is not None:
        write_trajectory(traj, config.output_path, stride=config.stride, fields=config.fields)
        lines.append(f"wrote: {config.output_path}")
    return "\n".join(lines)


def _cmd_run(args) -> int:
    if args.jobs is not None and args.jobs < 1:
        raise ConfigError("--jobs: must be at least 1")
    if args.output is not None and len(args.config) > 1:
        raise ConfigError("--output applies to a single --config; batch runs take paths from each config")
    if len(args.config) == 1 or args.jobs == 1:
        blocks = [_run_one(path, args) for path in args.config]
    else:
        # configs are independent and share no mutable state; results are
        # printed in submission order so batch output stays deterministic
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            blocks = list(pool.map(lambda path: _run_one(path, args), args.config))
    print("\n\n".join(blocks))
    return EXIT_OK


def _cmd_compare(args) -> int:
    report = compare_trajectories(read_trajectory(args.file_a), read_trajectory(args.file_b))
    print(f"compared states: {report.n_common}")
    print(f"max pose difference: {_format_float(report.max_pose_error)}")
    print(f"rms pose difference: {_format_float(report.rms_pose_error)}")
    print(f"max twist difference: {_format_float(report.max_twist_error)}")
    print(f"rms twist difference: {_format_float(report.rms_twist_error)}")
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_compare(args)
    except (ConfigError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverDivergenceError, StepTooLargeError, SingularMatrixError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
