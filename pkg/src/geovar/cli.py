"""Command-line interface.

Verbs: run, convergence, list-presets, dump-config.  Exit codes:
0 success, 2 configuration error, 3 solver failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .config import dump_config, parse_config
from .errors import ConfigError, GeovarError, NoConvergence, UnknownPreset
from .harness import convergence_study, run
from .presets import PRESET_NAMES, load_preset
from .timestepper import SolverConfig

EXIT_CONFIG = 2
EXIT_SOLVER = 3


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--picard-max", type=int, default=None)
    p.add_argument("--residual-tol", type=float, default=None)
    p.add_argument("--poisson-tol", type=float, default=None)


def _solver_override(cfg_solver: SolverConfig, args) -> SolverConfig:
    kwargs = {}
    if args.picard_max is not None:
        kwargs["picard_max"] = args.picard_max
    if args.residual_tol is not None:
        kwargs["residual_tol"] = args.residual_tol
    if args.poisson_tol is not None:
        kwargs["poisson_tol"] = args.poisson_tol
    return replace(cfg_solver, **kwargs) if kwargs else cfg_solver


def _load_run_config(args):
    if args.config:
        config = parse_config(args.config)
    elif args.preset:
        config = load_preset(args.preset)
    else:
        raise ConfigError("need --preset or --config")
    overrides = {}
    if args.steps_per_snapshot is not None:
        overrides["steps_per_snapshot"] = args.steps_per_snapshot
    solver = _solver_override(config.solver, args)
    if solver is not config.solver:
        overrides["solver"] = solver
    return replace(config, **overrides) if overrides else config


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="geovar", description=__doc__)
    sub = parser.add_subparsers(dest="verb", required=True)

    p_run = sub.add_parser("run", help="run one simulation")
    p_run.add_argument("--preset", choices=PRESET_NAMES)
    p_run.add_argument("--config", type=Path)
    p_run.add_argument("--out", type=Path, default=Path("out"))
    p_run.add_argument("--steps-per-snapshot", type=int, default=None)
    p_run.add_argument("--binary", action="store_true", help="binary snapshot payloads")
    _add_solver_flags(p_run)

    p_conv = sub.add_parser("convergence", help="refinement convergence study")
    p_conv.add_argument("--preset", default="orszag-tang")
    p_conv.add_argument("--resolutions", default="8,16,32,64")
    p_conv.add_argument("--eps-over-h", type=float, default=7.85)
    p_conv.add_argument("--t-compare", type=float, default=0.25)
    p_conv.add_argument("--out", type=Path, default=Path("out"))

    sub.add_parser("list-presets", help="list benchmark presets")

    p_dump = sub.add_parser("dump-config", help="write a preset's config file")
    p_dump.add_argument("--preset", required=True, choices=PRESET_NAMES)
    p_dump.add_argument("-o", "--output", type=Path, default=None)

    args = parser.parse_args(argv)
    try:
        if args.verb == "list-presets":
            for name in PRESET_NAMES:
                print(name)
            return 0
        if args.verb == "dump-config":
            text = dump_config(load_preset(args.preset))
            if args.output:
                args.output.write_text(text)
            else:
                sys.stdout.write(text)
            return 0
        if args.verb == "run":
            config = _load_run_config(args)
            result = run(config, out_dir=args.out, binary=args.binary)
            print(f"completed {config.n_steps} steps; diagnostics in {result.csv_path}")
            return 0
        if args.verb == "convergence":
            resolutions = tuple(int(s) for s in args.resolutions.split(","))
            result = convergence_study(
                base_preset=args.preset,
                resolutions=resolutions,
                eps_over_h=args.eps_over_h,
                t_compare=args.t_compare,
            )
            args.out.mkdir(parents=True, exist_ok=True)
            table = args.out / "convergence.csv"
            table.write_text(result.to_csv())
            print(f"velocity slope {result.slope_velocity:.3f}, magnetic slope {result.slope_magnetic:.3f}")
            print(f"table in {table}")
            return 0
    except (ConfigError, UnknownPreset, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NoConvergence as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except GeovarError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    return 0


if __name__ == "__main__":
    sys.exit(main())
