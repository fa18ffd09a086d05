"""Command-line front end.

One subcommand per experiment.  Parameters resolve in three layers: built-in
defaults, then a ``--config`` file (flat ``key = value``, e.g. a manifest
from an earlier run), then explicit flags.  Exit codes: 0 success, 1 usage
or configuration error, 2 numerical failure, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .collapse import CollapseWeightError
from .experiments import (
    EXPERIMENTS,
    MONTE_CARLO_EXPERIMENTS,
    ExperimentConfig,
    run_experiment,
)
from .guiding import ExcessiveFailureError, NodeError
from .output import emit_csv, emit_svg, read_config, write_manifest
from .sampling import EnvelopeError, SamplingStallError

__all__ = ["main", "build_parser"]

_NUMERICAL_ERRORS = (
    ExcessiveFailureError,
    SamplingStallError,
    EnvelopeError,
    NodeError,
    CollapseWeightError,
    ArithmeticError,
)

_DEFAULTS = {
    "count": 1000,
    "seed": None,
    "grid": None,
    "cutoff": 64,
    "rel_tol": 1e-8,
    "abs_tol": 1e-10,
    "workers": 1,
    "pattern": "equal",
    "max_steps": 500_000,
    "min_step": 1e-10,
}

_COERCERS = {
    "experiment": str,
    "count": int,
    "seed": int,
    "cutoff": int,
    "workers": int,
    "max_steps": int,
    "rel_tol": float,
    "abs_tol": float,
    "min_step": float,
    "grid": str,
    "pattern": str,
}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _parse_grid(text: str):
    parts = text.split(":")
    if len(parts) != 3:
        raise _UsageError(f"grid must be start:stop:points, got {text!r}")
    try:
        start, stop = float(parts[0]), float(parts[1])
        points = int(parts[2])
    except ValueError as exc:
        raise _UsageError(f"bad grid {text!r}: {exc}") from None
    return (start, stop, points)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="pilotbox",
        description="Trajectory ensembles and multi-time position correlations "
        "for particles in a box.",
    )
    parser.add_argument(
        "--version", action="version", version=f"pilotbox {__version__}"
    )
    sub = parser.add_subparsers(dest="experiment", metavar="EXPERIMENT")
    sub.required = True

    descriptions = {
        "analytic-sweep": "analytic GHZ sign correlator on a time grid (no sampling)",
        "equal-times": "GHZ sign product, all particles read at the same time",
        "two-times": "GHZ sign product, particle 1 at t = 0 and particles 2, 3 at s",
        "collapse-two-times": "two-times with an effective collapse at the first "
        "measurement",
        "fr": "two-time half-box probabilities on the Frauchiger-Renner style state",
    }
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=descriptions[name])
        p.add_argument("--config", help="flat key = value file (e.g. a run manifest)")
        p.add_argument("--grid", help="time grid start:stop:points")
        p.add_argument("--out", help="write rows to this CSV (manifest alongside)")
        p.add_argument("--svg", help="write a plot to this SVG file")
        if name == "analytic-sweep":
            p.add_argument(
                "--pattern",
                choices=("equal", "two"),
                help="equal: all readouts at t; two: first readout pinned at 0",
            )
            p.add_argument("--seed", type=int, help="unused; accepted for symmetry")
        else:
            p.add_argument("--count", type=int, help="ensemble size (>= 100)")
            p.add_argument("--seed", type=int, help="master seed (required)")
            p.add_argument("--cutoff", type=int, help="collapse expansion cutoff")
            p.add_argument("--rel-tol", type=float, help="integrator relative tolerance")
            p.add_argument("--abs-tol", type=float, help="integrator absolute tolerance")
            p.add_argument("--workers", type=int, help="worker threads (results identical)")
    return parser


def _resolve(args) -> ExperimentConfig:
    merged = dict(_DEFAULTS)
    if args.config:
        raw = read_config(args.config)  # OSError propagates as exit 3
        for key, value in raw.items():
            if key not in _COERCERS:
                raise _UsageError(f"unknown config key {key!r}")
            try:
                merged[key] = _COERCERS[key](value)
            except ValueError:
                raise _UsageError(f"bad value for config key {key!r}: {value!r}")
        cfg_exp = merged.pop("experiment", None)
        if cfg_exp is not None and cfg_exp != args.experiment:
            raise _UsageError(
                f"config file is for {cfg_exp!r}, command line says {args.experiment!r}"
            )
    for key in (
        "count",
        "seed",
        "grid",
        "cutoff",
        "rel_tol",
        "abs_tol",
        "workers",
        "pattern",
    ):
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value

    if args.experiment in MONTE_CARLO_EXPERIMENTS and merged["seed"] is None:
        raise _UsageError(f"{args.experiment} requires --seed")

    grid = merged["grid"]
    if isinstance(grid, str):
        grid = _parse_grid(grid)
    try:
        return ExperimentConfig(
            experiment=args.experiment,
            count=merged["count"],
            seed=merged["seed"],
            grid=grid,
            cutoff=merged["cutoff"],
            rel_tol=merged["rel_tol"],
            abs_tol=merged["abs_tol"],
            workers=merged["workers"],
            pattern=merged["pattern"],
            max_steps=merged["max_steps"],
            min_step=merged["min_step"],
        )
    except ValueError as exc:
        raise _UsageError(str(exc)) from None


def _print_table(result) -> None:
    print(f"# {result.experiment}")
    print(f"{'t':>12} {'quantum':>14} {'bohm_mean':>14} {'bohm_stderr':>13} "
          f"{'n_eff':>7} {'n_fail':>7}")
    for row in result.rows:
        print(
            f"{row.t:>12.6f} {row.quantum:>14.8f} {row.bohm_mean:>14.8f} "
            f"{row.bohm_stderr:>13.8f} {row.n_effective:>7d} {row.n_failed:>7d}"
        )


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code is None else int(exc.code)

    try:
        config = _resolve(args)
    except _UsageError as exc:
        print(f"pilotbox: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"pilotbox: i/o error: {exc}", file=sys.stderr)
        return 3

    try:
        result = run_experiment(config)
    except _NUMERICAL_ERRORS as exc:
        print(f"pilotbox: numerical failure: {exc}", file=sys.stderr)
        return 2

    try:
        if args.out:
            emit_csv(result, args.out)
            write_manifest(result, args.out, __version__)
        if args.svg:
            emit_svg(result, args.svg)
    except OSError as exc:
        print(f"pilotbox: i/o error: {exc}", file=sys.stderr)
        return 3

    if not args.out:
        _print_table(result)
    return 0


if __name__ == "__main__":
    sys.exit(main())
