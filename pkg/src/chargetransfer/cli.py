"""Command line front end: presets over run_scenario plus report emission.

Exit codes: 0 success, 2 config validation failure, 3 solver failure,
4 guard-tripped run (the report is still written).
"""

import argparse
import json
import os
import sys

from .grids import set_fft_workers
from .potentials import ScenarioValidationError
from .evolution import GuardTripped
from .scenarios import (
    RunReport, Scenario, ScenarioConfigError, SolverError, emit_report, run_scenario,
)

EXIT_VALIDATION = 2
EXIT_SOLVER = 3
EXIT_GUARD = 4

_PRESETS = {
    "bound-states": [{"name": "bound-states"}],
    "propagate": [],
    "verify-decay": [{"name": "decay-fit"}],
    "verify-strichartz": [{"name": "strichartz", "p": 2, "q": 6}],
    "verify-ac": [{"name": "ac-residual"}],
    "matrix-diagnose": [{"name": "matrix-admissibility"}, {"name": "stability-probe"}],
    "oracle-compare": [{"name": "oracle-compare"}],
}


def build_parser():
    parser = argparse.ArgumentParser(prog="chargetransfer",
                                     description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for cmd in _PRESETS:
        p = sub.add_parser(cmd)
        p.add_argument("--config", required=True)
        p.add_argument("--out", default=None,
                       help="output directory (default $CHARGETRANSFER_OUT or ./out)")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--formats", default="json,csv")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    out_dir = args.out or os.environ.get("CHARGETRANSFER_OUT", "out")
    formats = tuple(f.strip() for f in args.formats.split(",") if f.strip())
    bad = [f for f in formats if f not in ("json", "csv", "svg")]
    if bad:
        print(f"error: unknown format '{bad[0]}'", file=sys.stderr)
        return EXIT_VALIDATION
    if args.threads is not None:
        set_fft_workers(args.threads)
    try:
        sc = Scenario.load(args.config)
    except (ScenarioConfigError, ScenarioValidationError, json.JSONDecodeError,
            KeyError, TypeError, ValueError) as exc:
        print(f"error: invalid config: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    raw = dict(sc.raw)
    preset = _PRESETS[args.command]
    if preset and not raw.get("estimators"):
        raw = {**raw, "estimators": preset}
    try:
        sc = Scenario.from_dict(raw)
    except ScenarioConfigError as exc:
        print(f"error: invalid config: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    import numpy as np
    try:
        report = run_scenario(sc, seed=args.seed)
    except (SolverError, np.linalg.LinAlgError, ArithmeticError) as exc:
        print(f"error: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ScenarioConfigError, ScenarioValidationError, ValueError) as exc:
        print(f"error: invalid config: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except GuardTripped as exc:
        report = RunReport(sc.raw, [], {"guard": str(exc)}, passed=False,
                           guard_message=str(exc))
        emit_report(report, out_dir, formats)
        print(f"guard tripped: {exc}", file=sys.stderr)
        return EXIT_GUARD
    paths = emit_report(report, out_dir, formats)
    for p in paths:
        print(p)
    if not report.passed:
        print(f"guard tripped: {report.guard_message}", file=sys.stderr)
        return EXIT_GUARD
    return 0


if __name__ == "__main__":
    sys.exit(main())
