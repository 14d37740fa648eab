"""
Command-line front end.

    reactorscale run scenario.json [--out DIR] [--seed N] [--strict] [--format csv|json]
    reactorscale sweep DIR [--out DIR] ...
    reactorscale verify MODEL

Exit codes: 0 success, 2 validation error, 3 solver failure (or a failed
verification check), 4 correlation range violation under ``--strict``.
"""

import argparse
import dataclasses
import glob
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from reactorscale import io
from reactorscale.scenario import MODELS, ScenarioError, StrictRangeError, load_scenario, run

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_SOLVER = 3
EXIT_RANGE = 4


def _classify(exc):
    if isinstance(exc, StrictRangeError):
        return EXIT_RANGE, "correlation_range"
    if isinstance(exc, ScenarioError):
        return EXIT_VALIDATION, "scenario"
    if isinstance(exc, (ValueError, TypeError, KeyError)):
        return EXIT_VALIDATION, "validation"
    if isinstance(exc, (RuntimeError, ArithmeticError, FloatingPointError)):
        return EXIT_SOLVER, "solver"
    return EXIT_SOLVER, "internal"


def run_one(path, out=None, seed=None, strict=False, fmt=None):
    """Run one scenario file; returns the exit code."""
    try:
        sc = load_scenario(path)
        if seed is not None:
            sc = dataclasses.replace(sc, seed=int(seed))
        stem = os.path.splitext(os.path.basename(path))[0]
        out_dir = out or sc.output.get("dir") or os.path.join("out", stem)
        report, files = run(sc, out_dir, fmt, strict)
    except Exception as exc:  # every failure becomes a diagnostic and an exit code
        code, kind = _classify(exc)
        message = str(exc)
        if isinstance(exc, ScenarioError) and message.startswith("scenario not found"):
            message = "scenario not found"
        io.emit_diagnostic("error", kind, message, scenario=os.fspath(path), exception=type(exc).__name__,
                           detail=str(exc))
        return code
    io.emit_diagnostic("info", "done", "scenario completed", scenario=os.fspath(path),
                       out=out_dir, files=len(files))
    return EXIT_OK


def _sweep_job(args):
    path, out, seed, strict, fmt = args
    return run_one(path, out, seed, strict, fmt)


def sweep(directory, out=None, seed=None, strict=False, fmt=None, workers=None):
    """Run every ``*.json`` scenario in ``directory`` into its own subdirectory."""
    if not os.path.isdir(directory):
        io.emit_diagnostic("error", "scenario", "sweep directory not found", directory=directory)
        return EXIT_VALIDATION
    paths = sorted(glob.glob(os.path.join(directory, "*.json")))
    if not paths:
        io.emit_diagnostic("error", "scenario", "no scenarios in sweep directory", directory=directory)
        return EXIT_VALIDATION
    base = out or os.path.join("out", os.path.basename(os.path.normpath(directory)))
    jobs = [(p, os.path.join(base, os.path.splitext(os.path.basename(p))[0]), seed, strict, fmt) for p in paths]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        codes = list(pool.map(_sweep_job, jobs))
    return max(codes)


def verify(model):
    from reactorscale.verify import run_suite

    try:
        checks = run_suite(model)
    except Exception as exc:
        code, kind = _classify(exc)
        io.emit_diagnostic("error", kind, str(exc), model=model)
        return code
    for c in checks:
        print(c.line())
    return EXIT_OK if all(c.passed for c in checks) else EXIT_SOLVER


def build_parser():
    parser = argparse.ArgumentParser(prog="reactorscale", description="Reactor and packed-column scenario runner")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, help="override the scenario seed")
        p.add_argument("--strict", action="store_true", help="fail on correlation extrapolation")
        p.add_argument("--format", choices=("csv", "json"), help="table format")

    p_run = sub.add_parser("run", help="run one scenario file")
    p_run.add_argument("scenario")
    common(p_run)
    p_sweep = sub.add_parser("sweep", help="run all scenarios in a directory concurrently")
    p_sweep.add_argument("directory")
    p_sweep.add_argument("--workers", type=int, default=None)
    common(p_sweep)
    p_ver = sub.add_parser("verify", help="run a model's oracle suite")
    p_ver.add_argument("model", choices=MODELS)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_VALIDATION
    if args.command == "run":
        return run_one(args.scenario, args.out, args.seed, args.strict, args.format)
    if args.command == "sweep":
        return sweep(args.directory, args.out, args.seed, args.strict, args.format, args.workers)
    return verify(args.model)


if __name__ == "__main__":
    sys.exit(main())
