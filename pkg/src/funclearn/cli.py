"""Command line entry point: ``funclearn run | summarize | gen-data | select-lambda``.

Exit codes: 0 success, 1 config error, 2 runtime or fit error, 3 I/O error.
Set ``FUNCLEARN_LOG`` to error, info or debug for diagnostics on stderr.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import replace

import numpy as np

from . import harness
from .exceptions import ConfigError, FuncLearnError
from .simdata import dump_dataset_csv, gen_dataset

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_IO = 0, 1, 2, 3

log = logging.getLogger("funclearn")


def _setup_logging():
    level = os.environ.get("FUNCLEARN_LOG", "error").lower()
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(
        level=levels.get(level, logging.ERROR),
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )


def cmd_run(args):
    spec = harness.load_config(args.config)
    if args.seed is not None:
        spec = replace(spec, master_seed=args.seed)
    rows = harness.run_experiment(spec, parallelism=args.parallelism)
    harness.write_csv(rows, args.out, timing=not args.no_timing)
    failed = sum(bool(r.error) for r in rows)
    if args.summary:
        harness.write_csv(harness.summarize(rows), args.summary, timing=not args.no_timing)
    log.info("wrote %d rows (%d failed) to %s", len(rows), failed, args.out)
    return EXIT_OK


def cmd_summarize(args):
    rows = harness.read_results_csv(args.inp)
    summary = harness.summarize(rows)
    harness.write_csv(summary, args.out)
    if args.plot:
        harness.plot_summary(summary, args.plot, metric=args.metric)
    return EXIT_OK


def cmd_gen_data(args):
    spec = harness.load_config(args.config)
    if args.seed is not None:
        spec = replace(spec, master_seed=args.seed)
    rng = np.random.default_rng(spec.master_seed)
    dump_dataset_csv(gen_dataset(spec.scenario_config(), args.n, rng), args.out)
    return EXIT_OK


def cmd_select_lambda(args):
    spec = harness.load_config(args.config)
    best, scores = harness.select_ridge_lambda(spec, pilot_size=args.n)
    for lam, score in sorted(scores.items()):
        print(f"lambda={lam:g}\theldout_mse={score:.6g}")
    print(f"lambda={best:g}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="funclearn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a simulation sweep from a config file")
    run.add_argument("--config", required=True)
    run.add_argument("--out", required=True, help="per-repetition results CSV")
    run.add_argument("--parallelism", type=int, default=1)
    run.add_argument("--seed", type=int, default=None, help="override master_seed")
    run.add_argument("--summary", default=None, help="also write the summary CSV here")
    run.add_argument("--no-timing", action="store_true",
                     help="omit wall-time columns (byte-reproducible output)")
    run.set_defaults(func=cmd_run)

    summ = sub.add_parser("summarize", help="mean/std table from a results CSV")
    summ.add_argument("--in", dest="inp", required=True)
    summ.add_argument("--out", required=True)
    summ.add_argument("--plot", default=None, help="optional SVG/PNG figure path")
    summ.add_argument("--metric", default="prediction_error",
                      choices=["prediction_error", "estimation_error", "wall_time_seconds"])
    summ.set_defaults(func=cmd_summarize)

    gen = sub.add_parser("gen-data", help="dump one simulated dataset as CSV")
    gen.add_argument("--config", required=True)
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--out", required=True)
    gen.add_argument("--seed", type=int, default=None)
    gen.set_defaults(func=cmd_gen_data)

    sel = sub.add_parser("select-lambda", help="pick the ridge lambda on a pilot split")
    sel.add_argument("--config", required=True)
    sel.add_argument("--n", type=int, default=None, help="pilot training size")
    sel.set_defaults(func=cmd_select_lambda)
    return parser


def main(argv=None):
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (FuncLearnError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
