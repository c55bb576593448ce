"""Command line harness: ``verify <suite> [options]``.

Exit codes: 0 when every asserted check passes, 1 on any failure, 2 on
usage or configuration errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .harness import (
    OUTPUT_ENV_VAR,
    SUITES,
    HarnessConfig,
    emit_summary,
    run_suite,
    summary_table,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="verify",
        description="Run the identity-verification suites for the "
        "half-space Bergman/Hardy toolkit.",
    )
    parser.add_argument(
        "suite",
        choices=SUITES + ("all",),
        help="which check suite to run",
    )
    parser.add_argument(
        "--n",
        action="append",
        type=int,
        metavar="K",
        help="half-space dimension (repeatable; default 1)",
    )
    parser.add_argument("--config", metavar="FILE", help="JSON config file")
    parser.add_argument("--corpus", metavar="FILE", help="corpus JSON file")
    parser.add_argument(
        "--out",
        metavar="DIR",
        help=f"output directory (default ${OUTPUT_ENV_VAR} if set)",
    )
    parser.add_argument("--workers", type=int, metavar="W", help="worker threads")
    parser.add_argument("--seed", type=int, metavar="S", help="random seed")
    parser.add_argument(
        "--tol-scale",
        type=float,
        metavar="X",
        help="multiply every tolerance by X",
    )
    parser.add_argument(
        "--no-figures",
        action="store_true",
        help="skip figure rendering in the output directory",
    )
    parser.add_argument(
        "--quad-level", type=int, metavar="L", help="override tanh-sinh max level"
    )
    parser.add_argument(
        "--quad-samples", type=int, metavar="M", help="override QMC sample count"
    )
    return parser


def config_from_args(args) -> HarnessConfig:
    base: dict = {}
    if args.config:
        with open(args.config) as fh:
            base = json.load(fh)
    if args.suite:
        base["suites"] = [args.suite]
    if args.n:
        base["dimensions"] = args.n
    if args.corpus:
        base["corpus_path"] = args.corpus
    if args.out:
        base["out_dir"] = args.out
    elif "out_dir" not in base and os.environ.get(OUTPUT_ENV_VAR):
        base["out_dir"] = os.environ[OUTPUT_ENV_VAR]
    if args.workers:
        base["workers"] = args.workers
    if args.seed is not None:
        base["seed"] = args.seed
    if args.tol_scale is not None:
        base["tol_scale"] = args.tol_scale
    if args.no_figures:
        base["figures"] = False
    overrides = dict(base.get("quad_overrides", {}))
    if args.quad_level:
        overrides["level"] = args.quad_level
    if args.quad_samples:
        overrides["sample_count"] = args.quad_samples
    if overrides:
        base["quad_overrides"] = overrides
    base.setdefault("dimensions", [1])
    return HarnessConfig.from_json(base)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = config_from_args(args)
    except (OSError, ValueError, TypeError, json.JSONDecodeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2

    try:
        exit_code, reports = run_suite(config)
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2

    print(summary_table(reports))
    if config.out_dir:
        written = emit_summary(reports, config.out_dir, figures=config.figures)
        for path in written:
            print(f"wrote {path}")
    return exit_code


if __name__ == "__main__":
    sys.exit(main())
