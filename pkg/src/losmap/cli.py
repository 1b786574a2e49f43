"""Command-line experiment runner."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

from .experiment import SOLVER_NAMES, emit, load_spec, run_experiment

log = logging.getLogger("losmap")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="losmap",
        description="Predicted LoS-map experiments: connectivity bounds and "
                    "relay-selection comparison on synthetic road scenarios.")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an experiment spec file")
    run.add_argument("spec", help="path to a JSON experiment spec")
    run.add_argument("--out", default=None, help="output directory "
                     "(default: spec output_dir)")
    run.add_argument("--seeds", type=int, default=None,
                     help="override repetitions per sweep point")
    run.add_argument("--solvers", default=None,
                     help=f"comma-separated subset of {','.join(SOLVER_NAMES)}")
    run.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    run.add_argument("--threads", type=int, default=1)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("LOSMAP_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s")
    args = _build_parser().parse_args(argv)

    try:
        spec = load_spec(args.spec)
        if args.seeds is not None:
            spec = replace(spec, repetitions=args.seeds)
        if args.solvers is not None:
            spec = replace(spec, solvers=tuple(args.solvers.split(",")))
        out_dir = Path(args.out if args.out is not None else spec.output_dir)
    except (OSError, ValueError) as exc:
        print(f"losmap: invalid spec: {exc}", file=sys.stderr)
        return 2

    try:
        log.info("running %d gamma points x %d solvers, %d repetitions",
                 len(spec.gamma_th_db), len(spec.solvers), spec.repetitions)
        rows = run_experiment(spec, threads=max(1, args.threads))
        out_dir.mkdir(parents=True, exist_ok=True)
        out_path = out_dir / f"results.{args.format}"
        emit(rows, args.format, out_path)
    except Exception as exc:  # surface a diagnostic, not a traceback
        print(f"losmap: run failed: {exc}", file=sys.stderr)
        return 1
    print(f"{len(rows)} rows -> {out_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
