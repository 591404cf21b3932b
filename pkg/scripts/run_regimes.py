#!/usr/bin/env python3
"""Run every regime experiment config in scripts/configs and write CSVs.

    python scripts/run_regimes.py --out results/ [--only giant_component] [--seed 7]

Each config ``<experiment>[_suffix].ini`` produces ``<stem>.csv`` (raw
replications) and ``<stem>.aggregate.csv`` in the output directory, and a
one-line summary per aggregate on stdout.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from rcgraph.config import load_experiment_config
from rcgraph.experiments import EXPERIMENTS, run_experiment, write_aggregate_csv, write_raw_csv

CONFIG_DIR = Path(__file__).resolve().parent / "configs"


def experiment_name(stem: str) -> str:
    for name in sorted(EXPERIMENTS, key=len, reverse=True):
        if stem == name or stem.startswith(name + "_"):
            return name
    raise SystemExit(f"config {stem!r} does not start with an experiment name {EXPERIMENTS}")


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", type=Path, required=True)
    ap.add_argument("--configs", type=Path, default=CONFIG_DIR)
    ap.add_argument("--only", action="append", default=[], help="config stem to run (repeatable)")
    ap.add_argument("--seed", type=int, help="override every config's seed")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args(argv)

    args.out.mkdir(parents=True, exist_ok=True)
    paths = sorted(args.configs.glob("*.ini"))
    if args.only:
        paths = [p for p in paths if p.stem in args.only]
    for path in paths:
        name = experiment_name(path.stem)
        spec, threads = load_experiment_config(name, path, args.seed)
        t0 = time.perf_counter()
        result = run_experiment(spec, threads=max(threads, args.threads))
        write_raw_csv(result, args.out / f"{path.stem}.csv")
        write_aggregate_csv(result, args.out / f"{path.stem}.aggregate.csv")
        extra = {k: v for k, v in result.metadata.items() if k in ("conditions", "admissibility")}
        if extra:
            (args.out / f"{path.stem}.meta.json").write_text(json.dumps(extra, indent=2, default=str))
        for a in result.aggregates:
            print(f"{path.stem:32s} {a.name:28s} n={a.n:<8d} freq={a.frequency:.3f} +/- {a.stderr:.3f}")
        print(f"{path.stem:32s} done in {time.perf_counter() - t0:.1f}s", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
