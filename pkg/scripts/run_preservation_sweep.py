#!/usr/bin/env python3
"""Run the randomized order-preservation and invariance suites.

Walks every qualifying catalog distortion first, then samples random
ordered pairs and shape-conforming distortions; any violation beyond
tolerance is recorded with enough labels to replay it:

    python3 scripts/run_preservation_sweep.py --trials 200 --json-out sweep.json
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from stochorder.numerics import Tolerance
from stochorder.sweeps import (
    DEFAULT_SEED,
    DEFAULT_TRIALS,
    SUITE_NAMES,
    SweepConfig,
    run_all,
)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED)
    parser.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    parser.add_argument("--grid-count", type=int, default=48)
    parser.add_argument("--edge-margin", type=float, default=0.01)
    parser.add_argument("--abs-tol", type=float, default=1e-8)
    parser.add_argument("--rel-tol", type=float, default=1e-8)
    parser.add_argument("--suite", action="append", choices=SUITE_NAMES,
                        help="run only these suites (repeatable; default: all)")
    parser.add_argument("--json-out", help="write the full summary as JSON")
    args = parser.parse_args()

    config = SweepConfig(
        seed=args.seed,
        trials=args.trials,
        grid_count=args.grid_count,
        edge_margin=args.edge_margin,
        tolerance=Tolerance(abs_tol=args.abs_tol, rel_tol=args.rel_tol),
        suites=tuple(args.suite) if args.suite else SUITE_NAMES,
    )

    started = time.perf_counter()
    summary = run_all(config)
    elapsed = time.perf_counter() - started

    for suite in summary.suites:
        status = "ok" if suite.ok else f"{len(suite.failures)} FAILURE(S)"
        print(f"{suite.name:<28} {suite.passes}/{suite.trials} passed  "
              f"[{status}]")
    print(f"total wall time: {elapsed:.1f}s  (seed {config.seed}, "
          f"{config.trials} trials/suite)")

    if args.json_out:
        with open(args.json_out, "w", encoding="utf-8") as fp:
            json.dump(summary.to_json(), fp, indent=2, sort_keys=True)
            fp.write("\n")
        print(f"summary written to {args.json_out}")

    return 0 if summary.ok else 1


if __name__ == "__main__":
    sys.exit(main())
