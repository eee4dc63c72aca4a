#!/usr/bin/env python3
"""Regenerate every reference-curve bundle into one output tree.

Each target writes deterministic CSV/JSON files (fixed grids, fixed
formatting), so the output directory can be diffed between revisions to
catch numerical drift:

    python3 scripts/export_reference_curves.py --out-dir out/reference_curves
"""

from __future__ import annotations

import argparse
import os
import sys

from stochorder import cli


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="out/reference_curves",
                        help="root directory for the exported bundles")
    parser.add_argument("--target", action="append", choices=cli.REPRO_TARGETS,
                        help="export only these targets (repeatable; "
                             "default: all)")
    args = parser.parse_args()

    targets = tuple(args.target) if args.target else cli.REPRO_TARGETS
    failures = []
    for target in targets:
        out_dir = os.path.join(args.out_dir, target)
        code = cli.main(["reproduce", target, "--out-dir", out_dir])
        if code != 0:
            failures.append((target, code))
            print(f"{target}: FAILED with exit code {code}", file=sys.stderr)

    if failures:
        return 1
    print(f"exported {len(targets)} bundle(s) under {args.out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
