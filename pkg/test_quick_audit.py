#!/usr/bin/env python3
import logging
import os
import sys
import tempfile
from pathlib import Path

from tailcal import build_config, run_experiment
from tailcal.const import EXPERIMENT_KINDS, INGEST_AUDIT

# Set up logging
logging.basicConfig(level=logging.INFO)
_LOGGER = logging.getLogger(__name__)


def run_quick_audits(seed: int, out_root: Path) -> bool:
    """Run every synthetic experiment in quick mode and print its headline numbers."""
    ok = True
    for kind in EXPERIMENT_KINDS:
        if kind == INGEST_AUDIT:
            continue
        print(f"\nRunning {kind}...")
        cfg = build_config({"experiment": {"kind": kind, "seed": seed, "quick": True,
                                           "output": str(out_root / kind)}})
        try:
            result = run_experiment(cfg)
        except Exception as err:  # pylint: disable=broad-except
            print(f"❌ {kind} failed: {err}")
            ok = False
            continue

        print(f"✅ {kind}: {len(result.files)} report files in {result.out_dir}")
        for key in ("variants", "fits", "per_size", "sets", "rows", "fit"):
            if key in result.summary:
                print(f"  {key}: {result.summary[key]}")
    return ok


def main():
    seed = int(os.environ.get("TAILCAL_SEED", "20240601"))
    out_root = Path(os.environ.get("TAILCAL_OUT") or tempfile.mkdtemp(prefix="tailcal-"))

    print("Running quick calibration audits...")
    print(f"Seed: {seed}, output: {out_root}")

    if not run_quick_audits(seed, out_root):
        print("\n❌ Quick audit failed")
        sys.exit(1)
    else:
        print("\n✅ Quick audit successful")
        sys.exit(0)


if __name__ == "__main__":
    main()
