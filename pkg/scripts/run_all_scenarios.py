#!/usr/bin/env python3
"""Run every shipped scenario and write machine reports next to them.

Usage: python scripts/run_all_scenarios.py [--out DIR]
"""

import argparse
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from cyclecalc.scenario import run_scenario_text  # noqa: E402


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=None, help="directory for JSON reports")
    args = ap.parse_args()
    out_dir = Path(args.out) if args.out else None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
    bad = 0
    for path in sorted((ROOT / "scenarios").glob("*.scn")):
        report = run_scenario_text(path.read_text())
        status = "ok" if report.ok else "FAILED"
        counts = ", ".join(f"{k}={v}" for k, v in report.counts().items() if v)
        print(f"{path.name:<24} {status:<7} {counts}  ({report.timing_seconds:.2f}s)")
        if out_dir:
            (out_dir / (path.stem + ".json")).write_text(report.to_json())
        if not report.ok:
            bad += 1
            print(report.render_text())
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
