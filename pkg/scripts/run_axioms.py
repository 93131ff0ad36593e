#!/usr/bin/env python3
"""Run the axiom harness over both shipped characteristics, plus the
sign-mutation sensitivity check."""

import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from cyclecalc.axioms import run_axiom_harness  # noqa: E402


def main() -> int:
    ok = True
    for char in (0, 5):
        report = run_axiom_harness(char)
        print(f"--- characteristic {char}")
        print(report.render_text())
        ok = ok and report.ok
    mutated = run_axiom_harness(0, mutate_sign=True)
    fails = mutated.counts()["fail"]
    print(f"--- mutation run: {fails} failure(s) (expected >= 1)")
    ok = ok and fails >= 1
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
