"""Rewrite tests/golden/*.jsonl from the current code.

Run after an intentional change to report contents, then review the diff.
"""

import argparse
import json
import subprocess
import sys
from pathlib import Path

GOLDEN = Path(__file__).resolve().parent.parent / "tests" / "golden"


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--only", nargs="*", help="case names to regenerate (default: all)")
    args = parser.parse_args()
    cases = json.loads((GOLDEN / "cases.json").read_text())
    for case in cases:
        if args.only and case["name"] not in args.only:
            continue
        out = GOLDEN / f"{case['name']}.jsonl"
        proc = subprocess.run([sys.executable, "-m", "qvpkit", *case["argv"], "--out", str(out)],
                              capture_output=True, text=True)
        print(f"{case['name']}: exit {proc.returncode}")
        if proc.returncode not in (0, case.get("exit", 0)):
            print(proc.stderr, file=sys.stderr)
            return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
