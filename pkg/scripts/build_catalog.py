"""Regenerate src/mbqcla/data/default_catalog.json and check it by simulation."""

import argparse
import sys
from pathlib import Path

from mbqcla.fragments import default_catalog
from mbqcla.pattern import load_catalog, verify_catalog

DEFAULT_OUT = Path(__file__).resolve().parents[1] / "src" / "mbqcla" / "data" / "default_catalog.json"


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=DEFAULT_OUT)
    args = ap.parse_args()
    text = default_catalog().dumps()
    cat = load_catalog(text)
    report = verify_catalog(cat)
    for e in report.entries:
        print(f"{e.kind.value:14s} {'ok' if e.passed else 'FAIL'}  dev={e.max_deviation:.2e} rounds={e.rounds}")
    if not report.passed:
        return 2
    args.out.write_text(text + "\n")
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
