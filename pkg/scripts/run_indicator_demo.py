#!/usr/bin/env python3
"""Run the indicator-projection demonstration and print the report.

Usage: python scripts/run_indicator_demo.py [out_dir]
"""

import sys
import time

from amrdmd import pipeline_cli


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else "out/indicator_demo"
    t0 = time.perf_counter()
    code = pipeline_cli.main(["demo", "indicator", out, "--force"])
    print(f"done in {time.perf_counter() - t0:.1f} s -> {out}")
    return code


if __name__ == "__main__":
    sys.exit(main())
