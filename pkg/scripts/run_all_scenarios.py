#!/usr/bin/env python3
"""Run every CLI scenario into <out>/<scenario>/ with one shared config.

The deconvolve scenario is fed from the noisy-qpt artifacts, demonstrating
the file-driven workflow end to end.
"""

import argparse
import sys
from pathlib import Path

from tbgate import cli


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results", help="output root directory")
    parser.add_argument("--config", default=None, help="JSON/TOML config file")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--exact", action="store_true",
                        help="zero-noise, infinite-statistics mode")
    args = parser.parse_args()

    root = Path(args.out)
    order = ["ideal-qpt", "qst-single", "entangle", "cnot-table",
             "noisy-qpt", "deconvolve"]
    for name in order:
        out = root / name
        scenario = cli.Scenario(name, args.config, str(out), args.seed,
                                args.exact)
        if name == "deconvolve":
            noisy = root / "noisy-qpt"
            scenario.chi_total_path = str(noisy / "chi_mle.json")
            scenario.chi_input_path = str(noisy / "chi_input.json")
        print(f"== {name}")
        for path in cli.run_scenario(scenario):
            print(f"   {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
