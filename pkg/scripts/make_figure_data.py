#!/usr/bin/env python3
"""Export every analysis curve as CSV for plotting.

Writes into the output directory (default ./figure_data):

  curve_<attack>.csv     mutual informations and capacities vs q1, for
                         ir, nort, dcnot-star, generic, bb84-ir, bb84-opt
  thresholds.csv         the security-threshold table
  secure_gain.csv        per-distance optimized beam-splitting gain
  pns_regions.csv        per-distance optimized PNS margins + crossover

All files use the same schemas as the CLI subcommands.
"""

import argparse
from pathlib import Path

from qkd2way.cli import main as cli_main

CURVES = ("ir", "nort", "dcnot-star", "generic", "bb84-ir", "bb84-opt")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--out-dir", type=Path, default=Path("figure_data"))
    parser.add_argument("--grid-step", type=float, default=0.001)
    parser.add_argument("--lmax", type=float, default=50.0)
    parser.add_argument("--lstep", type=float, default=0.25)
    args = parser.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)

    for attack in CURVES:
        path = args.out_dir / f"curve_{attack.replace('-', '_')}.csv"
        cli_main(["curves", "--attack", attack, "--grid-step", str(args.grid_step),
                  "--out", str(path)])
        print("wrote", path)
    path = args.out_dir / "thresholds.csv"
    cli_main(["thresholds", "--out", str(path)])
    print("wrote", path)
    path = args.out_dir / "secure_gain.csv"
    cli_main(["gain", "--lmax", str(args.lmax), "--lstep", str(args.lstep),
              "--out", str(path)])
    print("wrote", path)
    path = args.out_dir / "pns_regions.csv"
    cli_main(["pns", "--lmax", str(args.lmax), "--lstep", str(args.lstep),
              "--out", str(path)])
    print("wrote", path)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
