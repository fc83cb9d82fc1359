#!/usr/bin/env python3
"""Regenerate the plot-ready CSV data sets in one go.

Writes into the output directory (default ./figure_data):

  collisions_trajectory.csv   cumulative collision count per draw index
  collisions_positions.csv    1-based position of each duplicate draw
  expected_scan.csv           k,naive,stable expected collisions, k = 32..64
  prob_relative_error.csv     k,relative_error of the literal vs the stable
                              collision probability, k = 32..64

Usage: python scripts/figure_data.py [outdir] [--n N] [--bits K] [--seed S]

Everything is deterministic given the arguments; plotting is left to
external tooling (the CSVs are gnuplot/pandas-friendly).
"""

import argparse
import pathlib
import sys

sys.path.insert(0, "src")

from collision_lab.cli import main as cli_main  # noqa: E402


def run(argv):
    code = cli_main(argv)
    if code != 0:
        raise SystemExit(f"command failed: {argv}")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("outdir", nargs="?", default="figure_data")
    ap.add_argument("--n", type=lambda s: int(float(s)), default=10 ** 6)
    ap.add_argument("--bits", type=int, default=32)
    ap.add_argument("--seed", type=int, default=271)
    args = ap.parse_args()

    outdir = pathlib.Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    n = str(args.n)

    run(["simulate", "--n", n, "--bits", str(args.bits),
         "--seed-base", str(args.seed), "--out", str(outdir / "collisions")])
    run(["scan", "--n", n, "--out", str(outdir / "expected_scan.csv")])
    run(["prob", "--n", n, "--errcmp",
         "--out", str(outdir / "prob_relative_error.csv")])

    print(f"wrote {outdir}/collisions_trajectory.csv")
    print(f"wrote {outdir}/collisions_positions.csv")
    print(f"wrote {outdir}/expected_scan.csv")
    print(f"wrote {outdir}/prob_relative_error.csv")


if __name__ == "__main__":
    main()
