"""Eigenvalues over the default (+-+) mass grid, written as CSV.

    python3 demos/portrait.py [out.csv]
"""

import sys

from dppeakons.classify import portrait


def main(out="portrait.csv"):
    grid = portrait()
    with open(out, "w") as f:
        f.write(grid.to_csv())
    counts = sorted(set(grid.positive_counts().tolist()))
    print(f"{len(grid)} rows -> {out}; eigenvalues with Re > 0 per row: {counts}; min |Re| = {grid.min_abs_real():.4f}")


if __name__ == "__main__":
    main(*sys.argv[1:])
