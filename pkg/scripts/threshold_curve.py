"""Weak and strong neighborliness thresholds rho(delta) on a delta grid.

Columns: delta, rho_weak, rho_strong.
"""

import argparse
from pathlib import Path

import numpy as np

from lahwalk import hullmodel


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--lo", type=float, default=0.01)
    ap.add_argument("--hi", type=float, default=0.99)
    ap.add_argument("--points", type=int, default=99)
    ap.add_argument("--out", type=Path, default=Path("results/thresholds.csv"))
    args = ap.parse_args()
    deltas = np.linspace(args.lo, args.hi, args.points)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(hullmodel.threshold_csv(float(d) for d in deltas))
    print(f"rho_weak(1/2) = {hullmodel.weak_threshold_rho(0.5):.6f}")
    print(f"rho_strong(1/2) = {hullmodel.strong_threshold_rho(0.5):.6f}")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
