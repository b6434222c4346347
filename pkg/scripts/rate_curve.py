"""Rate function I_alpha(beta) by the closed form and by Legendre transform.

Columns: alpha, beta, closed, legendre.
"""

import argparse
import csv
from pathlib import Path

import numpy as np

from lahwalk import asymptotics


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alpha", type=float, action="append", help="repeatable; default 0.2, 0.5, 0.8")
    ap.add_argument("--points", type=int, default=60)
    ap.add_argument("--out", type=Path, default=Path("results/rate.csv"))
    args = ap.parse_args()
    alphas = args.alpha or [0.2, 0.5, 0.8]
    args.out.parent.mkdir(parents=True, exist_ok=True)
    worst = 0.0
    with args.out.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["alpha", "beta", "closed", "legendre"])
        for a in alphas:
            for b in np.linspace(a, 1, args.points + 2)[1:-1]:
                c = asymptotics.rate_function(a, float(b), "closed")
                lg = asymptotics.rate_function(a, float(b), "legendre")
                worst = max(worst, abs(c - lg))
                w.writerow([a, repr(float(b)), repr(c), repr(lg)])
    print(f"max |closed - legendre| = {worst:.2e}")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
