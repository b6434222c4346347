"""Complex zeros of the Lah generating polynomial, as CSV for a scatter plot.

Default run: n = 300 with k = 2 and k = 10 (about two minutes in total).
Columns: n, k, re, im.
"""

import argparse
import csv
import time
from pathlib import Path

from lahwalk import lahdist


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=300)
    ap.add_argument("--k", type=int, action="append", help="repeatable; default 2 and 10")
    ap.add_argument("--precision", type=int, default=53, help="output precision in bits")
    ap.add_argument("--out", type=Path, default=Path("results/zeros.csv"))
    args = ap.parse_args()
    ks = args.k or [2, 10]
    args.out.parent.mkdir(parents=True, exist_ok=True)
    with args.out.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "k", "re", "im"])
        for k in ks:
            t0 = time.perf_counter()
            zs = lahdist.poly_zeros(args.n, k, precision_bits=args.precision)
            for z in zs:
                w.writerow([args.n, k, repr(z.real), repr(z.imag)])
            worst = max(z.real for z in zs)
            print(f"n={args.n} k={k}: {len(zs)} zeros, max real part {worst:.4g}, {time.perf_counter() - t0:.1f}s")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
