"""Exact sweep of the face-monotonicity conjecture.

Prints the summary and writes it, with the per-(d, k) observed directions,
as JSON.
"""

import argparse
import json
from pathlib import Path

from lahwalk import hullmodel


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--d-max", type=int, default=20)
    ap.add_argument("--n-extra", type=int, default=60)
    ap.add_argument("--out", type=Path, default=Path("results/conjecture.json"))
    args = ap.parse_args()
    rep = hullmodel.check_monotonicity_conjecture(args.d_max, args.n_extra)
    doc = rep.summary()
    doc["directions"] = [{"d": d, "k": k, "direction": v} for (d, k), v in sorted(rep.directions.items())]
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(json.dumps(doc, indent=2))
    print(f"pairs {doc['pairs']}, counterexamples {len(doc['counterexamples'])}, directions {doc['direction_counts']}")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
