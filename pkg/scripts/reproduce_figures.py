"""Optimized AoI of all four policies versus k at p = 1, 0.7, 0.4, 0.2.

Writes one CSV per recharge rate (plus manifest sidecars) and prints the
policy ranking at each (p, k). delta = 0.3 by default.

    python scripts/reproduce_figures.py --out-dir results/ --k 10..200:10
"""

import argparse
import sys
from collections import defaultdict
from pathlib import Path

from eh_aoi.cli import main as cli_main
from eh_aoi.cli import parse_int_range
from eh_aoi.core import Policy
from eh_aoi.search import sweep


def parse_args():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out-dir", default="results")
    ap.add_argument("--p", default="1,0.7,0.4,0.2")
    ap.add_argument("--delta", type=float, default=0.3)
    ap.add_argument("--k", default="20..200:20")
    ap.add_argument("--workers", type=int, default=4)
    return ap.parse_args()


def main():
    args = parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for p in args.p.split(","):
        path = out / f"aoi_p{p}.csv"
        code = cli_main(["sweep", "--p", p, "--delta", str(args.delta), "--k", args.k,
                         "--workers", str(args.workers), "--out", str(path)])
        if code:
            return code

    rows = sweep([float(x) for x in args.p.split(",")], [args.delta], parse_int_range(args.k),
                 list(Policy), workers=args.workers)
    table = defaultdict(dict)
    for r in rows:
        table[(r.params.p, r.params.k)][r.policy.value] = r.aoi
    print(f"{'p':>5} {'k':>5}  ranking (best first)")
    for (p, k), vals in sorted(table.items(), key=lambda kv: (-kv[0][0], kv[0][1])):
        rank = "  ".join(f"{pol}={a:.1f}" for pol, a in sorted(vals.items(), key=lambda kv: kv[1]))
        print(f"{p:>5} {k:>5}  {rank}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
