#!/usr/bin/env python3
"""Sweep n/m ratios around the predicted threshold and record full-rank rates.

Usage: python scripts/rank_transition.py --k 3 --n 2000 --trials 40
Emits CSV (ratio, m, fraction) bracketing the predicted critical density.
"""

import argparse

from xorfunc.thresholds import beta_k, rank_mc_gf2


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--k", type=int, default=3)
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--trials", type=int, default=40)
    ap.add_argument("--points", type=int, default=13)
    ap.add_argument("--halfwidth", type=float, default=0.06)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    center = beta_k(args.k, 1e-5).beta
    print(f"# predicted threshold beta_{args.k} = {center:.5f}")
    print("ratio,m,fraction")
    for i in range(args.points):
        ratio = center - args.halfwidth + (2 * args.halfwidth) * i / (args.points - 1)
        m = round(args.n / ratio)
        exp = rank_mc_gf2(args.n, m, args.k, args.trials, args.seed)
        print(f"{args.n / m:.5f},{m},{exp.fraction:.4f}")


if __name__ == "__main__":
    main()
