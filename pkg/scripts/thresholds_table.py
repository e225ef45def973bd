#!/usr/bin/env python3
"""Print the full-rank density threshold table with both evaluation routes.

Usage: python scripts/thresholds_table.py [--k-min 3] [--k-max 8] [--tol 1e-6]
"""

import argparse

from xorfunc.thresholds import beta_approx, beta_k


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--k-min", type=int, default=3)
    ap.add_argument("--k-max", type=int, default=8)
    ap.add_argument("--tol", type=float, default=1e-6)
    args = ap.parse_args()

    print("k,beta,beta_approx,beta_inverse,abs_gap")
    for k in range(args.k_min, args.k_max + 1):
        res = beta_k(k, args.tol)
        approx = beta_approx(k)
        print(
            f"{k},{res.beta:.6f},{approx:.6f},{res.beta_inverse:.6f},"
            f"{abs(res.beta - approx):.2e}"
        )


if __name__ == "__main__":
    main()
