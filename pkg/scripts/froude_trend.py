"""F(s_+(R0)) for omega = -b over a log range of b; the gap to sqrt(2) shrinks like 1/b."""

import argparse
import math

import numpy as np

from vorwave import verify


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--bmin", type=float, default=1e-2)
    ap.add_argument("--bmax", type=float, default=1e4)
    ap.add_argument("--n", type=int, default=13)
    args = ap.parse_args()
    bs = np.logspace(math.log10(args.bmin), math.log10(args.bmax), args.n)
    rep = verify.froude_limit_scan(bs, thresholds={})
    print(f"{'b':>12} {'F':>20} {'|F-sqrt2|':>12} {'b*gap':>10}")
    for r in rep.records:
        print(f"{r['b']:12.4g} {r['F']:20.15f} {r['gap']:12.4e} {r['b'] * r['gap']:10.5f}")
    above = [r["b"] for r in rep.records if r["F"] >= 2.0]
    # F diverges as b -> 0 (irrotational limit, R0 = inf)
    print("F >= 2 only for b <=", max(above) if above else "none", "| gap decreasing:", rep.verdict["gap_decreasing"])


if __name__ == "__main__":
    main()
