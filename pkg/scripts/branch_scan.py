"""Follow Stokes branches and check them against the nonexistence bound.

    python scripts/branch_scan.py --omega const:-1 --periods 2,5,10,20
"""

import argparse
import time
from pathlib import Path

from vorwave import heightfield as hfm, report, verify
from vorwave.vorticity import parse_inline


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--omega", default="const:-1")
    ap.add_argument("--periods", default="2,5,10,20")
    ap.add_argument("--nq", type=int, default=hfm.SCAN_NQ)
    ap.add_argument("--np", type=int, default=hfm.SCAN_NP)
    ap.add_argument("--out", default="out/branches.json")
    ap.add_argument("--save-last", action="store_true", help="write the terminal field of each branch")
    args = ap.parse_args()
    om = parse_inline(args.omega)
    keep = []
    t0 = time.perf_counter()
    rep = verify.nonexistence_scan(om, [float(x) for x in args.periods.split(",")], n_q=args.nq,
                                   n_p=args.np, keep=keep)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    report.write_text(out, report.dumps(rep.as_dict()) + "\n")
    if args.save_last:
        for hf in keep:
            report.write_text(out.with_name(f"terminus_L{hf.period:g}.json"), hf.to_json())
    print(f"class {rep.grid['class']}, bound {rep.grid['bound']:.7f}, R0 {rep.grid['R0']:.7f}")
    for r in rep.records:
        if r["type"] == "branch":
            print(f"L={r['period']:<5g} points={r['points']:<3d} r_max={r['r_max']:.6f} "
                  f"u-c min={r['terminus_stagnation']:.4f} end: {r['termination']} ({r['message']})")
    print(rep.verdict["statement"], f"(bound margin {rep.verdict['bound_margin']:.4f})",
          f"{time.perf_counter() - t0:.0f}s")


if __name__ == "__main__":
    main()
