"""Grid refinement of a small Stokes wave: consistency residuals, flow-force spread, r and identities."""

import argparse

from vorwave import flux, stream, verify
from vorwave.vorticity import parse_inline


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--omega", default="const:-1")
    ap.add_argument("--period", type=float, default=10.0)
    ap.add_argument("--amplitude", type=float, default=0.01)
    ap.add_argument("--levels", type=int, default=3)
    ap.add_argument("--nq", type=int, default=65)
    ap.add_argument("--np", type=int, default=33)
    args = ap.parse_args()
    om = parse_inline(args.omega)
    st = verify.order_study(om, args.period, args.amplitude, verify.nested_grids(args.nq, args.np, args.levels))
    print(f"{'grid':>10} {'interior':>10} {'top':>10} {'spread':>10} {'r':>18} {'id dq':>9} {'id dp':>9} {'id top':>9}")
    for g, hf, a, b, c, r in zip(st.grids, st.waves, st.interior, st.top, st.spread, st.r):
        ids = flux.identity_checks(hf, stream.supercritical_speed(om, hf.r))
        print(f"{g[0]:>4}x{g[1]:<5} {a:10.2e} {b:10.2e} {c:10.2e} {r:18.12f} {ids.dq:9.1e} {ids.dp:9.1e} {ids.top:9.1e}")
    d = st.as_dict()
    print("interior ratios", [round(x, 2) for x in d["interior_ratios"]])
    print("top ratios     ", [round(x, 2) for x in d["top_ratios"]])
    print("spread ratios  ", [round(x, 2) for x in d["spread_ratios"]])


if __name__ == "__main__":
    main()
