"""inf_q Phi^(s)(q, 1) against kappa(s; r) across reference speeds, and the zero s_star."""

import argparse

import numpy as np

from vorwave import flux, heightfield as hfm, stream
from vorwave.vorticity import parse_inline


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--omega", default="const:-1")
    ap.add_argument("--period", type=float, default=10.0)
    ap.add_argument("--amplitude", type=float, default=0.01)
    ap.add_argument("--n", type=int, default=25)
    args = ap.parse_args()
    om = parse_inline(args.omega)
    hf = hfm.solve_stokes(om, args.period, amplitude=args.amplitude)
    F = hfm.flow_force(hf).mean
    sp = stream.supercritical_speed(om, hf.r)
    print(f"r = {hf.r:.12f}  F = {F:.12f}  s_base = {hf.s_base:.6f}  s_+ = {sp:.6f}")
    grid = np.union1d(np.linspace(stream.s0(om) + 0.05, sp, args.n), [hf.s_base])
    for s in grid:
        fx = flux.flux_function(hf, s, F)
        print(f"s={s:.6f} inf={fx.inf_top: .3e} at q={fx.argmin_q:.3f} kappa={fx.kappa: .3e}")
    res = flux.find_sstar(hf, F, flux.sstar_bracket(hf, F))
    tol = flux.identity_checks(hf, res.s_star, F).grid_tolerance
    print(f"s_star = {res.s_star:.10f}  inf = {res.inf_top:.2e}  kappa = {res.kappa:.2e}  grid tol = {tol:.1e}")


if __name__ == "__main__":
    main()
