"""Monotone-turn scans of sigma and kappa over the regression corpus, one JSON report each."""

import argparse
from pathlib import Path

from vorwave import report, stream, verify
from vorwave.vorticity import parse_inline

CORPUS = ["const:-1", "const:-10", "const:1", "affine:-1,-1"]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/lemma")
    ap.add_argument("--offsets", default="0,1,10", help="r - R0 values")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for spec in CORPUS:
        om = parse_inline(spec)
        R0 = stream.critical_constants(om).R0
        for dr in map(float, args.offsets.split(",")):
            rep = verify.lemma_monotonicity_scan(om, R0 + dr)
            name = f"{spec.replace(':', '_').replace(',', '_')}_dr{dr:g}.json"
            report.write_text(out / name, report.dumps(rep.as_dict()) + "\n")
            v = rep.verdict
            print(f"{spec:14s} r=R0+{dr:<4g} s_+={rep.grid['s_plus']:.6f} pass={v['pass']} "
                  f"fd/tol={v['max_sensitivity_ratio']:.3f}")


if __name__ == "__main__":
    main()
