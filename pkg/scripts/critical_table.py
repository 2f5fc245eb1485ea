"""Critical constants and Froude numbers for a list of vorticities.

    python scripts/critical_table.py const:-1 const:-10 const:1 affine:-1,-1
"""

import argparse
import math

from vorwave import stream
from vorwave.report import csv_text
from vorwave.vorticity import parse_inline


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("omega", nargs="+")
    args = ap.parse_args()
    rows = []
    for spec in args.omega:
        om = parse_inline(spec)
        cc = stream.critical_constants(om)
        row = {"omega": spec, **cc.as_dict(), "F_c": stream.froude(om, cc.sc)}
        if math.isfinite(cc.R0):
            sp = stream.supercritical_speed_R0(om)
            row.update(s_plus_R0=sp, F_plus_R0=stream.froude(om, sp))
        rows.append(row)
    cols = ["omega", "class", "s0", "sc", "d0", "dc", "Rc", "R0", "F_c", "s_plus_R0", "F_plus_R0"]
    print(csv_text(rows, cols), end="")


if __name__ == "__main__":
    main()
