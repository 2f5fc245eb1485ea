"""Command-line front end: ``vorwave <command> [options]``.

Every command prints (or writes with ``--out``) one deterministic JSON
document, or a CSV table with ``--format csv``.  Exit status: 0 success,
1 domain error, 2 numerical failure (including a scan whose verdict
fails), 3 usage error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import flux, heightfield as hfm, report, stream, verify
from .errors import DomainError, NumericalError
from .vorticity import VorticityError, parse_inline

EXIT_OK, EXIT_DOMAIN, EXIT_NUMERICAL, EXIT_USAGE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _positive(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not (x > 0 and math.isfinite(x)):
        raise argparse.ArgumentTypeError(f"must be positive and finite: {text!r}")
    return x


def _count(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if n < 3:
        raise argparse.ArgumentTypeError(f"must be at least 3: {text!r}")
    return n


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers: {text!r}")


def resolve_r(omega, text: str) -> float:
    """Bernoulli constant from a number or ``auto:R0`` / ``auto:Rc``."""
    if text.startswith("auto:"):
        cc = stream.critical_constants(omega)
        key = text[5:]
        if key not in ("R0", "Rc"):
            raise UsageError(f"unknown automatic constant {text!r} (use auto:R0 or auto:Rc)")
        val = cc.R0 if key == "R0" else cc.Rc
        if not math.isfinite(val):
            raise DomainError(f"{key} is infinite for this vorticity")
        return val
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"cannot parse r = {text!r}")


# -- commands -------------------------------------------------------------------


def cmd_stream(ns) -> tuple[dict, list[dict] | None, Sequence[str]]:
    om = parse_inline(ns.omega)
    sol = stream.stream_profile(om, ns.s, grid=ns.nodes)
    doc = sol.as_dict()
    doc["froude"] = stream.froude(om, ns.s)
    doc["critical"] = stream.critical_constants(om).as_dict()
    rows = [{"p": a, "H": b, "H_p": c} for a, b, c in zip(sol.p, sol.H, sol.H_p)]
    if ns.plot_data:
        doc["series"] = {"p": sol.p, "H": sol.H, "H_p": sol.H_p}
    return doc, rows, ("p", "H", "H_p")


def cmd_critical(ns):
    om = parse_inline(ns.omega)
    return stream.critical_constants(om).as_dict(), None, ()


def cmd_conjugate(ns):
    om = parse_inline(ns.omega)
    r = resolve_r(om, ns.r)
    cc = stream.critical_constants(om)
    if r <= cc.Rc:
        raise DomainError(f"r ≤ R_c (r = {r:.17g}, R_c = {cc.Rc:.17g}): no conjugate states")
    return stream.conjugate_states(om, r).as_dict(), None, ()


def cmd_sigma_kappa(ns):
    om = parse_inline(ns.omega)
    r = resolve_r(om, ns.r)
    base = stream.s0(om)
    lo = ns.s_min if ns.s_min is not None else base + 1e-3
    hi = ns.s_max if ns.s_max is not None else 2.0 * stream.supercritical_speed(om, r)
    if not base < lo < hi:
        raise DomainError(f"need s0 < s_min < s_max (s0 = {base:.17g})")
    rows = []
    for s in np.linspace(lo, hi, ns.n):
        s = float(s)
        rows.append({"s": s, "sigma": stream.sigma(om, s, r), "kappa": stream.kappa(om, s, r, ns.flow_force),
                     "R": stream.bernoulli_R(om, s), "F": stream.froude(om, s)})
    doc = {"r": r, "flow_force": ns.flow_force, "omega": om.to_dict(), "rows": rows}
    return doc, rows, ("s", "sigma", "kappa", "R", "F")


def cmd_froude(ns):
    if ns.b is not None:
        rep = verify.froude_limit_scan(ns.b)
        return rep.as_dict(), rep.records, ("b", "R0", "s_plus", "F", "gap")
    if ns.omega is None or ns.s is None:
        raise UsageError("froude needs --omega and --s, or --b")
    om = parse_inline(ns.omega)
    return {"s": ns.s, "F": stream.froude(om, ns.s), "omega": om.to_dict()}, None, ()


def _newton_config(ns) -> hfm.NewtonConfig:
    return hfm.NewtonConfig(tol=ns.tol, max_iter=ns.max_iter)


def _wave_doc(hf: hfm.HeightField) -> dict[str, Any]:
    res = hfm.residual(hf)
    ff = hfm.flow_force(hf)
    doc = hf.header()
    doc.update({"amplitude": hf.amplitude, "eta_crest": float(hf.eta[hf.crest_index]),
                "eta_trough": float(hf.eta[hf.trough_index]), "residuals": res.as_dict(),
                "flow_force": ff.mean, "flow_force_spread": ff.spread,
                "stagnation_margin": hfm.stagnation_margin(hf)})
    return doc


def cmd_wave(ns):
    om = parse_inline(ns.omega)
    r = resolve_r(om, ns.r) if ns.r is not None else None
    if (ns.amplitude is None) == (r is None):
        raise UsageError("wave needs exactly one of --amplitude or --r")
    hf = hfm.solve_stokes(om, ns.period, amplitude=ns.amplitude, r=r, n_q=ns.nq, n_p=ns.np,
                          config=_newton_config(ns))
    if ns.save:
        report.write_text(ns.save, hf.to_json())
    doc = _wave_doc(hf)
    if ns.plot_data:
        doc["series"] = {"q": hf.q, "eta": hf.eta}
    rows = [{"q": a, "eta": b} for a, b in zip(hf.q, hf.eta)]
    return doc, rows, ("q", "eta")


def _load_field(path: str) -> hfm.HeightField:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read field file: {exc}")
    return hfm.HeightField.from_json(text)


def cmd_flux(ns):
    hf = _load_field(ns.field)
    F = hfm.flow_force(hf).mean
    fx = flux.flux_function(hf, ns.s, F)
    ids = flux.identity_checks(hf, ns.s, F)
    doc = {"flux": fx.as_dict(), "identities": ids.as_dict()}
    if ns.plot_data:
        doc["series"] = {"q": hf.q, "top": fx.top}
    rows = [{"q": a, "top": b} for a, b in zip(hf.q, fx.top)]
    return doc, rows, ("q", "top")


def cmd_verify(ns):
    if ns.scan == "lemma":
        om = parse_inline(ns.omega)
        rep = verify.lemma_monotonicity_scan(om, resolve_r(om, ns.r), n=ns.n)
        cols = ("s", "sigma", "kappa_rel", "R", "d", "sigma_s", "kappa_s", "sens_ok")
    elif ns.scan == "froude":
        rep = verify.froude_limit_scan(ns.b, report_only=ns.report_only)
        cols = ("b", "R0", "s_plus", "F", "gap", "report_only")
    elif ns.scan == "nonexistence":
        om = parse_inline(ns.omega)
        workers = int(os.environ.get("VORWAVE_THREADS", "1") or 1)
        rep = verify.nonexistence_scan(om, ns.periods, a_start=ns.a_start, growth=ns.growth, n_q=ns.nq,
                                       n_p=ns.np, workers=max(workers, 1))
        cols = ("type", "period", "amplitude", "r", "eta_gap", "stagnation", "termination", "terminus_r")
    else:
        rep = verify.theorem_diagnostics(_load_field(ns.field), n=ns.n)
        cols = ("s", "phi_crest", "inf_top", "w_crest_minus_2gap", "F_minus_sigma")
    return rep.as_dict(), rep.records, cols


# -- parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", help="output file (default: standard output)")
    grid = _Parser(add_help=False)
    grid.add_argument("--nq", type=_count, default=hfm.DEFAULT_NQ, help="q nodes on the half period")
    grid.add_argument("--np", type=_count, default=hfm.DEFAULT_NP, help="p nodes")

    ap = _Parser(prog="vorwave", description="Laminar flows and Stokes waves with vorticity.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("stream", parents=[common], help="laminar profile for one bottom speed")
    p.add_argument("--omega", required=True, help="const:<v> | affine:<a>,<b> | poly:<c0>,... | file:<path>")
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--nodes", type=_count, default=stream.DEFAULT_NODES)
    p.add_argument("--plot-data", action="store_true")
    p.set_defaults(run=cmd_stream)

    p = sub.add_parser("critical", parents=[common], help="s0, s_c, d0, d_c, R_c, R0")
    p.add_argument("--omega", required=True)
    p.set_defaults(run=cmd_critical)

    p = sub.add_parser("conjugate", parents=[common], help="conjugate laminar states for r")
    p.add_argument("--omega", required=True)
    p.add_argument("--r", required=True, help="number, auto:R0 or auto:Rc")
    p.set_defaults(run=cmd_conjugate)

    p = sub.add_parser("sigma-kappa", parents=[common], help="sigma, kappa, R, F over a uniform s grid")
    p.add_argument("--omega", required=True)
    p.add_argument("--r", required=True)
    p.add_argument("--flow-force", type=float, default=0.0, help="F used in kappa (default 0)")
    p.add_argument("--s-min", type=float)
    p.add_argument("--s-max", type=float)
    p.add_argument("--n", type=_count, default=200)
    p.set_defaults(run=cmd_sigma_kappa)

    p = sub.add_parser("froude", parents=[common], help="F(s), or F(s_+(R0)) for omega = -b")
    p.add_argument("--omega")
    p.add_argument("--s", type=float)
    p.add_argument("--b", type=_floats, help="comma-separated list of b > 0")
    p.set_defaults(run=cmd_froude)

    p = sub.add_parser("wave", parents=[common, grid], help="solve for one Stokes wave")
    p.add_argument("--omega", required=True)
    p.add_argument("--period", type=_positive, required=True)
    p.add_argument("--amplitude", type=float)
    p.add_argument("--r")
    p.add_argument("--tol", type=_positive, default=hfm.NewtonConfig().tol)
    p.add_argument("--max-iter", type=int, default=hfm.NewtonConfig().max_iter)
    p.add_argument("--save", help="write the HeightField JSON here")
    p.add_argument("--plot-data", action="store_true")
    p.set_defaults(run=cmd_wave)

    p = sub.add_parser("flux", parents=[common], help="flux function and identity report for a saved wave")
    p.add_argument("--field", required=True)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--plot-data", action="store_true")
    p.set_defaults(run=cmd_flux)

    p = sub.add_parser("verify", help="verification scans")
    scans = p.add_subparsers(dest="scan", required=True, parser_class=_Parser)
    q = scans.add_parser("lemma", parents=[common])
    q.add_argument("--omega", required=True)
    q.add_argument("--r", required=True)
    q.add_argument("--n", type=_count, default=verify.SCAN_POINTS)
    q = scans.add_parser("froude", parents=[common])
    q.add_argument("--b", type=_floats, default=[10.0, 100.0, 1000.0])
    q.add_argument("--report-only", type=_floats, default=[])
    q = scans.add_parser("nonexistence", parents=[common])
    q.add_argument("--omega", required=True)
    q.add_argument("--periods", type=_floats, default=[2.0, 5.0, 10.0, 20.0])
    q.add_argument("--a-start", type=_positive, default=1e-3)
    q.add_argument("--growth", type=_positive, default=1.3)
    q.add_argument("--nq", type=_count, default=hfm.SCAN_NQ)
    q.add_argument("--np", type=_count, default=hfm.SCAN_NP)
    q = scans.add_parser("diagnostics", parents=[common])
    q.add_argument("--field", required=True)
    q.add_argument("--n", type=_count, default=40)
    p.set_defaults(run=cmd_verify)
    return ap


def _emit(ns, doc, rows, columns) -> None:
    if ns.format == "csv":
        if rows is None:
            raise UsageError(f"{ns.command} has no tabular output; use --format json")
        text = report.csv_text(rows, columns)
    else:
        text = report.dumps(doc) + "\n"
    if ns.out:
        report.write_text(ns.out, text)
    else:
        sys.stdout.write(text)


def run_command(argv: Sequence[str] | None = None) -> int:
    ns = None
    try:
        ns = build_parser().parse_args(argv)
        doc, rows, columns = ns.run(ns)
        _emit(ns, doc, rows, columns)
        verdict = doc.get("verdict") if isinstance(doc, dict) else None
        if verdict is not None and not verdict.get("pass", False):
            print("vorwave: scan verdict failed", file=sys.stderr)
            return EXIT_NUMERICAL
        return EXIT_OK
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except VorticityError as exc:
        print(f"vorwave: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"vorwave: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except ValueError as exc:
        print(f"vorwave: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"vorwave: numerical failure: {exc}", file=sys.stderr)
        last = getattr(exc, "last", None)
        if ns is not None and getattr(ns, "out", None) and isinstance(last, hfm.HeightField):
            partial = {"error": str(exc), "partial": last.header()}
            report.write_text(ns.out, report.dumps(partial) + "\n")
        return EXIT_NUMERICAL


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
