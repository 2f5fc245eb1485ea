"""Numerical experiments on the comparison functions, the Froude bound and wave branches.

Every scan returns a :class:`ScanReport` whose verdict is a pure function of
its per-point records (see :func:`recompute_verdict`).  Nothing here is
random, so a report is reproducible from its provenance block.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from . import flux, heightfield as hfm, stream
from .errors import DomainError, NumericalError
from .vorticity import VorticityFn, classify, constant

DEAD_BAND = 1e-12
SCAN_POINTS = 200
FD_REL = 1e-3
SENS_RTOL = 1e-6
LONG_PERIOD = 10.0


@dataclass
class ScanReport:
    kind: str
    grid: dict[str, Any]
    records: list[dict[str, Any]]
    verdict: dict[str, Any]
    provenance: dict[str, Any] = field(default_factory=dict)

    def as_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "grid": self.grid, "records": self.records,
                "verdict": self.verdict, "provenance": self.provenance}

    @property
    def passed(self) -> bool:
        return bool(self.verdict.get("pass", False))


# -- lemma scan ---------------------------------------------------------------


def log_grid(omega: VorticityFn, s_plus: float, n: int = SCAN_POINTS, lo: float = 1e-3, hi: float = 10.0) -> np.ndarray:
    """n speeds s0 + t with t log-spaced on [lo, hi] * (s_+ - s0)."""
    base = stream.s0(omega)
    span = s_plus - base
    return base + span * np.logspace(math.log10(lo), math.log10(hi), n)


def _central(f: Callable[[float], float], s: float, h: float) -> float:
    # five-point stencil, truncation O(h^4)
    return (8.0 * (f(s + h) - f(s - h)) - (f(s + 2 * h) - f(s - 2 * h))) / (12.0 * h)


def _lemma_verdict(records: list[dict], grid: dict) -> dict[str, Any]:
    s = np.array([r["s"] for r in records])
    sig = np.array([r["sigma"] for r in records])
    kap = np.array([r["kappa_rel"] for r in records])
    sp = grid["s_plus"]
    left = s[1:] <= sp
    right = s[:-1] >= sp
    dsig = np.diff(sig)
    dkap = np.diff(kap)
    sig_ok = bool(np.all(dsig[left] < DEAD_BAND) and np.all(dsig[right] > -DEAD_BAND))
    kap_ok = bool(np.all(dkap[left] > -DEAD_BAND) and np.all(dkap[right] < DEAD_BAND))
    i_s, i_k = int(np.argmin(sig)), int(np.argmax(kap))

    def near(i):
        lo = s[max(i - 1, 0)]
        hi = s[min(i + 1, len(s) - 1)]
        return bool(lo <= sp <= hi)

    sens_ok = all(r["sens_ok"] for r in records)
    out = {
        "sigma_monotone": sig_ok,
        "kappa_monotone": kap_ok,
        "sigma_turn_s": float(s[i_s]),
        "kappa_turn_s": float(s[i_k]),
        "sigma_turn_within_cell": near(i_s),
        "kappa_turn_within_cell": near(i_k),
        "sensitivities_ok": sens_ok,
        "max_sensitivity_ratio": max(r["sens_err"] for r in records),
    }
    out["pass"] = all(out[k] for k in ("sigma_monotone", "kappa_monotone", "sigma_turn_within_cell",
                                        "kappa_turn_within_cell", "sensitivities_ok"))
    return out


def lemma_monotonicity_scan(omega: VorticityFn, r: float, n: int = SCAN_POINTS,
                            s_grid: Sequence[float] | None = None) -> ScanReport:
    """sigma(.; r) and kappa(.; r) on a log grid around s_+(r), r >= R0.

    kappa is recorded as kappa_rel = -2 sigma - (r - R)^2, i.e. kappa with
    F = 0: its differences do not depend on the wave's flow force.  At each
    node the analytic s-derivatives are compared with five-point central
    differences of step 1e-3 (s - s0); the tolerance is 1e-6 relative, plus
    the round-off floor 1e-14 max(|f|, 1) / step of the quotient itself.
    """
    cc = stream.critical_constants(omega)
    if not math.isfinite(cc.R0):
        raise DomainError("R0 is infinite for this vorticity: no r satisfies r >= R0")
    if r < cc.R0 - stream.BERNOULLI_TOL:
        raise DomainError(f"r = {r:.17g} < R0 = {cc.R0:.17g}: outside the hypothesis r >= R0")
    sp = stream.supercritical_speed_R0(omega) if r == cc.R0 else stream.supercritical_speed(omega, r)
    s_vals = log_grid(omega, sp, n) if s_grid is None else np.asarray(s_grid, dtype=float)
    base = cc.s0
    fns = {
        "d": lambda x: stream.depth(omega, x),
        "R": lambda x: stream.bernoulli_R(omega, x),
        "sigma": lambda x: stream.sigma(omega, x, r),
        "kappa": lambda x: stream.kappa(omega, x, r, 0.0),
    }
    records = []
    for s in s_vals:
        s = float(s)
        sens = stream.sensitivities(omega, s, r)
        analytic = {"d": sens.d_s, "R": sens.R_s, "sigma": sens.sigma_s, "kappa": sens.kappa_s}
        h = FD_REL * (s - base)
        worst, ok = 0.0, True  # worst: error / tolerance
        vals = {}
        for key, f in fns.items():
            vals[key] = f(s)
            fd = _central(f, s, h)
            err = abs(fd - analytic[key])
            tol = SENS_RTOL * abs(analytic[key]) + 1e-14 * max(abs(vals[key]), 1.0) / h
            ok = ok and err <= tol
            worst = max(worst, err / tol)
        records.append({"s": s, "sigma": vals["sigma"], "kappa_rel": vals["kappa"], "R": vals["R"],
                        "d": vals["d"], "d_s": sens.d_s, "R_s": sens.R_s, "sigma_s": sens.sigma_s,
                        "kappa_s": sens.kappa_s, "sens_ok": bool(ok), "sens_err": worst})
    grid = {"s_plus": sp, "r": float(r), "R0": cc.R0, "n": len(s_vals)}
    report = ScanReport("lemma", grid, records, {}, {
        "omega": omega.to_dict(), "dead_band": DEAD_BAND, "fd_step_rel": FD_REL,
        "sens_rtol": SENS_RTOL, "grid": "s0 + (s_+ - s0) logspace(-3, 1)" if s_grid is None else "explicit"})
    report.verdict = _lemma_verdict(records, grid)
    return report


# -- Froude bound ----------------------------------------------------------------


def _froude_verdict(records: list[dict], grid: dict) -> dict[str, Any]:
    rows = sorted((r for r in records if not r["report_only"]), key=lambda r: r["b"])
    gaps = [r["gap"] for r in rows]
    out = {
        "all_below_2": all(r["F"] < 2.0 for r in rows),
        "gap_decreasing": all(b < a for a, b in zip(gaps, gaps[1:])),
        "thresholds": {},
    }
    for b_key, thr in grid.get("thresholds", {}).items():
        match = [r for r in rows if r["b"] == float(b_key)]
        out["thresholds"][b_key] = bool(match) and match[0]["gap"] < thr
    out["pass"] = out["all_below_2"] and out["gap_decreasing"] and all(out["thresholds"].values())
    return out


def froude_limit_scan(b_list: Sequence[float], report_only: Sequence[float] = (),
                      thresholds: dict[float, float] | None = None) -> ScanReport:
    """F(s_+(R0)) for constant vorticity -b; b in ``report_only`` is recorded without a verdict."""
    if any(b <= 0 for b in list(b_list) + list(report_only)):
        raise DomainError("b must be positive")
    thresholds = {1000.0: 0.05} if thresholds is None else thresholds
    records = []
    for b in sorted(set(map(float, b_list)) | set(map(float, report_only))):
        om = constant(-b)
        cc = stream.critical_constants(om)
        sp = stream.supercritical_speed_R0(om)
        F = stream.froude(om, sp)
        records.append({"b": b, "R0": cc.R0, "s_plus": sp, "F": F, "gap": abs(F - math.sqrt(2.0)),
                        "report_only": b in set(map(float, report_only)) and b not in set(map(float, b_list))})
    grid = {"b": [r["b"] for r in records], "thresholds": {format(k, "g"): v for k, v in thresholds.items()}}
    report = ScanReport("froude", grid, records, {}, {"quantity": "F(s_+(R0(-b)))"})
    report.verdict = _froude_verdict(records, grid)
    return report


# -- nonexistence scan ---------------------------------------------------------------


def _nonexistence_verdict(records: list[dict], grid: dict) -> dict[str, Any]:
    bound = grid["bound"]
    R0 = grid["R0"]
    waves = [r for r in records if r["type"] == "wave"]
    branches = [r for r in records if r["type"] == "branch"]
    below = all(r["r"] < bound for r in waves)
    eta_ok = all(r["eta_gap"] < 0.0 for r in waves)
    long_ok = all(b["terminus_r"] < R0 for b in branches
                  if b["period"] >= grid["long_period"] and b["points"] > 0)
    ok = below and eta_ok and long_ok
    margin = min((bound - r["r"] for r in waves), default=math.nan)
    return {
        "all_r_below_bound": below,
        "long_terminus_below_R0": long_ok,
        "eta_below_r": eta_ok,
        "max_eta_minus_r": max((r["eta_gap"] for r in waves), default=math.nan),
        "bound_margin": margin,
        "waves": len(waves),
        "statement": "no counterexample found" if ok else "counterexample candidate found",
        "pass": ok,
    }


def _branch_job(omega: VorticityFn, L: float, kw: dict) -> tuple[dict, list[dict], hfm.HeightField | None]:
    row = {"type": "branch", "period": L, "points": 0, "terminus_r": math.nan, "r_max": math.nan,
           "s_bif": math.nan, "termination": "", "message": "", "terminus_stagnation": math.nan,
           "terminus_amplitude": math.nan}
    try:
        br = hfm.continue_branch(omega, L, **kw)
    except (DomainError, NumericalError) as exc:
        row.update(termination="no branch", message=str(exc))
        return row, [], None
    row.update(points=len(br.points), s_bif=br.s_bif, termination=br.termination, message=br.message,
               r_max=br.r_max)
    if br.points:
        last = br.points[-1]
        row.update(terminus_r=last.r, terminus_stagnation=last.stagnation, terminus_amplitude=last.amplitude)
    waves = [{"type": "wave", "period": L, **pt.as_dict()} for pt in br.points]
    return row, waves, br.last


def nonexistence_scan(omega: VorticityFn, periods: Sequence[float], a_start: float = 1e-3, growth: float = 1.3,
                      refinements: int = 6, n_q: int = hfm.SCAN_NQ, n_p: int = hfm.SCAN_NP,
                      long_period: float = LONG_PERIOD, keep: list | None = None,
                      workers: int = 1) -> ScanReport:
    """Follow Stokes branches and compare every Bernoulli constant with the nonexistence bound.

    Class II uses r < R0 - Omega(1); class III the stronger r < R0.
    Branches of period >= ``long_period`` are also compared with R0 at
    their terminus.  A branch that cannot start (no bifurcation from a
    unidirectional laminar flow) is recorded, not fatal.  ``keep``, if
    given, receives the last field of each branch.  With ``workers`` > 1
    the periods run in separate processes; records keep the input order.
    """
    vc = classify(omega)
    cc = stream.critical_constants(omega)
    if vc.tag not in ("II", "III") or not math.isfinite(cc.R0):
        raise DomainError(f"nonexistence scan needs class II or III with finite R0 (got {vc.tag})")
    bound = cc.R0 - omega.omega_at_1 if vc.tag == "II" else cc.R0
    kw = dict(a_start=a_start, growth=growth, refinements=refinements, n_q=n_q, n_p=n_p)
    periods = [float(x) for x in periods]
    if workers > 1 and len(periods) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(periods))) as pool:
            results = list(pool.map(_branch_job, [omega] * len(periods), periods, [kw] * len(periods)))
    else:
        results = [_branch_job(omega, L, kw) for L in periods]
    records = []
    for row, waves, last in results:
        records.append(row)
        records.extend(waves)
        if keep is not None and last is not None:
            keep.append(last)
    grid = {"periods": periods, "bound": bound, "R0": cc.R0, "class": vc.tag, "long_period": long_period}
    report = ScanReport("nonexistence", grid, records, {}, {
        "omega": omega.to_dict(), "n_q": n_q, "n_p": n_p, "a_start": a_start, "growth": growth,
        "refinements": refinements, "stagnation_floor": hfm.STAGNATION_FLOOR,
        "resolution_limit": hfm.RESOLUTION_LIMIT, "newton_tol": hfm.NewtonConfig().tol})
    report.verdict = _nonexistence_verdict(records, grid)
    return report


# -- diagnostics on one wave -----------------------------------------------------------


def _diagnostics_verdict(records: list[dict], grid: dict) -> dict[str, Any]:
    rows = [r for r in records if r["type"] == "s"]
    out = {
        "eta_crest_below_r": grid["eta_crest"] < grid["r"],
        "crest_flux_positive": all(r["phi_crest"] > 0.0 for r in rows),
        "w_crest_positive_at_s_plus": grid["w_crest_s_plus"] > 0.0,
    }
    out["pass"] = all(out.values())
    return out


def theorem_diagnostics(hf: hfm.HeightField, n: int = 40, s_lo_offset: float = 0.05) -> ScanReport:
    """Checks along the proof's chain of inequalities on a converged wave.

    Asserted: eta(q_c) < r; Phi^(s)(q_c, 1) > 0 on an s-grid in
    (s0 + offset, s_+(r)); w^(s_+)(q_c, 1) > 0.  Recorded only: the
    implication w(q_c, 1) > 2(r - R(s)) when also F < sigma(s; r), and
    |F - sigma(s_+; r)| (small for long, solitary-like waves).
    """
    om = hf.omega
    base = stream.s0(om)
    F = hfm.flow_force(hf).mean
    sp = stream.supercritical_speed(om, hf.r)
    s_vals = np.linspace(base + s_lo_offset, sp, n + 1)[:-1]
    ic = hf.crest_index
    records = []
    for s in s_vals:
        s = float(s)
        fx = flux.flux_function(hf, s, F)
        ref = hfm.reference_profile(hf, s)
        w_c = float(hf.eta[ic] - ref.H[-1])
        R_s = stream.bernoulli_R(om, s)
        sig = stream.sigma(om, s, hf.r)
        hyp = fx.top[ic] > 0.0 and F < sig
        records.append({"type": "s", "s": s, "phi_crest": float(fx.top[ic]), "inf_top": fx.inf_top,
                        "w_crest_minus_2gap": w_c - 2.0 * (hf.r - R_s), "F_minus_sigma": F - sig,
                        "implication_hypothesis": bool(hyp),
                        "implication_conclusion": bool(w_c > 2.0 * (hf.r - R_s))})
    ref_p = hfm.reference_profile(hf, sp)
    grid = {"r": hf.r, "eta_crest": float(hf.eta[ic]), "period": hf.period, "s_plus": sp,
            "w_crest_s_plus": float(hf.eta[ic] - ref_p.H[-1]),
            "solitary_residual": abs(F - stream.sigma(om, sp, hf.r)), "F": F, "n": n}
    report = ScanReport("diagnostics", grid, records, {}, {
        "omega": om.to_dict(), "n_q": hf.n_q, "n_p": hf.n_p, "s_lo_offset": s_lo_offset})
    report.verdict = _diagnostics_verdict(records, grid)
    return report


# -- grid refinement -----------------------------------------------------------------


@dataclass
class OrderStudy:
    """Errors of a wave family under grid halving (coarse grid first)."""

    grids: list[tuple[int, int]]
    waves: list[hfm.HeightField] = field(repr=False)
    interior: list[float]
    top: list[float]
    spread: list[float]
    r: list[float]

    @staticmethod
    def ratios(values: Sequence[float]) -> list[float]:
        return [a / b for a, b in zip(values, values[1:])]

    def as_dict(self) -> dict[str, Any]:
        return {"grids": [list(g) for g in self.grids], "interior": self.interior, "top": self.top,
                "spread": self.spread, "r": self.r, "interior_ratios": self.ratios(self.interior),
                "top_ratios": self.ratios(self.top), "spread_ratios": self.ratios(self.spread)}


def nested_grids(n_q: int, n_p: int, levels: int) -> list[tuple[int, int]]:
    """(n_q, n_p), then each step halves the spacing: n -> 2n - 1."""
    out = [(n_q, n_p)]
    for _ in range(levels - 1):
        a, b = out[-1]
        out.append((2 * a - 1, 2 * b - 1))
    return out


def order_study(omega: VorticityFn, period: float, amplitude: float,
                grids: Sequence[tuple[int, int]] = ((65, 33), (129, 65), (257, 129))) -> OrderStudy:
    """Consistency residuals of second-order solutions under refinement.

    Each wave is checked against the fourth-order discretization of the same
    equations, at the nodes of the coarsest grid so that every level is
    measured at the same points.  Interior rows next to the bed and the
    surface are left out: their stencils are one-sided.
    """
    grids = [tuple(g) for g in grids]
    for (a, b), (c, d) in zip(grids, grids[1:]):
        if (c - 1) != 2 * (a - 1) or (d - 1) != 2 * (b - 1):
            raise DomainError("grids must be nested by halving: n -> 2n - 1")
    waves, interior, top, spread, rs = [], [], [], [], []
    for k, (nq, np_) in enumerate(grids):
        hf = hfm.solve_stokes(omega, period, amplitude=amplitude, n_q=nq, n_p=np_)
        res = hfm.residual(hf, order=4)
        step = 2 ** k
        # interior array columns are p-indices 1..n_p-2; keep coarse indices 2..n_pc-3
        cols = np.arange(2 * step, hf.n_p - 2 * step, step) - 1
        interior.append(float(np.max(np.abs(res.interior[::step][:, cols]))))
        top.append(float(np.max(np.abs(res.top[::step]))))
        spread.append(hfm.flow_force(hf).spread)
        rs.append(hf.r)
        waves.append(hf)
    return OrderStudy(grids=list(grids), waves=waves, interior=interior, top=top, spread=spread, r=rs)


_VERDICTS = {
    "lemma": _lemma_verdict,
    "froude": _froude_verdict,
    "nonexistence": _nonexistence_verdict,
    "diagnostics": _diagnostics_verdict,
}


def recompute_verdict(report: ScanReport) -> dict[str, Any]:
    return _VERDICTS[report.kind](report.records, report.grid)
