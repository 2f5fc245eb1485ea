"""The ten acceptance criteria, at their stated tolerances and time budgets.

Each test records a one-line PASS/FAIL summary that is printed at the end of
the pytest run (section "acceptance criteria").
"""

import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from vorwave import flux, heightfield as hfm, stream, verify
from vorwave.vorticity import affine, constant

SQRT2 = math.sqrt(2.0)


class Criterion:
    def __init__(self, number: int, title: str, budget: float):
        self.number, self.title, self.budget = number, title, budget
        self.checks: list[tuple[str, bool]] = []
        self.start = time.perf_counter()

    def check(self, label: str, ok) -> None:
        self.checks.append((label, bool(ok)))

    def finish(self) -> None:
        elapsed = time.perf_counter() - self.start
        self.check(f"runtime {elapsed:.1f}s < {self.budget:g}s", elapsed < self.budget)
        failed = [label for label, ok in self.checks if not ok]
        status = "PASS" if not failed else "FAIL"
        detail = "; ".join(label if ok else f"FAILED {label}" for label, ok in self.checks)
        line = f"[{status}] criterion {self.number:2d} {self.title}: {detail}"
        ACCEPTANCE_LINES[self.number] = line
        print(line)
        assert not failed, line


@pytest.fixture(scope="module")
def order_waves():
    """omega = -1, period 10, a = 0.01 on 65x33, 129x65, 257x129."""
    return verify.order_study(constant(-1.0), 10.0, 0.01)


@pytest.fixture(scope="module")
def branch_scan():
    return verify.nonexistence_scan(constant(-1.0), [2.0, 5.0, 10.0, 20.0])


def test_c01_closed_form_laminar():
    c = Criterion(1, "closed-form laminar suite", 1.0)
    worst = 0.0
    for b in (0.5, 1.0, 10.0, 100.0):
        om = constant(-b)
        for s in (0.01, 0.1, 0.5, 1.0, 3.0):
            worst = max(worst, abs(stream.depth(om, s) - (math.sqrt(s * s + 2 * b) - s) / b))
        d0, R0 = stream.limit_constants(om)
        worst = max(worst, abs(d0 - math.sqrt(2 / b)), abs(R0 - (b + math.sqrt(2 / b))))
    c.check(f"max |error| {worst:.1e} < 1e-9", worst < 1e-9)
    c.finish()


def test_c02_irrotational_criticality():
    c = Criterion(2, "irrotational criticality", 1.0)
    om = constant(0.0)
    cc = stream.critical_constants(om)
    c.check(f"|s_c - 1| = {abs(cc.sc - 1):.1e}", abs(cc.sc - 1.0) < 1e-10)
    c.check(f"|R_c - 1.5| = {abs(cc.Rc - 1.5):.1e}", abs(cc.Rc - 1.5) < 1e-10)
    worst = 0.0
    for r in (2.0, 3.0, 5.0):
        cs = stream.conjugate_states(om, r)
        for s in (cs.s_minus, cs.s_plus):
            worst = max(worst, abs(s * s / 2 + 1 / s - r), abs(stream.bernoulli_R(om, s) - r))
    c.check(f"max |R(s_±) - r| = {worst:.1e}", worst < 1e-10)
    c.finish()


def test_c03_criticality_froude():
    c = Criterion(3, "criticality-Froude invariant", 1.0)
    cases = {"0": constant(0.0), "-1": constant(-1.0), "-10": constant(-10.0), "+1": constant(1.0),
             "-(1+p)": affine(-1.0, -1.0)}
    for name, om in cases.items():
        err = abs(stream.froude(om, stream.critical_speed(om)) - 1.0)
        c.check(f"omega={name}: {err:.1e}", err < 1e-8)
    c.finish()


def test_c04_lemma_scans():
    c = Criterion(4, "monotone-turn scans", 10.0)
    om = constant(-1.0)
    R0 = stream.critical_constants(om).R0
    for name, r in (("R0", R0), ("R0+1", R0 + 1.0)):
        rep = verify.lemma_monotonicity_scan(om, r, n=200)
        v = rep.verdict
        c.check(f"r={name} sigma down-up", v["sigma_monotone"])
        c.check(f"r={name} kappa up-down", v["kappa_monotone"])
        c.check(f"r={name} turns within one cell", v["sigma_turn_within_cell"] and v["kappa_turn_within_cell"])
        c.check(f"r={name} sensitivities (max err/tol {v['max_sensitivity_ratio']:.2g})", v["sensitivities_ok"])
    c.finish()


def test_c05_froude_bound():
    c = Criterion(5, "Froude bound", 5.0)
    rep = verify.froude_limit_scan([10.0, 100.0, 1000.0])
    gaps = {r["b"]: r["gap"] for r in rep.records}
    c.check("F < 2", rep.verdict["all_below_2"])
    c.check("|F - sqrt2| decreasing", rep.verdict["gap_decreasing"])
    c.check(f"|F - sqrt2| = {gaps[1000.0]:.2e} < 0.05 at b=1000", gaps[1000.0] < 0.05)
    c.finish()


def test_c06_solver(order_waves):
    c = Criterion(6, "solver correctness", 120.0)
    om = constant(-1.0)
    lam = hfm.laminar_field(stream.stream_profile(om, 1.0), 10.0)
    c.check("laminar residual < 1e-12", hfm.residual(lam).norm < 1e-12)
    hf = order_waves.waves[-1]
    res = hfm.residual(hf)
    c.check(f"interior residual {res.interior_norm:.1e} < 1e-10", res.interior_norm < 1e-10)
    ff = hfm.flow_force(hf)
    rel = ff.spread / abs(ff.mean)
    c.check(f"flow-force spread {rel:.1e}|F| < 1e-8|F|", rel < 1e-8)
    ratios = order_waves.ratios(order_waves.interior) + order_waves.ratios(order_waves.top)
    c.check("residual ratios " + ", ".join(f"{x:.2f}" for x in ratios) + " within 4 ± 0.5",
            all(3.5 <= x <= 4.5 for x in ratios))
    c.finish()


def test_c07_flux_identities(order_waves):
    c = Criterion(7, "flux identities", 60.0)
    mids = []
    for hf in order_waves.waves[1:]:
        sp = stream.supercritical_speed(hf.omega, hf.r)
        rep = flux.identity_checks(hf, sp)
        mids.append(rep)
    fine = mids[-1]
    worst = max(fine.dq, fine.dp, fine.top)
    c.check(f"mismatches {fine.dq:.1e}, {fine.dp:.1e}, {fine.top:.1e} < 1e-6", worst < 1e-6)
    rat = [getattr(mids[0], k) / getattr(mids[1], k) for k in ("dq", "dp", "top")]
    c.check("halving ratios " + ", ".join(f"{x:.1f}" for x in rat) + " >= 3.5 (second order or better)",
            all(x >= 3.5 for x in rat))
    hf = order_waves.waves[-1]
    base = stream.s0(hf.omega)
    sp = stream.supercritical_speed(hf.omega, hf.r)
    F = hfm.flow_force(hf).mean
    crest = [flux.flux_function(hf, s, F).top[hf.crest_index] for s in np.linspace(base + 0.05, sp, 41)[:-1]]
    c.check(f"Phi(q_c,1) > 0 on 40 speeds (min {min(crest):.1e})", min(crest) > 0)
    c.finish()


def test_c08_sstar(order_waves):
    c = Criterion(8, "s_* realization", 120.0)
    hf = order_waves.waves[-1]
    F = hfm.flow_force(hf).mean
    res = flux.find_sstar(hf, F, flux.sstar_bracket(hf, F))
    tol = flux.identity_checks(hf, res.s_star, F).grid_tolerance
    c.check(f"s_* = {res.s_star:.6f}, |inf Phi| = {abs(res.inf_top):.1e} < 1e-8", abs(res.inf_top) < 1e-8)
    c.check(f"|kappa(s_*)| = {abs(res.kappa):.1e} < grid tolerance {tol:.1e}", abs(res.kappa) < tol)
    c.finish()


def test_c09_nonexistence(branch_scan):
    c = Criterion(9, "nonexistence evidence", 900.0)
    rep = branch_scan
    v = rep.verdict
    bound, R0 = rep.grid["bound"], rep.grid["R0"]
    c.check(f"all {v['waves']} waves r < {bound:.7f} (margin {v['bound_margin']:.3f})", v["all_r_below_bound"])
    branches = [r for r in rep.records if r["type"] == "branch"]
    for b in branches:
        if b["points"] == 0:
            c.check(f"L={b['period']:g}: {b['message']}", True)
            continue
        if b["period"] < rep.grid["long_period"]:
            continue
        c.check(f"L={b['period']:g} terminus r = {b['terminus_r']:.4f} < R0 = {R0:.7f}", b["terminus_r"] < R0)
        floor = b["termination"] == "unidirectionality floor"
        c.check(f"L={b['period']:g} terminus is the unidirectionality floor (got {b['termination']}, "
                f"u-c min {b['terminus_stagnation']:.3f})", floor)
    c.check(f"statement: {v['statement']}", v["statement"] == "no counterexample found")
    c.finish()


def test_c10_pointwise_bound(branch_scan, order_waves):
    c = Criterion(10, "eta < r on every converged wave", 60.0)
    gaps = [r["eta_gap"] for r in branch_scan.records if r["type"] == "wave"]
    gaps += [float(np.max(hf.eta) - hf.r) for hf in order_waves.waves]
    violation = max(0.0, max(gaps))
    c.check(f"{len(gaps)} waves, max(eta - r) = {max(gaps):.3f}, violation {violation:g} <= 1e-10",
            violation <= 1e-10)
    c.finish()
