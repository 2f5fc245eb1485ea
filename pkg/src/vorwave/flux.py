"""Flow-force flux function of a wave relative to a laminar reference flow.

For a reference speed s, w = h - H(.; s) and

    Phi(q, p) = int_0^p [ w_p^2 / (h_p H_p^2) - w_q^2 / h_p ] dp'.

Expanding with 1/H_p^2 = A = s^2 - 2 Omega the integrand becomes
h_p A - 2 sqrt(A) + (1 - h_q^2)/h_p.  Its value on the stored background
H(.; s_b) is (sqrt(A) - sqrt(B))^2 / sqrt(B) with B = s_b^2 - 2 Omega, a
pure function of p that is integrated by the graded quadrature of
:mod:`vorwave.stream`; only the perturbation part is summed on the grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy import optimize

from . import stream
from .errors import DomainError
from .heightfield import HeightField, cumulative_p, flow_force, operators, reference_profile
from .vorticity import VorticityFn

FLUX_ORDER = 4
GRAD_SKIP = 1e-10


@dataclass(frozen=True)
class FluxField:
    s: float
    r: float
    F: float
    phi: np.ndarray = field(repr=False)
    integrand: np.ndarray = field(repr=False)
    top: np.ndarray = field(repr=False)
    inf_top: float
    argmin_q: float
    kappa: float

    def as_dict(self) -> dict[str, Any]:
        return {"s": self.s, "r": self.r, "F": self.F, "inf_top": self.inf_top,
                "argmin_q": self.argmin_q, "kappa": self.kappa}


def _background_flux(omega: VorticityFn, s: float, s_b: float, p: np.ndarray) -> np.ndarray:
    base = stream.s0(omega) ** 2
    ea, eb = s * s - base, s_b * s_b - base
    num = (s * s - s_b * s_b) ** 2

    def fn(G, _p):
        ra, rb = np.sqrt(ea + 2.0 * G), np.sqrt(eb + 2.0 * G)
        return num / ((ra + rb) ** 2 * rb)

    if s == s_b:
        return np.zeros_like(p)
    return stream.gap_cumulative(omega, p, fn)


def _pieces(hf: HeightField, s: float, order: int):
    """Derivatives of h and of w = h - H(.; s) needed by the flux."""
    ref = reference_profile(hf, s)
    d = hf.derivatives(order)
    eps = s * s - stream.s0(hf.omega) ** 2
    A = eps + 2.0 * hf.omega.gap(hf.p)[None, :]
    return d, ref, A


def _min_refined(q: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Grid minimum refined by the parabola through the neighbouring nodes."""
    i = int(np.argmin(y))
    if i == 0 or i == len(y) - 1:
        # symmetry lines: the even extension puts the vertex on the node
        return float(y[i]), float(q[i])
    y0, y1, y2 = y[i - 1], y[i], y[i + 1]
    denom = y0 - 2.0 * y1 + y2
    if denom <= 0.0:
        return float(y1), float(q[i])
    t = 0.5 * (y0 - y2) / denom
    dq = q[i + 1] - q[i]
    return float(y1 - 0.25 * (y0 - y2) * t), float(q[i] + t * dq)


def flux_function(hf: HeightField, s: float, F: float | None = None, order: int = FLUX_ORDER) -> FluxField:
    """Phi^(s) on the wave grid, its top trace and the trace infimum.

    ``F`` is the wave's flow force (defaults to the column mean from
    :func:`flow_force`); it only enters the attached kappa(s; r).
    """
    if s <= stream.s0(hf.omega):
        raise DomainError(f"s = {s:.17g} <= s0")
    d, ref, A = _pieces(hf, s, order)
    hp, hq = d["h_p"], d["h_q"]
    Hb = hf.base.H_p[None, :]
    dv = hp - Hb
    remainder = dv * A - dv / (hp * Hb) - hq**2 / hp
    phi = _background_flux(hf.omega, s, hf.s_base, hf.p)[None, :] + cumulative_p(remainder, hf.p, order)
    phi[:, 0] = 0.0
    integrand = hp * A - 2.0 * np.sqrt(A) + (1.0 - hq**2) / hp
    if F is None:
        F = flow_force(hf, order).mean
    top = phi[:, -1].copy()
    inf_top, arg = _min_refined(hf.q, top)
    kap = stream.kappa(hf.omega, s, hf.r, F)
    return FluxField(s=float(s), r=hf.r, F=float(F), phi=phi, integrand=integrand, top=top,
                     inf_top=inf_top, argmin_q=arg, kappa=kap)


# -- identities ------------------------------------------------------------


@dataclass(frozen=True)
class IdentityReport:
    s: float
    dq: float
    dp: float
    top: float
    expected_order: int
    max_principle_violation: float
    max_principle_ok: bool
    grid_tolerance: float

    def as_dict(self) -> dict[str, Any]:
        return {"s": self.s, "mismatches": {"dq": self.dq, "dp": self.dp, "top": self.top},
                "expected_order": self.expected_order,
                "max_principle_violation": self.max_principle_violation,
                "max_principle_ok": self.max_principle_ok, "grid_tolerance": self.grid_tolerance}


def identity_checks(hf: HeightField, s: float, F: float | None = None, order: int = FLUX_ORDER) -> IdentityReport:
    """Max-norm mismatches of the derivative and top-boundary formulas for Phi.

    (a) D_q Phi against -w_q ((1 + w_q^2)/h_p^2 - 1/H_p^2), which uses the
        interior equation and so carries the solver's second-order error;
    (b) D_p Phi against its integrand (quadrature self-consistency);
    (c) Phi(q, 1) against 2(F - sigma) - 2(r - R(s)) w(q, 1) + w(q, 1)^2.

    The maximum-principle corollary (interior values within the range of
    the values on p = 0 and p = 1) is checked with the same tolerance.
    """
    ff = flow_force(hf, order)
    F = ff.mean if F is None else F
    fx = flux_function(hf, s, F, order)
    d, ref, A = _pieces(hf, s, order)
    hp, hq = d["h_p"], d["h_q"]
    ops = operators(hf.n_q, hf.n_p, hf.step_q, hf.step_p, order)
    # the background flux is exact in p; differentiate the grid part only
    bg = _background_flux(hf.omega, s, hf.s_base, hf.p)[None, :]
    grid_part = (fx.phi - bg).ravel()
    phi_q = (ops.dq @ grid_part).reshape(hf.v.shape)
    phi_p_grid = (ops.dp @ grid_part).reshape(hf.v.shape)
    Hb = hf.base.H_p[None, :]
    bg_integrand = fx.integrand - (hp - Hb) * A + (hp - Hb) / (hp * Hb) + hq**2 / hp
    expect_q = -hq * ((1.0 + hq**2) / hp**2 - A)
    mis_q = float(np.max(np.abs(phi_q - expect_q)))
    mis_p = float(np.max(np.abs(phi_p_grid - (fx.integrand - bg_integrand))))
    w1 = hf.eta - ref.H[-1]
    R_s = 0.5 * s * s - hf.omega.omega_at_1 + ref.H[-1]
    sig = stream.sigma(hf.omega, s, hf.r)
    expect_top = 2.0 * (F - sig) - 2.0 * (hf.r - R_s) * w1 + w1**2
    mis_top = float(np.max(np.abs(fx.top - expect_top)))
    tol = max(mis_q, mis_p, mis_top, ff.spread)
    lo = min(0.0, float(np.min(fx.top)))
    hi = max(0.0, float(np.max(fx.top)))
    inner = fx.phi[:, 1:-1]
    viol = max(0.0, lo - float(np.min(inner)), float(np.max(inner)) - hi)
    return IdentityReport(s=float(s), dq=mis_q, dp=mis_p, top=mis_top, expected_order=2,
                          max_principle_violation=viol, max_principle_ok=viol <= tol,
                          grid_tolerance=tol)


# -- infimum of the top trace --------------------------------------------------


@dataclass(frozen=True)
class InfimumReport:
    s: float
    inf_top: float
    argmin_q: float
    kappa: float
    applicable: bool
    mismatch: float | None

    def as_dict(self) -> dict[str, Any]:
        return {"s": self.s, "inf_top": self.inf_top, "argmin_q": self.argmin_q,
                "kappa": self.kappa, "applicable": self.applicable, "mismatch": self.mismatch}


def infimum_kappa_test(hf: HeightField, s: float, F: float | None = None) -> InfimumReport:
    """Compare inf_q Phi(q, 1) with kappa(s; r) when the infimum is <= 0."""
    fx = flux_function(hf, s, F)
    ok = fx.inf_top <= 0.0
    return InfimumReport(s=fx.s, inf_top=fx.inf_top, argmin_q=fx.argmin_q, kappa=fx.kappa,
                         applicable=ok, mismatch=abs(fx.inf_top - fx.kappa) if ok else None)


@dataclass(frozen=True)
class SStar:
    s_star: float
    inf_top: float
    kappa: float
    bracket: tuple[float, float]
    bracket_inf: tuple[float, float]
    evaluations: int

    def as_dict(self) -> dict[str, Any]:
        return {"s_star": self.s_star, "inf_top": self.inf_top, "kappa": self.kappa,
                "bracket": list(self.bracket), "bracket_inf": list(self.bracket_inf),
                "evaluations": self.evaluations}


class NoSignChange(DomainError):
    """inf Phi(., 1) has the same sign at both ends of the bracket."""

    def __init__(self, message: str, infima: tuple[float, float]):
        super().__init__(message)
        self.infima = infima


def _reject_laminar(hf: HeightField) -> None:
    # Phi(., 1) is then q-independent and >= 0, touching zero only at s = s_base
    if not np.any(hf.v):
        raise NoSignChange("laminar field: inf Phi(., 1) >= 0 for every s, no sign change", (0.0, 0.0))


def find_sstar(hf: HeightField, F: float | None, bracket: tuple[float, float], tol: float = 1e-8) -> SStar:
    """Reference speed s_star in ``bracket`` with inf_q Phi^(s_star)(q, 1) = 0."""
    _reject_laminar(hf)
    if F is None:
        F = flow_force(hf).mean
    count = 0

    def g(s):
        nonlocal count
        count += 1
        return flux_function(hf, s, F).inf_top

    lo, hi = map(float, bracket)
    g_lo, g_hi = g(lo), g(hi)
    if not (math.isfinite(g_lo) and math.isfinite(g_hi)) or g_lo * g_hi > 0.0:
        raise NoSignChange(
            f"inf Phi(., 1) = {g_lo:.6g} at s = {lo:.6g} and {g_hi:.6g} at s = {hi:.6g}: no sign change",
            (g_lo, g_hi))
    s_star = optimize.brentq(g, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    fx = flux_function(hf, s_star, F)
    if abs(fx.inf_top) >= tol:
        # brentq stops on the bracket width; polish with bisection on the sign
        a, b = (lo, hi) if g_lo < 0 else (hi, lo)
        for _ in range(200):
            m = 0.5 * (a + b)
            val = g(m)
            if abs(val) < tol or m in (a, b):
                s_star = m
                break
            a, b = (m, b) if val < 0 else (a, m)
        fx = flux_function(hf, s_star, F)
    return SStar(s_star=float(s_star), inf_top=fx.inf_top, kappa=fx.kappa, bracket=(lo, hi),
                 bracket_inf=(g_lo, g_hi), evaluations=count)


def scan_top_infimum(hf: HeightField, s_values, F: float | None = None) -> np.ndarray:
    if F is None:
        F = flow_force(hf).mean
    return np.array([flux_function(hf, s, F).inf_top for s in s_values])


def sstar_bracket(hf: HeightField, F: float | None = None, samples: int = 80,
                  lo: float | None = None, hi: float | None = None) -> tuple[float, float]:
    """A sign change of inf Phi^(s)(., 1) on (s0, s_+(r)), scanning down from s_+.

    Near-laminar waves have negative infima only in a narrow window around
    their background speed, so s_-(r) and the field's base speed are added
    to the uniform scan.
    """
    _reject_laminar(hf)
    s0 = stream.s0(hf.omega)
    if hi is None:
        hi = stream.supercritical_speed(hf.omega, hf.r)
    if lo is None:
        lo = s0 + 1e-3 * max(1.0, hi - s0)
    extra = [hf.s_base]
    s_minus = stream.subcritical_speed(hf.omega, hf.r)
    if s_minus is not None:
        extra.append(s_minus)
    grid = np.unique(np.concatenate([np.linspace(lo, hi, samples),
                                     [x for x in extra if lo < x < hi]]))[::-1]
    vals = scan_top_infimum(hf, grid, F)
    for k in range(1, len(grid)):
        if vals[k - 1] * vals[k] < 0.0:
            return float(grid[k]), float(grid[k - 1])
    raise NoSignChange(f"inf Phi(., 1) keeps one sign on [{lo:.6g}, {hi:.6g}]", (vals[-1], vals[0]))


# -- transversality sign along level curves ----------------------------------------


@dataclass(frozen=True)
class FieldSignReport:
    s: float
    level: float
    crossings: int
    skipped: int
    max_dot: float
    max_formula_gap: float
    ok: bool

    def as_dict(self) -> dict[str, Any]:
        return dict(self.__dict__)


def field_sign_check(hf: HeightField, s: float, level: float = 0.0, order: int = FLUX_ORDER,
                     tol: float = 0.0) -> FieldSignReport:
    """Sign of (Phi_p, -Phi_q) . (w_q, w_p) on the rising flank where w_q > 0.

    The stored half period runs crest -> trough, so the rising flank is its
    mirror image q -> -q, which flips the sign of every q-derivative.
    Crossings of the level curve w = ``level`` are located by linear
    interpolation on cell edges; cells with |grad w| < 1e-10 are skipped.
    """
    fx = flux_function(hf, s, order=order)
    d, ref, A = _pieces(hf, s, order)
    ops = operators(hf.n_q, hf.n_p, hf.step_q, hf.step_p, order)
    shape = hf.v.shape
    phi = fx.phi.ravel()
    wq = -d["h_q"]
    wp = d["h_p"] - ref.H_p[None, :]
    phq = -(ops.dq @ phi).reshape(shape)
    php = fx.integrand  # exact p-derivative of Phi
    dot = php * wq - phq * wp
    hp, Hp = d["h_p"], ref.H_p[None, :]
    formula = -(wp**2 / (hp**2 * Hp) + wq**2 * Hp / hp**2) * wq
    w = hf.h - ref.H[None, :] - level
    vals, gaps, skipped = [], [], 0

    def edge(i0, j0, i1, j1):
        nonlocal skipped
        a, b = w[i0, j0], w[i1, j1]
        if a == b or a * b > 0.0:
            return
        t = a / (a - b)
        lerp = lambda f: (1 - t) * f[i0, j0] + t * f[i1, j1]
        gq, gp = lerp(wq), lerp(wp)
        if math.hypot(gq, gp) < GRAD_SKIP or gq <= 0.0:
            skipped += 1
            return
        vals.append(lerp(dot))
        gaps.append(abs(lerp(dot) - lerp(formula)))

    n_q, n_p = shape
    for i in range(n_q):
        for j in range(n_p - 1):
            edge(i, j, i, j + 1)
    for i in range(n_q - 1):
        for j in range(1, n_p - 1):
            edge(i, j, i + 1, j)
    max_dot = max(vals) if vals else -math.inf
    return FieldSignReport(s=float(s), level=float(level), crossings=len(vals), skipped=skipped,
                           max_dot=float(max_dot), max_formula_gap=float(max(gaps)) if gaps else 0.0,
                           ok=bool(vals) and bool(max_dot <= tol))
