"""Laminar shear currents and the constants built from them.

A stream solution is parameterised by its relative bottom speed ``s``.  With
``A(p; s) = s**2 - 2 Omega(p)`` the laminar height function and its
derivative are

    H_p(p; s) = A ** -0.5,        H(p; s) = int_0^p A ** -0.5,

so the depth is ``d(s) = H(1; s)`` and the Bernoulli constant is
``R(s) = s**2 / 2 - Omega(1) + d(s)``.  Everything in this module reduces to
three quadratures: ``int A**-0.5``, ``int A**-1.5`` and ``int Omega A**-0.5``.

Internally ``A`` is evaluated as ``(s**2 - s0**2) + 2 (max Omega - Omega)``,
which is non-negative by construction and exact at the limiting speed ``s0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DomainError, NumericalError
from .quadrature import (
    BracketError,
    QuadratureError,
    brent_root,
    cumulative_graded,
    grow_upper,
    shrink_lower,
)
from .vorticity import VorticityClass, VorticityFn, classify

DEFAULT_NODES = 513
LIMIT_CAP = 1e6
LIMIT_STEPS = 40
BERNOULLI_TOL = 1e-12


def chebyshev_nodes(n: int = DEFAULT_NODES) -> np.ndarray:
    """Chebyshev-Lobatto nodes on [0, 1], clustered at both ends."""
    if n < 2:
        raise ValueError("need at least two nodes")
    p = 0.5 * (1.0 - np.cos(np.pi * np.arange(n) / (n - 1)))
    p[0], p[-1] = 0.0, 1.0
    return p


def s0(omega: VorticityFn) -> float:
    """Smallest admissible bottom speed, sqrt(max 2 Omega)."""
    return math.sqrt(2.0 * omega.max_primitive)


def _speed_gap(omega: VorticityFn, s: float) -> float:
    s = float(s)
    base = s0(omega)
    if not math.isfinite(s) or s < base:
        raise DomainError(f"s = {s:.17g} is below s0 = {base:.17g}: the laminar flow stagnates")
    return (s - base) * (s + base)


def _pieces(omega: VorticityFn) -> list[tuple[float, float, float]]:
    """Split [0, 1] into (a, b, anchor) pieces, one maximiser of Omega each."""
    ms = list(omega.maximisers)
    cuts = [0.0] + [0.5 * (x + y) for x, y in zip(ms[:-1], ms[1:])] + [1.0]
    return [(a, b, m) for a, b, m in zip(cuts[:-1], cuts[1:], ms)]


def _check_limit(omega: VorticityFn, s: float, at_limit: bool) -> None:
    if not at_limit and _speed_gap(omega, s) == 0.0 and not math.isfinite(limit_constants(omega)[0]):
        raise DomainError("the laminar integrals diverge at s = s0 for this vorticity")


def gap_cumulative(omega: VorticityFn, nodes, fn) -> np.ndarray:
    """int_0^p fn(G, p') dp' at each node, with G = max Omega - Omega(p').

    ``fn`` is vectorised.  G is supplied without cancellation near every
    maximiser of Omega, which is where integrands built from ``s**2 - 2
    Omega = (s**2 - s0**2) + 2 G`` become singular.  ``nodes`` must start at
    0 and end at 1.
    """
    nodes = np.asarray(nodes, dtype=float)
    out = np.empty_like(nodes)
    offset = 0.0
    try:
        with np.errstate(divide="ignore"):
            for a, b, m in _pieces(omega):
                inside = (nodes > a) & (nodes <= b) if a > 0.0 else (nodes >= a) & (nodes <= b)
                local = np.union1d(nodes[inside], [a, m, b])

                def g(delta, m=m):
                    return fn(omega.gap_at_offset(delta, m), np.clip(m + delta, 0.0, 1.0))

                cum = cumulative_graded(g, local, m)
                out[inside] = offset + cum[np.searchsorted(local, nodes[inside])]
                offset += cum[-1]
    except QuadratureError as exc:
        raise NumericalError(f"quadrature failed: {exc}") from exc
    return out


def _cumulative(omega: VorticityFn, s: float, power: float, nodes, weight=None, at_limit: bool = False) -> np.ndarray:
    """int_0^p weight (s^2 - 2 Omega)^power at each node."""
    _check_limit(omega, s, at_limit)
    eps = _speed_gap(omega, s)
    if weight is None:
        fn = lambda G, p: (eps + 2.0 * G) ** power
    else:
        fn = lambda G, p: weight(p) * (eps + 2.0 * G) ** power
    try:
        return gap_cumulative(omega, nodes, fn)
    except NumericalError as exc:
        raise NumericalError(f"quadrature failed at s = {s:.17g}: {exc}") from exc


def _integral(omega: VorticityFn, s: float, power: float, weight=None, at_limit: bool = False) -> float:
    return float(_cumulative(omega, s, power, [0.0, 1.0], weight, at_limit)[-1])


def depth(omega: VorticityFn, s: float) -> float:
    """d(s) = int_0^1 (s^2 - 2 Omega)^(-1/2) dp."""
    return _integral(omega, s, -0.5)


def cube_integral(omega: VorticityFn, s: float) -> float:
    """int_0^1 H_p^3 dp; equals 1 exactly at the critical speed."""
    if _speed_gap(omega, s) == 0.0:
        raise DomainError("int H_p^3 diverges at s = s0")
    return _integral(omega, s, -1.5)


def bernoulli_R(omega: VorticityFn, s: float) -> float:
    return 0.5 * s * s - omega.omega_at_1 + depth(omega, s)


def froude(omega: VorticityFn, s: float) -> float:
    """Froude number of the laminar flow with bottom speed ``s``.

    In physical variables F^2 = (int_0^d U_y^-2 dy)^-1.  Substituting
    y = H(p), dy = H_p dp and U_y = 1 / H_p turns the integral into
    int_0^1 H_p^3 dp, which is what is evaluated here.
    """
    return 1.0 / math.sqrt(cube_integral(omega, s))


def sigma(omega: VorticityFn, s: float, r: float) -> float:
    """Flow force of the laminar profile H(.; s) taken with Bernoulli constant r.

    Uses 1/(2 H_p^2) = s^2/2 - Omega and int H H_p = d^2 / 2:
    sigma = (s^2/2 + Omega(1) + r) d - 2 int Omega H_p - d^2 / 2.
    """
    d = depth(omega, s)
    moment = _integral(omega, s, -0.5, weight=omega.primitive)
    return (0.5 * s * s + omega.omega_at_1 + r) * d - 2.0 * moment - 0.5 * d * d


def kappa(omega: VorticityFn, s: float, r: float, flow_force: float) -> float:
    return 2.0 * (flow_force - sigma(omega, s, r)) - (r - bernoulli_R(omega, s)) ** 2


@dataclass(frozen=True)
class Sensitivities:
    d_s: float
    R_s: float
    sigma_s: float
    kappa_s: float


def sensitivities(omega: VorticityFn, s: float, r: float) -> Sensitivities:
    """Analytic s-derivatives of d, R, sigma(.; r) and kappa(.; r)."""
    j3 = cube_integral(omega, s)
    gap = r - bernoulli_R(omega, s)
    d_s = -s * j3
    return Sensitivities(d_s=d_s, R_s=s + d_s, sigma_s=-s * gap * j3, kappa_s=2.0 * s * gap)


# -- profiles ---------------------------------------------------------------


@dataclass(frozen=True)
class StreamSolution:
    """One laminar flow sampled on a p-grid.

    ``limiting`` marks the s = s0 state of class II/III vorticity; its H_p is
    +inf at the maximiser of Omega (a single flagged node).
    """

    s: float
    d: float
    R: float
    p: np.ndarray = field(repr=False)
    H: np.ndarray = field(repr=False)
    H_p: np.ndarray = field(repr=False)
    flowforce: float
    limiting: bool = False
    ode_mismatch: float | None = None
    omega: VorticityFn | None = field(default=None, repr=False, compare=False)

    def as_dict(self) -> dict[str, Any]:
        return {"s": self.s, "d": self.d, "R": self.R, "sigma": self.flowforce,
                "limiting": self.limiting, "ode_mismatch": self.ode_mismatch}


def height_derivative(omega: VorticityFn, s: float, p) -> np.ndarray:
    """H_p(p; s), vectorised; +inf where s^2 - 2 Omega vanishes."""
    eps = _speed_gap(omega, s)
    a = eps + 2.0 * omega.gap(np.asarray(p, dtype=float))
    with np.errstate(divide="ignore"):
        return 1.0 / np.sqrt(a)


def height_second_derivative(omega: VorticityFn, s: float, p) -> np.ndarray:
    """H_pp = omega H_p^3 (differentiate (s^2 - 2 Omega)^(-1/2))."""
    return omega(np.asarray(p, dtype=float)) * height_derivative(omega, s, p) ** 3


def height(omega: VorticityFn, s: float, p: np.ndarray) -> np.ndarray:
    """H(p; s) at increasing nodes ``p`` (p[0] must be 0)."""
    p = np.asarray(p, dtype=float)
    if p[0] != 0.0 or np.any(np.diff(p) <= 0):
        raise ValueError("nodes must start at 0 and increase strictly")
    return _cumulative(omega, s, -0.5, p)


def ode_profile_mismatch(omega: VorticityFn, s: float, p: np.ndarray, H: np.ndarray) -> float:
    """Sup |U(H(p)) - p| with U from U'' + omega(U) = 0, U(0) = 0, U'(0) = s."""

    def rhs(_y, z):
        u = min(max(z[0], 0.0), 1.0)
        return [z[1], -omega(u)]

    sol = solve_ivp(rhs, (0.0, float(H[-1]) * 1.0000001), [0.0, float(s)],
                    method="DOP853", rtol=1e-13, atol=1e-14, dense_output=True)
    if not sol.success:
        raise NumericalError(f"ODE cross-check failed: {sol.message}")
    U = sol.sol(np.asarray(H))[0]
    return float(np.max(np.abs(U - p)))


def stream_profile(omega: VorticityFn, s: float, grid=DEFAULT_NODES, crosscheck: bool = True) -> StreamSolution:
    """Laminar solution with bottom speed ``s`` on a p-grid.

    ``grid`` is a node count (Chebyshev nodes) or an explicit increasing
    array starting at 0 and ending at 1.
    """
    p = chebyshev_nodes(grid) if np.isscalar(grid) else np.asarray(grid, dtype=float)
    limiting = _speed_gap(omega, s) == 0.0
    if limiting and not math.isfinite(limit_constants(omega)[0]):
        raise DomainError("s = s0 with infinite limiting depth has no stream solution")
    H = height(omega, s, p)
    d = H[-1]
    R = 0.5 * s * s - omega.omega_at_1 + d
    Hp = height_derivative(omega, s, p)
    mismatch = None
    if crosscheck and not limiting:
        mismatch = ode_profile_mismatch(omega, s, p, H)
    return StreamSolution(s=float(s), d=float(d), R=float(R), p=p, H=H, H_p=Hp,
                          flowforce=sigma(omega, s, R), limiting=limiting, ode_mismatch=mismatch,
                          omega=omega)


# -- critical constants -------------------------------------------------------


def limit_constants(omega: VorticityFn) -> tuple[float, float]:
    """(d0, R0) = limits of d(s), R(s) as s -> s0+; +inf when divergent.

    Finiteness is decided on the sequence s0 + 2^-k, k = 1..40: divergence
    is declared if a value exceeds 1e6 or the trailing increments fail to
    contract (Cauchy test).  A finite limit is then evaluated directly at s = s0, where the
    substituted quadrature is regular.
    """
    return _limit_constants_cached(omega)


_LIMIT_CACHE: dict[VorticityFn, tuple[float, float]] = {}


def _limit_constants_cached(omega: VorticityFn) -> tuple[float, float]:
    if omega in _LIMIT_CACHE:
        return _LIMIT_CACHE[omega]
    base = s0(omega)
    seq = []
    divergent = False
    for k in range(1, LIMIT_STEPS + 1):
        try:
            val = depth(omega, base + 2.0 ** -k)
        except NumericalError:
            divergent = True
            break
        seq.append(val)
        if val > LIMIT_CAP:
            divergent = True
            break
    if not divergent:
        # convergent limits approach d0 like (s - s0)^(1/2) or faster, so the
        # increments shrink geometrically; logarithmic divergence keeps them flat
        inc = np.abs(np.diff(seq[-7:]))
        scale = 1e-13 * max(1.0, abs(seq[-1]))
        contracting = np.all((inc[1:] <= 0.8 * inc[:-1]) | (inc[1:] <= scale))
        divergent = not (contracting or inc[-1] <= scale)
    if divergent:
        out = (math.inf, math.inf)
    else:
        d0 = _integral(omega, base, -0.5, at_limit=True)
        out = (d0, 0.5 * base * base - omega.omega_at_1 + d0)
    _LIMIT_CACHE[omega] = out
    return out


def critical_speed(omega: VorticityFn) -> float:
    """Unique root s_c of int_0^1 (s^2 - 2 Omega)^(-3/2) dp = 1."""
    base = s0(omega)
    f = lambda s: cube_integral(omega, s) - 1.0
    try:
        hi = grow_upper(f, base, 1.0, -1.0)
        lo = shrink_lower(f, base, 0.5 * (hi - base), 1.0)
    except BracketError as exc:
        raise NumericalError(f"critical speed not bracketed: {exc}") from exc
    return brent_root(f, lo, hi)


@dataclass(frozen=True)
class CriticalConstants:
    s0: float
    sc: float
    d0: float
    dc: float
    Rc: float
    R0: float
    vclass: VorticityClass

    def as_dict(self) -> dict[str, Any]:
        return {"s0": self.s0, "sc": self.sc, "d0": self.d0, "dc": self.dc,
                "Rc": self.Rc, "R0": self.R0, "class": self.vclass.tag}


_CRIT_CACHE: dict[VorticityFn, CriticalConstants] = {}


def critical_constants(omega: VorticityFn) -> CriticalConstants:
    if omega not in _CRIT_CACHE:
        sc = critical_speed(omega)
        dc = depth(omega, sc)
        d0, R0 = limit_constants(omega)
        _CRIT_CACHE[omega] = CriticalConstants(
            s0=s0(omega), sc=sc, d0=d0, dc=dc,
            Rc=0.5 * sc * sc - omega.omega_at_1 + dc, R0=R0, vclass=classify(omega),
        )
    return _CRIT_CACHE[omega]


@dataclass(frozen=True)
class ConjugateStates:
    r: float
    s_plus: float
    d_plus: float
    S_plus: float
    s_minus: float | None = None
    d_minus: float | None = None
    S_minus: float | None = None

    def as_dict(self) -> dict[str, Any]:
        return {"r": self.r, "s_plus": self.s_plus, "d_plus": self.d_plus, "S_plus": self.S_plus,
                "s_minus": self.s_minus, "d_minus": self.d_minus, "S_minus": self.S_minus}


def supercritical_speed(omega: VorticityFn, r: float) -> float:
    """s_+(r): the root of R(s) = r on (s_c, inf)."""
    cc = critical_constants(omega)
    if r < cc.Rc - BERNOULLI_TOL:
        raise DomainError(f"r = {r:.17g} <= R_c = {cc.Rc:.17g}: only laminar flow is possible")
    if r <= cc.Rc + BERNOULLI_TOL:
        return cc.sc
    f = lambda s: bernoulli_R(omega, s) - r
    hi = grow_upper(f, cc.sc, max(cc.sc, 1e-3), 1.0)
    return brent_root(f, cc.sc, hi)


def supercritical_speed_R0(omega: VorticityFn) -> float:
    """s_+(R0), solved as s^2/2 + d(s) = s0^2/2 + d0.

    Same root as ``supercritical_speed(omega, R0)`` but without the
    -Omega(1) term on both sides, which costs ~|Omega(1)| ulp in r and,
    since R_s is small near s_+(R0) for strong vorticity, far more in s.
    """
    cc = critical_constants(omega)
    if not math.isfinite(cc.R0):
        raise DomainError("R0 is infinite for this vorticity")
    head = 0.5 * cc.s0 * cc.s0 + cc.d0
    f = lambda s: 0.5 * s * s + depth(omega, s) - head
    hi = grow_upper(f, cc.sc, max(cc.sc, 1e-3), 1.0)
    return brent_root(f, cc.sc, hi)


def subcritical_speed(omega: VorticityFn, r: float) -> float | None:
    """s_-(r) on (s0, s_c), or None when r > R0."""
    cc = critical_constants(omega)
    if r < cc.Rc - BERNOULLI_TOL:
        raise DomainError(f"r = {r:.17g} <= R_c = {cc.Rc:.17g}: only laminar flow is possible")
    if r <= cc.Rc + BERNOULLI_TOL:
        return cc.sc
    if math.isfinite(cc.R0):
        if r > cc.R0 + BERNOULLI_TOL:
            return None
        if r >= cc.R0 - BERNOULLI_TOL:
            return cc.s0
    f = lambda s: bernoulli_R(omega, s) - r
    try:
        lo = shrink_lower(f, cc.s0, cc.sc - cc.s0, 1.0)
    except BracketError as exc:
        raise NumericalError(f"subcritical root not bracketed: {exc}") from exc
    return brent_root(f, lo, cc.sc)


def conjugate_states(omega: VorticityFn, r: float) -> ConjugateStates:
    r = float(r)
    if not math.isfinite(r):
        raise DomainError("r must be finite")
    sp = supercritical_speed(omega, r)
    sm = subcritical_speed(omega, r)
    dp = depth(omega, sp)
    out = dict(r=r, s_plus=sp, d_plus=dp, S_plus=sigma(omega, sp, r))
    if sm is not None:
        out.update(s_minus=sm, d_minus=depth(omega, sm), S_minus=sigma(omega, sm, r))
    return ConjugateStates(**out)
