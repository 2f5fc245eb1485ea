"""Height-function formulation of steady periodic waves on a fixed strip.

The unknown is h(q, p), the height of the streamline p above the bed at
horizontal position q.  A field is stored as

    h(q, p) = H(p; s_b) + v(q, p),

a laminar background with analytic p-derivatives plus a perturbation v on a
uniform (q, p) grid.  Only the half period 0 <= q <= L/2 is kept; v is even
about both ends, which pins the crest at q = 0 and the trough at q = L/2.
Laminar fields therefore have residuals at round-off level, and the
discretisation error only ever acts on v.

Equations (non-divergence interior form, Bernoulli condition on top):

    (1 + h_q^2)/h_p^2 h_pp - 2 h_q/h_p h_qp + h_qq - omega(p) h_p = 0,
    (1 + h_q^2)/(2 h_p^2) + h = r   on p = 1,        h = 0   on p = 0.
"""

from __future__ import annotations

import base64
import io
import json
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Any, Callable

import numpy as np
from scipy import sparse
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline, PchipInterpolator
from scipy.sparse.linalg import spsolve

from . import stream
from .errors import DomainError, NumericalError
from .quadrature import BracketError, brent_root
from .vorticity import VorticityFn, from_dict

DEFAULT_NQ = 257
DEFAULT_NP = 129
SCAN_NQ = 129
SCAN_NP = 65
STAGNATION_FLOOR = 1e-3
RESOLUTION_LIMIT = 1e-3


class UnidirectionalityError(NumericalError):
    """h_p <= 0 somewhere, or the flow came too close to stagnation."""

    def __init__(self, message: str, last: "HeightField | None" = None):
        super().__init__(message)
        self.last = last


class ResolutionLimit(NumericalError):
    """A converged discrete wave that the grid no longer resolves."""


class NewtonDivergence(NumericalError):
    """Newton iteration failed to reach the residual tolerance."""

    def __init__(self, message: str, last: "HeightField | None" = None):
        super().__init__(message)
        self.last = last


# -- finite-difference operators -------------------------------------------


def fd_weights(offsets, deriv: int) -> np.ndarray:
    """Weights of the derivative of order ``deriv`` at 0 from samples at ``offsets`` (unit spacing)."""
    offsets = np.asarray(offsets, dtype=float)
    n = len(offsets)
    vander = np.vander(offsets, n, increasing=True).T
    rhs = np.zeros(n)
    rhs[deriv] = math.factorial(deriv)
    return np.linalg.solve(vander, rhs)


def diff_matrix(n: int, step: float, deriv: int, order: int, boundary: str) -> sparse.csr_matrix:
    """1-D difference matrix on n uniform nodes.

    ``boundary="even"`` reflects the stencil about both end nodes (even
    extension); ``"open"`` switches to one-sided stencils of the same order.
    """
    half = order // 2
    rows, cols, vals = [], [], []
    for j in range(n):
        if boundary == "even" or (j - half >= 0 and j + half <= n - 1):
            offs = np.arange(-half, half + 1)
        else:
            width = order + deriv
            start = 0 if j - half < 0 else n - width
            offs = np.arange(start, start + width) - j
        w = fd_weights(offs, deriv) / step**deriv
        idx = j + offs
        if boundary == "even":
            idx = np.abs(idx)
            idx = np.where(idx > n - 1, 2 * (n - 1) - idx, idx)
        rows.extend([j] * len(offs))
        cols.extend(idx.tolist())
        vals.extend(w.tolist())
    return sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))


@dataclass(frozen=True)
class Operators:
    """Difference operators on the flattened (q, p) grid, row-major in (q, p)."""

    dq: sparse.csr_matrix
    dp: sparse.csr_matrix
    dqq: sparse.csr_matrix
    dpp: sparse.csr_matrix
    dqp: sparse.csr_matrix


@lru_cache(maxsize=32)
def operators(n_q: int, n_p: int, step_q: float, step_p: float, order: int = 2) -> Operators:
    Iq = sparse.identity(n_q, format="csr")
    Ip = sparse.identity(n_p, format="csr")
    aq = diff_matrix(n_q, step_q, 1, order, "even")
    aqq = diff_matrix(n_q, step_q, 2, order, "even")
    ap = diff_matrix(n_p, step_p, 1, order, "open")
    app = diff_matrix(n_p, step_p, 2, order, "open")
    return Operators(
        dq=sparse.kron(aq, Ip, format="csr"),
        dp=sparse.kron(Iq, ap, format="csr"),
        dqq=sparse.kron(aqq, Ip, format="csr"),
        dpp=sparse.kron(Iq, app, format="csr"),
        dqp=sparse.kron(aq, ap, format="csr"),
    )


def cumulative_p(f: np.ndarray, p: np.ndarray, order: int = 4) -> np.ndarray:
    """int_0^p f dp' along the last axis; cubic-spline (order 4) or trapezoid (order 2)."""
    if order == 2:
        mid = 0.5 * (f[..., 1:] + f[..., :-1]) * np.diff(p)
        return np.concatenate([np.zeros(f.shape[:-1] + (1,)), np.cumsum(mid, axis=-1)], axis=-1)
    spline = CubicSpline(p, f, axis=-1).antiderivative()
    return spline(p) - spline(p[:1])


# -- laminar background ------------------------------------------------------


@dataclass(frozen=True)
class Background:
    """H, H_p, H_pp of the laminar flow with speed s on the p-nodes."""

    s: float
    H: np.ndarray
    H_p: np.ndarray
    H_pp: np.ndarray


@lru_cache(maxsize=64)
def _background_cached(omega: VorticityFn, s: float, n_p: int) -> Background:
    p = np.linspace(0.0, 1.0, n_p)
    Hp = stream.height_derivative(omega, s, p)
    if not np.all(np.isfinite(Hp)):
        raise DomainError(f"background speed s = {s:.17g} gives an infinite H_p on the grid")
    H = stream.height(omega, s, p)
    for arr in (H, Hp):
        arr.setflags(write=False)
    Hpp = omega(p) * Hp**3
    Hpp.setflags(write=False)
    return Background(s=float(s), H=H, H_p=Hp, H_pp=Hpp)


def background(omega: VorticityFn, s: float, n_p: int) -> Background:
    return _background_cached(omega, float(s), int(n_p))


# -- the field container -----------------------------------------------------


@dataclass(frozen=True, eq=False)
class HeightField:
    """A discretised wave h(q, p) on the half period [0, L/2] x [0, 1].

    ``v`` (shape n_q x n_p) is the perturbation of the laminar background
    with speed ``s_base``; h = H(p; s_base) + v.  ``residual_norm`` is the
    max-norm of the discrete equations at the time the field was produced.
    """

    omega: VorticityFn
    period: float
    r: float
    s_base: float
    v: np.ndarray = field(repr=False)
    residual_norm: float = 0.0

    def __post_init__(self):
        v = np.array(self.v, dtype=float)
        if v.ndim != 2 or v.shape[0] < 3 or v.shape[1] < 5:
            raise ValueError("v must be a 2-D array with at least 3 q-nodes and 5 p-nodes")
        if np.any(v[:, 0] != 0.0):
            raise ValueError("the perturbation must vanish on the bed p = 0")
        v.setflags(write=False)
        object.__setattr__(self, "v", v)

    @property
    def n_q(self) -> int:
        return self.v.shape[0]

    @property
    def n_p(self) -> int:
        return self.v.shape[1]

    @cached_property
    def q(self) -> np.ndarray:
        return np.linspace(0.0, 0.5 * self.period, self.n_q)

    @cached_property
    def p(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n_p)

    @property
    def step_q(self) -> float:
        return 0.5 * self.period / (self.n_q - 1)

    @property
    def step_p(self) -> float:
        return 1.0 / (self.n_p - 1)

    @cached_property
    def base(self) -> Background:
        return background(self.omega, self.s_base, self.n_p)

    @cached_property
    def h(self) -> np.ndarray:
        return self.base.H[None, :] + self.v

    @property
    def eta(self) -> np.ndarray:
        return self.h[:, -1]

    @property
    def crest_index(self) -> int:
        return int(np.argmax(self.eta))

    @property
    def trough_index(self) -> int:
        return int(np.argmin(self.eta))

    @property
    def q_c(self) -> float:
        return float(self.q[self.crest_index])

    @property
    def q_t(self) -> float:
        return float(self.q[self.trough_index])

    @property
    def amplitude(self) -> float:
        return float(self.eta[0] - self.eta[-1])

    def with_values(self, v: np.ndarray, r: float, residual_norm: float) -> "HeightField":
        return HeightField(self.omega, self.period, float(r), self.s_base, v, float(residual_norm))

    def derivatives(self, order: int = 2) -> dict[str, np.ndarray]:
        """h and its first and second partials on the grid (stencils of the given order)."""
        ops = operators(self.n_q, self.n_p, self.step_q, self.step_p, order)
        flat = self.v.ravel()
        shape = self.v.shape
        b = self.base
        return {
            "h": self.h,
            "h_q": (ops.dq @ flat).reshape(shape),
            "h_p": b.H_p[None, :] + (ops.dp @ flat).reshape(shape),
            "h_qq": (ops.dqq @ flat).reshape(shape),
            "h_pp": b.H_pp[None, :] + (ops.dpp @ flat).reshape(shape),
            "h_qp": (ops.dqp @ flat).reshape(shape),
        }

    # -- serialization ---------------------------------------------------
    def header(self) -> dict[str, Any]:
        return {
            "omega": self.omega.to_dict(),
            "period": self.period,
            "r": self.r,
            "s_base": self.s_base,
            "n_q": self.n_q,
            "n_p": self.n_p,
            "residual": self.residual_norm,
            "layout": "row-major float64 little-endian, shape (n_q, n_p), q over [0, period/2]",
        }

    def to_json(self) -> str:
        doc = self.header()
        doc["h"] = _encode(self.h)
        doc["v"] = _encode(self.v)
        return json.dumps(doc, sort_keys=True, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "HeightField":
        doc = json.loads(text)
        shape = (int(doc["n_q"]), int(doc["n_p"]))
        v = _decode(doc["v"], shape)
        return cls(from_dict(doc["omega"]), float(doc["period"]), float(doc["r"]),
                   float(doc["s_base"]), v, float(doc["residual"]))

    def surface_csv(self) -> str:
        """(q, eta) over one full period [0, L], reflected from the half period."""
        q = np.concatenate([self.q, self.period - self.q[-2::-1]])
        eta = np.concatenate([self.eta, self.eta[-2::-1]])
        buf = io.StringIO()
        buf.write("q,eta\n")
        for a, b in zip(q, eta):
            buf.write(f"{a:.17g},{b:.17g}\n")
        return buf.getvalue()


def _encode(arr: np.ndarray) -> str:
    return base64.b64encode(np.ascontiguousarray(arr, dtype="<f8").tobytes()).decode("ascii")


def _decode(text: str, shape) -> np.ndarray:
    return np.frombuffer(base64.b64decode(text), dtype="<f8").reshape(shape).copy()


def laminar_field(flow: stream.StreamSolution, period: float, n_q: int = DEFAULT_NQ, n_p: int = DEFAULT_NP) -> HeightField:
    """The q-independent field h = H(p; s) with r = R(s)."""
    if flow.omega is None:
        raise ValueError("stream solution does not carry its vorticity")
    if period <= 0:
        raise ValueError("period must be positive")
    return HeightField(flow.omega, float(period), flow.R, flow.s, np.zeros((n_q, n_p)), 0.0)


# -- residuals ----------------------------------------------------------------


def _interior(d: dict, w: np.ndarray) -> np.ndarray:
    hp = d["h_p"]
    hq = d["h_q"]
    return (1.0 + hq**2) / hp**2 * d["h_pp"] - 2.0 * hq / hp * d["h_qp"] + d["h_qq"] - w * hp


def _top(d: dict, r: float) -> np.ndarray:
    hp = d["h_p"][:, -1]
    hq = d["h_q"][:, -1]
    return (1.0 + hq**2) / (2.0 * hp**2) + d["h"][:, -1] - r


@dataclass(frozen=True)
class ResidualReport:
    interior: np.ndarray = field(repr=False)
    top: np.ndarray = field(repr=False)
    bottom: np.ndarray = field(repr=False)
    order: int = 2

    @property
    def interior_norm(self) -> float:
        return float(np.max(np.abs(self.interior))) if self.interior.size else 0.0

    @property
    def top_norm(self) -> float:
        return float(np.max(np.abs(self.top)))

    @property
    def bottom_norm(self) -> float:
        return float(np.max(np.abs(self.bottom)))

    @property
    def norm(self) -> float:
        return max(self.interior_norm, self.top_norm, self.bottom_norm)

    def as_dict(self) -> dict[str, Any]:
        return {"interior": self.interior_norm, "top": self.top_norm,
                "bottom": self.bottom_norm, "order": self.order}


def residual(hf: HeightField, order: int = 2) -> ResidualReport:
    """Residuals of the height problem on the grid.

    ``order=2`` evaluates the discrete equations that the solver drives to
    zero.  ``order=4`` evaluates the same equations with fourth-order
    stencils, which measures how far a second-order solution is from
    solving the continuous problem.
    """
    d = hf.derivatives(order)
    if np.any(d["h_p"] <= 0.0):
        i, j = np.unravel_index(np.argmin(d["h_p"]), d["h_p"].shape)
        raise UnidirectionalityError(
            f"h_p = {d['h_p'][i, j]:.3g} <= 0 at q = {hf.q[i]:.6g}, p = {hf.p[j]:.6g}", hf)
    w = hf.omega(hf.p)[None, :]
    return ResidualReport(
        interior=_interior(d, w)[:, 1:-1],
        top=_top(d, hf.r),
        bottom=hf.h[:, 0].copy(),
        order=order,
    )


def unidirectional_margin(hf: HeightField) -> float:
    """min over the grid of the discrete h_p (positive for admissible waves)."""
    return float(np.min(hf.derivatives(2)["h_p"]))


def stagnation_margin(hf: HeightField) -> float:
    """min over the grid of u - c = 1 / h_p; zero means a stagnation point."""
    hp = hf.derivatives(2)["h_p"]
    if np.any(hp <= 0.0):
        return -math.inf
    return float(np.min(1.0 / hp))


# -- Newton solver -------------------------------------------------------------


@dataclass(frozen=True)
class NewtonConfig:
    tol: float = 1e-10
    step_tol: float = 1e-12
    max_iter: int = 50
    max_halvings: int = 12


class _System:
    """Discrete equations for the unknowns v[:, 1:] (and optionally r)."""

    def __init__(self, template: HeightField, amplitude: float | None):
        self.t = template
        self.amplitude = amplitude
        n_q, n_p = template.n_q, template.n_p
        self.shape = (n_q, n_p)
        self.ops = operators(n_q, n_p, template.step_q, template.step_p, 2)
        idx = np.arange(n_q * n_p).reshape(n_q, n_p)
        self.unknown = idx[:, 1:].ravel()
        self.interior_rows = idx[:, 1:-1].ravel()
        self.top_rows = idx[:, -1]
        self.omega_p = np.broadcast_to(template.omega(template.p)[None, :], self.shape).ravel()
        self.n_v = self.unknown.size

    def pack(self, v: np.ndarray, r: float) -> np.ndarray:
        x = v.ravel()[self.unknown]
        return np.append(x, r) if self.amplitude is not None else x.copy()

    def unpack(self, x: np.ndarray) -> tuple[np.ndarray, float]:
        full = np.zeros(self.shape[0] * self.shape[1])
        full[self.unknown] = x[: self.n_v]
        r = x[-1] if self.amplitude is not None else self.t.r
        return full.reshape(self.shape), float(r)

    def evaluate(self, x: np.ndarray, jacobian: bool = True):
        v, r = self.unpack(x)
        flat = v.ravel()
        ops = self.ops
        b = self.t.base
        hp = (np.broadcast_to(b.H_p[None, :], self.shape).ravel() + ops.dp @ flat)
        if np.any(hp <= 0.0):
            return None, None
        hq = ops.dq @ flat
        hpp = np.broadcast_to(b.H_pp[None, :], self.shape).ravel() + ops.dpp @ flat
        hqp = ops.dqp @ flat
        hqq = ops.dqq @ flat
        h = np.broadcast_to(b.H[None, :], self.shape).ravel() + flat
        I, T = self.interior_rows, self.top_rows
        A = (1.0 + hq**2) / hp**2
        B = hq / hp
        res_i = A[I] * hpp[I] - 2.0 * B[I] * hqp[I] + hqq[I] - self.omega_p[I] * hp[I]
        res_t = 0.5 * A[T] + h[T] - r
        parts = [res_i, res_t]
        if self.amplitude is not None:
            n_p = self.shape[1]
            parts.append(np.array([h[n_p - 1] - h[-1] - self.amplitude]))
        F = np.concatenate(parts)
        if not jacobian:
            return F, None
        # chain rule through the five stencil outputs
        dR_dhq = 2.0 * hq * hpp / hp**2 - 2.0 * hqp / hp
        dR_dhp = -2.0 * (1.0 + hq**2) * hpp / hp**3 + 2.0 * hq * hqp / hp**2 - self.omega_p
        rows_i = (
            sparse.diags(dR_dhq[I]) @ ops.dq[I]
            + sparse.diags(dR_dhp[I]) @ ops.dp[I]
            + sparse.diags(A[I]) @ ops.dpp[I]
            + sparse.diags(-2.0 * B[I]) @ ops.dqp[I]
            + ops.dqq[I]
        )
        ident = sparse.identity(hp.size, format="csr")
        rows_t = (
            sparse.diags(hq[T] / hp[T] ** 2) @ ops.dq[T]
            + sparse.diags(-(1.0 + hq[T] ** 2) / hp[T] ** 3) @ ops.dp[T]
            + ident[T]
        )
        J = sparse.vstack([rows_i, rows_t], format="csc")[:, self.unknown]
        if self.amplitude is not None:
            n_rows = J.shape[0]
            col_r = sparse.csc_matrix(
                (-np.ones(T.size), (np.arange(I.size, n_rows), np.zeros(T.size, dtype=int))),
                shape=(n_rows, 1))
            amp = np.zeros(self.n_v + 1)
            pos = {k: m for m, k in enumerate(self.unknown)}
            amp[pos[self.shape[1] - 1]] += 1.0
            amp[pos[self.shape[0] * self.shape[1] - 1]] -= 1.0
            J = sparse.vstack([sparse.hstack([J, col_r]), sparse.csc_matrix(amp)], format="csc")
        return F, J


def newton(template: HeightField, amplitude: float | None = None,
           config: NewtonConfig = NewtonConfig()) -> tuple[HeightField, int]:
    """Newton iteration from ``template``; returns (field, iterations).

    With ``amplitude`` given, r is an extra unknown and h(0,1) - h(L/2,1)
    is constrained to the amplitude; otherwise r is held at template.r.
    """
    system = _System(template, amplitude)
    x = system.pack(template.v, template.r)
    F, J = system.evaluate(x)
    if F is None:
        raise UnidirectionalityError("initial guess has h_p <= 0", template)
    norm = float(np.max(np.abs(F)))
    last = template.with_values(*system.unpack(x), norm)
    for it in range(1, config.max_iter + 1):
        if norm < config.tol:
            return last, it - 1
        try:
            dx = spsolve(J, -F)
        except RuntimeError as exc:
            raise NewtonDivergence(f"singular Jacobian: {exc}", last) from exc
        if not np.all(np.isfinite(dx)):
            raise NewtonDivergence("non-finite Newton step", last)
        lam = 1.0
        for _ in range(config.max_halvings + 1):
            trial = x + lam * dx
            F_new, _ = system.evaluate(trial, jacobian=False)
            if F_new is not None:
                new_norm = float(np.max(np.abs(F_new)))
                if new_norm < norm or new_norm < config.tol:
                    break
            lam *= 0.5
        else:
            raise NewtonDivergence(f"no decrease after {config.max_halvings} halvings (residual {norm:.3g})", last)
        x = trial
        step = lam * float(np.max(np.abs(dx)))
        F, J = system.evaluate(x)
        norm = float(np.max(np.abs(F)))
        last = template.with_values(*system.unpack(x), norm)
        if step < config.step_tol and norm >= config.tol:
            raise NewtonDivergence(f"stalled at residual {norm:.3g}", last)
    if norm < config.tol:
        return last, config.max_iter
    raise NewtonDivergence(f"no convergence in {config.max_iter} iterations (residual {norm:.3g})", last)


# -- bifurcation from laminar flow -------------------------------------------------


def _linear_mode(omega: VorticityFn, s: float, period: float, p_eval=None):
    """Integrate phi' = H_p^3 psi, psi' = k^2 phi / H_p with phi(0) = 0, psi(0) = 1.

    These are the q-Fourier mode k = 2 pi / L of the height problem
    linearised about H(.; s); the top condition is psi(1) = phi(1).
    """
    k2 = (2.0 * math.pi / period) ** 2

    def rhs(p, z):
        hp = float(stream.height_derivative(omega, s, min(max(p, 0.0), 1.0)))
        return [hp**3 * z[1], k2 * z[0] / hp]

    sol = solve_ivp(rhs, (0.0, 1.0), [0.0, 1.0], method="DOP853", rtol=1e-12, atol=1e-14,
                    t_eval=p_eval)
    if not sol.success:
        raise NumericalError(f"linear mode integration failed: {sol.message}")
    return sol


def dispersion_mismatch(omega: VorticityFn, s: float, period: float) -> float:
    """1 - phi(1)/psi(1); vanishes at the bifurcation speed of period L."""
    sol = _linear_mode(omega, s, period)
    phi, psi = sol.y[:, -1]
    return 1.0 - phi / psi


def bifurcation_speed(omega: VorticityFn, period: float, samples: int = 24) -> float:
    """Speed s in (s0, s_c) at which Stokes waves of period L bifurcate."""
    cc = stream.critical_constants(omega)
    f = lambda s: dispersion_mismatch(omega, s, period)
    # long waves bifurcate close to s_c; scan downward for the sign change
    hi = cc.sc
    f_hi = f(hi)
    if f_hi <= 0.0:
        raise DomainError(f"no bifurcation below s_c for period {period:g}")
    for k in range(1, samples + 1):
        lo = cc.s0 + (cc.sc - cc.s0) * 2.0 ** (-k)
        try:
            f_lo = f(lo)
        except (NumericalError, DomainError):
            break
        if f_lo < 0.0:
            return brent_root(f, lo, hi, xtol=1e-14)
        hi, f_hi = lo, f_lo
    raise DomainError(f"no bifurcation from a unidirectional laminar flow for period {period:g}")


def bifurcation_mode(omega: VorticityFn, s: float, period: float, p: np.ndarray) -> np.ndarray:
    """Vertical structure phi(p) of the bifurcating mode, normalised to phi(1) = 1."""
    sol = _linear_mode(omega, s, period, p_eval=p)
    phi = sol.y[0]
    return phi / phi[-1]


def first_wave_guess(omega: VorticityFn, period: float, amplitude: float, n_q: int, n_p: int,
                     s_bif: float | None = None) -> HeightField:
    """Laminar flow at the bifurcation speed plus (a/2) phi(p) cos(2 pi q / L)."""
    s_b = bifurcation_speed(omega, period) if s_bif is None else s_bif
    q = np.linspace(0.0, 0.5 * period, n_q)
    p = np.linspace(0.0, 1.0, n_p)
    mode = bifurcation_mode(omega, s_b, period, p)
    v = 0.5 * amplitude * np.cos(2.0 * math.pi * q / period)[:, None] * mode[None, :]
    v[:, 0] = 0.0
    return HeightField(omega, float(period), stream.bernoulli_R(omega, s_b), s_b, v, math.inf)


def solve_stokes(omega: VorticityFn, period: float, amplitude: float | None = None, r: float | None = None,
                 init: HeightField | None = None, n_q: int = DEFAULT_NQ, n_p: int = DEFAULT_NP,
                 config: NewtonConfig = NewtonConfig()) -> HeightField:
    """Newton-converged Stokes wave of period L.

    Target either the amplitude a = h(q_c,1) - h(q_t,1) (r becomes an
    unknown) or the Bernoulli constant r (amplitude free).  Without
    ``init`` the guess is built from the bifurcating linear mode.  a = 0
    returns the laminar flow (at s_-(r) if r is given, else at the
    bifurcation speed).
    """
    if (amplitude is None) == (r is None):
        raise ValueError("give exactly one of amplitude or r")
    if amplitude is not None and amplitude == 0.0 and init is None:
        s_lam = bifurcation_speed(omega, period)
        return laminar_field(stream.stream_profile(omega, s_lam, crosscheck=False), period, n_q, n_p)
    if init is None:
        if amplitude is None:
            s_m = stream.subcritical_speed(omega, r)
            if s_m is None:
                raise DomainError(f"r = {r:.17g} > R0 has no subcritical laminar flow to start from")
            flow = stream.stream_profile(omega, s_m, crosscheck=False)
            return laminar_field(flow, period, n_q, n_p)
        init = first_wave_guess(omega, period, amplitude, n_q, n_p)
    elif r is not None:
        init = init.with_values(init.v, r, math.inf)
    out, _ = newton(init, amplitude=amplitude, config=config)
    return out


# -- continuation along a branch ------------------------------------------------


@dataclass(frozen=True)
class BranchPoint:
    amplitude: float
    r: float
    flow_force: float
    spread: float
    margin: float
    stagnation: float
    eta_crest: float
    eta_gap: float
    residual: float
    iterations: int

    def as_dict(self) -> dict[str, Any]:
        return dict(self.__dict__)


@dataclass
class Branch:
    omega: VorticityFn
    period: float
    s_bif: float
    n_q: int
    n_p: int
    points: list[BranchPoint] = field(default_factory=list)
    termination: str = ""
    message: str = ""
    last: HeightField | None = field(default=None, repr=False)

    @property
    def r_max(self) -> float:
        return max((pt.r for pt in self.points), default=math.nan)

    def as_dict(self) -> dict[str, Any]:
        return {"omega": self.omega.to_dict(), "period": self.period, "s_bif": self.s_bif,
                "n_q": self.n_q, "n_p": self.n_p, "termination": self.termination,
                "message": self.message, "r_max": self.r_max,
                "points": [pt.as_dict() for pt in self.points]}


def _point(hf: HeightField, iterations: int) -> BranchPoint:
    ff = flow_force(hf)
    return BranchPoint(amplitude=hf.amplitude, r=hf.r, flow_force=ff.mean, spread=ff.spread,
                       margin=unidirectional_margin(hf), stagnation=stagnation_margin(hf),
                       eta_crest=float(hf.eta[0]), eta_gap=float(np.max(hf.eta) - hf.r),
                       residual=hf.residual_norm, iterations=iterations)


def continue_branch(omega: VorticityFn, period: float, a_start: float = 1e-3, growth: float = 1.3,
                    a_max: float = 10.0, refinements: int = 6, n_q: int = SCAN_NQ, n_p: int = SCAN_NP,
                    floor: float = STAGNATION_FLOOR, resolution: float = RESOLUTION_LIMIT, config: NewtonConfig = NewtonConfig(),
                    on_step: Callable[[BranchPoint], None] | None = None) -> Branch:
    """Follow the Stokes branch of period L in amplitude from a_start.

    Steps grow geometrically by ``growth``; a failed step is bisected
    back toward the last good amplitude up to ``refinements`` times.  The
    branch stops when u - c falls below ``floor`` times the background
    surface speed (unidirectionality floor), when Newton keeps failing,
    when the q-spread of the flow force exceeds ``resolution`` times its
    mean (the grid no longer resolves the wave), or at ``a_max``.
    """
    s_bif = bifurcation_speed(omega, period)
    branch = Branch(omega, float(period), s_bif, n_q, n_p)
    scale = float(np.max(1.0 / background(omega, s_bif, n_p).H_p))
    good: list[HeightField] = []
    amps: list[float] = []
    a_try = a_start
    fails = 0
    reason = ""
    while True:
        if a_try > a_max:
            branch.termination, branch.message = "amplitude cap", f"a > {a_max:g}"
            break
        if not good:
            guess = first_wave_guess(omega, period, a_try, n_q, n_p, s_bif)
        elif len(good) == 1:
            guess = good[-1]
        else:
            # secant predictor in amplitude
            t = (a_try - amps[-1]) / (amps[-1] - amps[-2])
            v = good[-1].v + t * (good[-1].v - good[-2].v)
            rr = good[-1].r + t * (good[-1].r - good[-2].r)
            guess = good[-1].with_values(v, rr, math.inf)
        try:
            hf, its = newton(guess, amplitude=a_try, config=config)
            stag = stagnation_margin(hf)
            if stag < floor * scale:
                raise UnidirectionalityError(f"u - c = {stag:.3g} below floor {floor * scale:.3g}", hf)
            point = _point(hf, its)
            if point.spread > resolution * abs(point.flow_force):
                raise ResolutionLimit(f"flow force spread {point.spread:.3g} exceeds "
                                      f"{resolution:g} |F| = {resolution * abs(point.flow_force):.3g}")
        except UnidirectionalityError as exc:
            reason, msg = "unidirectionality floor", str(exc)
        except ResolutionLimit as exc:
            reason, msg = "resolution limit", str(exc)
        except NumericalError as exc:
            reason, msg = "newton failure", str(exc)
        else:
            branch.points.append(point)
            if on_step is not None:
                on_step(point)
            prev = amps[-1] if amps else a_try / growth
            good = (good + [hf])[-2:]
            amps = (amps + [a_try])[-2:]
            branch.last = hf
            # after a refinement the reduced step is kept
            a_try = a_try + (a_try - prev) if fails else a_try * growth
            continue
        if not good or fails >= refinements:
            branch.termination, branch.message = reason, msg
            break
        fails += 1
        a_try = 0.5 * (amps[-1] + a_try)
    return branch


# -- flow force ------------------------------------------------------------------


@dataclass(frozen=True)
class FlowForce:
    mean: float
    spread: float
    columns: np.ndarray = field(repr=False)

    def as_dict(self) -> dict[str, Any]:
        return {"mean": self.mean, "spread": self.spread}


def flow_force(hf: HeightField, order: int = 4) -> FlowForce:
    """Column-wise flow force and its spread over q.

    Per column, with eta = h(q, 1),

        F = int_0^1 [(1 - h_q^2)/(2 h_p) + omega h] dp + r eta - eta^2/2,

    obtained from int ((1 - h_q^2)/(2 h_p^2) - h - Omega + Omega(1) + r) h_p dp
    by integrating the h h_p and Omega h_p terms by parts.  The laminar part
    sigma(s_base; r) is taken from the exact quadrature; only the
    perturbation terms are summed on the grid.
    """
    d = hf.derivatives(order)
    hp, hq = d["h_p"], d["h_q"]
    Hp = hf.base.H_p[None, :]
    if np.any(hp <= 0.0):
        raise UnidirectionalityError("h_p <= 0 in flow force", hf)
    dv_p = hp - Hp
    integrand = -dv_p / (2.0 * hp * Hp) - hq**2 / (2.0 * hp) + hf.omega(hf.p)[None, :] * hf.v
    col = cumulative_p(integrand, hf.p, order)[:, -1]
    eta = hf.eta
    d_b = hf.base.H[-1]
    col = col + hf.r * hf.v[:, -1] - 0.5 * (eta**2 - d_b**2)
    col = col + stream.sigma(hf.omega, hf.s_base, hf.r)
    if not np.all(np.isfinite(col)):
        raise NumericalError("non-finite flow force")
    return FlowForce(mean=float(np.mean(col)), spread=float(np.max(col) - np.min(col)), columns=col)


# -- physical fields -------------------------------------------------------------


@dataclass(frozen=True)
class PhysicalFields:
    """Velocity, stream function and pressure on the physical mesh.

    ``x`` and ``y`` (n_q x n_p) are the images of the (q, p) nodes:
    x = q, y = h(q, p); psi = p there.  ``grid_*`` hold the same fields
    resampled to a y-uniform mesh in each column by inverting p -> h.
    """

    x: np.ndarray = field(repr=False)
    y: np.ndarray = field(repr=False)
    psi: np.ndarray = field(repr=False)
    u_rel: np.ndarray = field(repr=False)
    v: np.ndarray = field(repr=False)
    pressure: np.ndarray = field(repr=False)
    grid_y: np.ndarray = field(repr=False)
    grid_psi: np.ndarray = field(repr=False)


def _pressure(hf: HeightField, d: dict) -> np.ndarray:
    hp, hq = d["h_p"], d["h_q"]
    big = hf.omega.primitive(hf.p)[None, :]
    return hf.r - (1.0 + hq**2) / (2.0 * hp**2) - d["h"] - big + hf.omega.omega_at_1


def reconstruct_physical(hf: HeightField, n_y: int | None = None, order: int = 2) -> PhysicalFields:
    """u - c = 1/h_p, v = h_q/h_p and P - P_atm on the wave.

    psi_y = 1/h_p and psi_x = -h_q/h_p; with psi_y = u - c and psi_x = -v
    this gives v = h_q / h_p.  The pressure follows from Bernoulli's law,
    P - P_atm = r - |grad psi|^2/2 - y - Omega(psi) + Omega(1), which
    vanishes on the surface where the dynamic condition holds.
    """
    d = hf.derivatives(order)
    hp = d["h_p"]
    if np.any(hp <= 0.0) or np.any(np.diff(hf.h, axis=1) <= 0.0):
        raise UnidirectionalityError("h is not increasing in p; cannot invert to psi(x, y)", hf)
    n_y = hf.n_p if n_y is None else n_y
    x = np.broadcast_to(hf.q[:, None], hf.h.shape).copy()
    psi = np.broadcast_to(hf.p[None, :], hf.h.shape).copy()
    grid_y = np.empty((hf.n_q, n_y))
    grid_psi = np.empty((hf.n_q, n_y))
    for i in range(hf.n_q):
        ys = np.linspace(0.0, hf.eta[i], n_y)
        inv = PchipInterpolator(hf.h[i], hf.p)
        grid_y[i] = ys
        grid_psi[i] = inv(ys)
    return PhysicalFields(x=x, y=hf.h.copy(), psi=psi, u_rel=1.0 / hp, v=d["h_q"] / hp,
                          pressure=_pressure(hf, d), grid_y=grid_y, grid_psi=grid_psi)


def surface_pressure(hf: HeightField, q_eval, order: int = 2) -> np.ndarray:
    """P - P_atm on p = 1 at arbitrary q, via even-periodic splines of h, h_q, h_p along the top."""
    d = hf.derivatives(order)
    qq = np.concatenate([hf.q, hf.period - hf.q[-2::-1]])

    def spline(col, parity=1.0):
        return CubicSpline(qq, np.concatenate([col, parity * col[-2::-1]]), bc_type="periodic")

    tgt = np.mod(np.asarray(q_eval, dtype=float), hf.period)
    eta = spline(d["h"][:, -1])(tgt)
    hp = spline(d["h_p"][:, -1])(tgt)
    hq = spline(d["h_q"][:, -1], -1.0)(tgt)
    return hf.r - (1.0 + hq**2) / (2.0 * hp**2) - eta


# -- w-field relative to a reference laminar flow --------------------------------


@dataclass(frozen=True)
class WField:
    s: float
    w: np.ndarray = field(repr=False)
    main: np.ndarray = field(repr=False)
    top: np.ndarray = field(repr=False)
    bottom: np.ndarray = field(repr=False)

    @property
    def norms(self) -> dict[str, float]:
        return {"main": float(np.max(np.abs(self.main))), "top": float(np.max(np.abs(self.top))),
                "bottom": float(np.max(np.abs(self.bottom)))}


def reference_profile(hf: HeightField, s: float) -> Background:
    """H(.; s) on the field's p-grid (s > s0 required)."""
    if s <= stream.s0(hf.omega):
        raise DomainError(f"s = {s:.17g} <= s0")
    return background(hf.omega, s, hf.n_p)


def w_field(hf: HeightField, s: float, order: int = 2) -> WField:
    """w = h - H(.; s) and the residuals of its interior and boundary equations."""
    ref = reference_profile(hf, s)
    d = hf.derivatives(order)
    hp, hq = d["h_p"], d["h_q"]
    Hp, Hpp = ref.H_p[None, :], ref.H_pp[None, :]
    w = hf.h - ref.H[None, :]
    w_p = hp - Hp
    w_pp = d["h_pp"] - Hpp
    om = hf.omega(hf.p)[None, :]
    main = ((1.0 + hq**2) / hp**2 * w_pp - 2.0 * hq / hp * d["h_qp"] + d["h_qq"] - om * w_p
            + hq**2 * Hpp / hp**2 - w_p * (hp + Hp) * Hpp / (hp**2 * Hp**2))
    R_s = 0.5 * s * s - hf.omega.omega_at_1 + ref.H[-1]
    top = (hq[:, -1] ** 2 / (2.0 * hp[:, -1] ** 2)
           - w_p[:, -1] * (hp[:, -1] + Hp[0, -1]) / (2.0 * hp[:, -1] ** 2 * Hp[0, -1] ** 2)
           + w[:, -1] - (hf.r - R_s))
    return WField(s=float(s), w=w, main=main[:, 1:-1], top=top, bottom=w[:, 0].copy())
