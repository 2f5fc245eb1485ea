"""Vorticity functions omega(p) on [0, 1], their primitives and class taxonomy.

Four concrete families are supported: constant, affine (a + b p), polynomial
and tabulated samples (monotone cubic interpolation).  The primitive

    Omega(p) = int_0^p omega(t) dt

is evaluated from an exact antiderivative in every case, so Omega(0) == 0
holds to the last bit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Sequence

import numpy as np
from numpy.polynomial import Polynomial
from scipy.interpolate import PchipInterpolator

KINDS = ("constant", "affine", "poly", "table")

CLASSIFY_NODES = 4096
CLASSIFY_TOL = 1e-12

_gl_x, _gl_w = np.polynomial.legendre.leggauss(8)
_GL_NODES = 0.5 * (_gl_x + 1.0)
_GL_WEIGHTS = 0.5 * _gl_w


class VorticityError(ValueError):
    """Invalid vorticity specification or evaluation outside [0, 1]."""


@dataclass(frozen=True)
class VorticityClass:
    """Class tag ("I", "II", "III" or "unclassifiable") with its witness data."""

    tag: str
    argmax: float
    omega_max: float
    omega0: float
    omega1: float

    def as_dict(self) -> dict[str, Any]:
        return {
            "tag": self.tag,
            "argmax": self.argmax,
            "Omega_max": self.omega_max,
            "omega0": self.omega0,
            "omega1": self.omega1,
        }


def _check_domain(p):
    arr = np.asarray(p, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise VorticityError("vorticity is only defined for p in [0, 1]")
    return arr


@dataclass(frozen=True)
class VorticityFn:
    """Immutable vorticity function omega(p), p in [0, 1].

    Use :func:`make_vorticity` (or the ``from_*`` helpers) rather than the
    constructor so that inputs are validated.
    """

    kind: str
    coeffs: tuple[float, ...] = ()
    samples: tuple[tuple[float, float], ...] = ()
    _poly: Any = field(default=None, repr=False, compare=False)
    _interp: Any = field(default=None, repr=False, compare=False)

    # -- evaluation -------------------------------------------------------
    def __call__(self, p):
        arr = _check_domain(p)
        if self._poly is not None:
            out = self._poly(arr)
        else:
            out = self._interp(arr)
        return float(out) if np.ndim(out) == 0 else np.asarray(out, dtype=float)

    def primitive(self, p):
        """Omega(p) by exact antiderivative."""
        arr = _check_domain(p)
        out = self._antideriv(arr)
        return float(out) if np.ndim(out) == 0 else np.asarray(out, dtype=float)

    @cached_property
    def _antideriv(self):
        if self._poly is not None:
            return self._poly.integ(lbnd=0.0)
        return self._interp.antiderivative()

    @cached_property
    def omega_at_1(self) -> float:
        """Omega(1); identical to ``primitive(1.0)``."""
        return self.primitive(1.0)

    @property
    def is_zero(self) -> bool:
        if self._poly is not None:
            return bool(np.all(self._poly.coef == 0.0))
        return all(w == 0.0 for _, w in self.samples)

    # -- maximum of the primitive ------------------------------------------
    @cached_property
    def critical_points(self) -> np.ndarray:
        """Endpoints plus the zeros of omega inside (0, 1), sorted."""
        pts = [0.0, 1.0]
        if not self.is_zero:
            if self._poly is not None:
                if self._poly.degree() > 0:
                    for z in self._poly.roots():
                        if abs(z.imag) < 1e-12 and 0.0 < z.real < 1.0:
                            pts.append(float(z.real))
            else:
                for z in np.atleast_1d(self._interp.roots(extrapolate=False)):
                    if 0.0 < z < 1.0:
                        pts.append(float(z))
        return np.unique(np.array(pts))

    @cached_property
    def argmax_primitive(self) -> float:
        """Location of max Omega on [0, 1] (smallest one on ties)."""
        pts = self.critical_points
        vals = self.primitive(pts)
        return float(pts[int(np.argmax(vals))])

    @cached_property
    def max_primitive(self) -> float:
        return max(0.0, float(np.max(self.primitive(self.critical_points))))

    @cached_property
    def maximisers(self) -> tuple[float, ...]:
        """All critical points where Omega attains its maximum."""
        pts = self.critical_points
        vals = self.primitive(pts)
        tol = 1e-14 * max(1.0, abs(self.max_primitive))
        return tuple(float(x) for x in pts[vals >= np.max(vals) - tol])

    def gap(self, p):
        """max Omega - Omega(p), clipped at zero (never negative)."""
        return self.gap_at_offset(np.asarray(p, dtype=float) - self.argmax_primitive)

    def gap_at_offset(self, delta, anchor: float | None = None):
        """max Omega - Omega(anchor + delta), accurate for small offsets.

        ``anchor`` must be a maximiser of Omega (default: the first one).  For
        |delta| < 1e-3 the difference is integrated directly as
        -delta * mean(omega) over [anchor, anchor + delta] by Gauss-Legendre.
        """
        delta = np.asarray(delta, dtype=float)
        pm = self.argmax_primitive if anchor is None else anchor
        p = np.clip(pm + delta, 0.0, 1.0)
        far = self.max_primitive - self.primitive(p)
        d = np.clip(delta, -pm, 1.0 - pm)
        pts = np.clip(pm + d[..., None] * _GL_NODES, 0.0, 1.0)
        near = -d * (self(pts) @ _GL_WEIGHTS)
        return np.maximum(np.where(np.abs(delta) < 1e-3, near, far), 0.0)

    # -- serialization ------------------------------------------------------
    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": self.kind}
        if self.kind == "table":
            out["samples"] = [list(s) for s in self.samples]
        else:
            out["coeffs"] = list(self.coeffs)
        return out

    def label(self) -> str:
        if self.kind == "table":
            return f"table[{len(self.samples)}]"
        return f"{self.kind}:" + ",".join(f"{c:g}" for c in self.coeffs)


def _finite_list(values: Sequence[float], what: str) -> tuple[float, ...]:
    try:
        out = tuple(float(v) for v in values)
    except (TypeError, ValueError) as exc:
        raise VorticityError(f"{what} must be numbers") from exc
    if not out:
        raise VorticityError(f"{what} must not be empty")
    if not all(math.isfinite(v) for v in out):
        raise VorticityError(f"{what} must be finite")
    return out


def make_vorticity(kind: str, coeffs: Sequence[float] = (), samples=()) -> VorticityFn:
    """Build a validated :class:`VorticityFn`.

    Parameters
    ----------
    kind : {"constant", "affine", "poly", "table"}
    coeffs : sequence of float
        ``constant``: ``[v]``; ``affine``: ``[a, b]`` for ``a + b p``;
        ``poly``: ``[c0, c1, ...]`` in increasing powers.
    samples : sequence of (p, omega) pairs
        ``table`` only; at least two nodes, strictly increasing p, covering
        exactly [0, 1].
    """
    if kind == "const":
        kind = "constant"
    if kind not in KINDS:
        raise VorticityError(f"unknown vorticity kind {kind!r}")
    if kind == "table":
        rows = [tuple(r) for r in samples]
        if len(rows) < 2 or any(len(r) != 2 for r in rows):
            raise VorticityError("table needs at least two [p, omega] pairs")
        ps = np.array(_finite_list([r[0] for r in rows], "sample nodes"))
        ws = np.array(_finite_list([r[1] for r in rows], "sample values"))
        if np.any(np.diff(ps) <= 0.0):
            raise VorticityError("samples must be sorted by strictly increasing p")
        if ps[0] != 0.0 or ps[-1] != 1.0:
            raise VorticityError("samples must cover [0, 1] exactly")
        interp = PchipInterpolator(ps, ws, extrapolate=False)
        return VorticityFn(
            kind="table",
            samples=tuple((float(a), float(b)) for a, b in zip(ps, ws)),
            _interp=interp,
        )
    cs = _finite_list(coeffs, "coefficients")
    expected = {"constant": 1, "affine": 2}
    if kind in expected and len(cs) != expected[kind]:
        raise VorticityError(f"{kind} vorticity takes {expected[kind]} coefficient(s)")
    return VorticityFn(kind=kind, coeffs=cs, _poly=Polynomial(np.array(cs)))


def constant(value: float) -> VorticityFn:
    return make_vorticity("constant", [value])


def affine(a: float, b: float) -> VorticityFn:
    return make_vorticity("affine", [a, b])


def from_dict(doc: dict[str, Any]) -> VorticityFn:
    """Inverse of :meth:`VorticityFn.to_dict` (the JSON document format)."""
    if not isinstance(doc, dict) or "kind" not in doc:
        raise VorticityError("vorticity document needs a 'kind' key")
    unknown = set(doc) - {"kind", "coeffs", "samples"}
    if unknown:
        raise VorticityError(f"unknown keys in vorticity document: {sorted(unknown)}")
    return make_vorticity(doc["kind"], doc.get("coeffs", ()), doc.get("samples", ()))


def from_json(text: str) -> VorticityFn:
    return from_dict(json.loads(text))


def parse_inline(spec: str) -> VorticityFn:
    """Parse ``const:<v>``, ``affine:<a>,<b>``, ``poly:<c0>,...`` or ``file:<path>``."""
    kind, sep, rest = spec.partition(":")
    if not sep:
        raise VorticityError(f"cannot parse vorticity spec {spec!r}")
    if kind == "file":
        return from_json(Path(rest).read_text())
    try:
        values = [float(v) for v in rest.split(",") if v.strip()]
    except ValueError as exc:
        raise VorticityError(f"cannot parse vorticity spec {spec!r}") from exc
    return make_vorticity(kind, values)


def primitive(omega: VorticityFn, p):
    return omega.primitive(p)


def classify(omega: VorticityFn, nodes: int = CLASSIFY_NODES, tol: float = CLASSIFY_TOL) -> VorticityClass:
    """Sort omega into class I, II or III (or report ``unclassifiable``).

    I   : max Omega attained at an interior point, or at an endpoint where
          omega vanishes;
    II  : Omega < 0 on (0, 1] and omega(0) != 0;
    III : Omega(p) < Omega(1) on [0, 1) and omega(1) != 0.

    The strict inequalities are tested on a dense grid joined with the exact
    critical points of Omega, with tolerance ``tol``.
    """
    grid = np.union1d(np.linspace(0.0, 1.0, nodes), omega.critical_points)
    big = omega.primitive(grid)
    w0, w1 = omega(0.0), omega(1.0)
    top = float(np.max(big))
    at_max = grid[big >= top - tol]
    interior_max = bool(np.any((at_max > 0.0) & (at_max < 1.0)))
    endpoint_zero = (at_max[0] == 0.0 and abs(w0) <= tol) or (
        at_max[-1] == 1.0 and abs(w1) <= tol
    )
    argmax = float(at_max[0])
    if interior_max or endpoint_zero:
        tag = "I"
    elif np.all(big[1:] < -tol) and abs(w0) > tol:
        tag = "II"
    elif np.all(big[:-1] < big[-1] - tol) and abs(w1) > tol:
        tag = "III"
        argmax = 1.0
    else:
        tag = "unclassifiable"
    return VorticityClass(tag=tag, argmax=argmax, omega_max=top, omega0=w0, omega1=w1)
