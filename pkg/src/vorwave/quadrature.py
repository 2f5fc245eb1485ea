"""Quadrature and bracketing helpers for endpoint-singular integrands.

Integrands built from ``(s**2 - 2 Omega(p)) ** (-k/2)`` blow up at the
maximiser ``p_m`` of Omega when ``s`` approaches ``s0``.  Around ``p_m`` the
substitution ``p = p_m +/- t**2`` removes the inverse-square-root singularity.
The thin layer of width ~ ``sqrt(s**2 - s0**2)`` in ``t`` that remains for
``s`` slightly above ``s0`` is resolved by Gauss-Legendre panels graded
geometrically toward ``t = 0``.

Integrands are passed as vectorised callables of the offset ``delta = p - p_m``
so that callers can evaluate them without cancellation near ``p_m``.
"""

from __future__ import annotations

from typing import Callable

import numpy as np
from scipy import optimize

from .errors import NumericalError

GL_ORDER = 16
GRADING_LEVELS = 52

_x, _w = np.polynomial.legendre.leggauss(GL_ORDER)
_X = 0.5 * (_x + 1.0)
_W = 0.5 * _w


class QuadratureError(NumericalError):
    """Quadrature produced a non-finite value."""


class BracketError(NumericalError):
    """No sign change could be bracketed."""


def _panels(ta: np.ndarray, tb: np.ndarray) -> tuple[list, list]:
    """Split t-segments into panels; segments starting near 0 are graded."""
    lo, hi = [], []
    for a, b in zip(ta, tb):
        if a > 0.5 * (b - a):
            lo.append(np.array([a]))
            hi.append(np.array([b]))
        else:
            # [a, b] with a tiny: geometric panels b 2^-k, down to a
            edges = b * 0.5 ** np.arange(GRADING_LEVELS + 1)
            edges = edges[edges > a]
            edges = np.append(edges, a)[::-1]
            lo.append(edges[:-1])
            hi.append(edges[1:])
    return lo, hi


def _side_cumulative(g: Callable, t_nodes: np.ndarray, sign: float) -> np.ndarray:
    """int from the anchor to anchor + sign t^2, at each t in ``t_nodes`` (sorted, t[0] = 0)."""
    if len(t_nodes) == 1:
        return np.zeros(1)
    lo, hi = _panels(t_nodes[:-1], t_nodes[1:])
    counts = [len(x) for x in lo]
    a = np.concatenate(lo)
    b = np.concatenate(hi)
    t = a[:, None] + (b - a)[:, None] * _X
    vals = 2.0 * t * g(sign * t * t)
    panel = (vals @ _W) * (b - a)
    seg = np.add.reduceat(panel, np.cumsum([0] + counts[:-1]))
    out = np.concatenate([[0.0], np.cumsum(seg)])
    if not np.all(np.isfinite(out)):
        raise QuadratureError("non-finite integrand value")
    return out


def cumulative_graded(g: Callable[[np.ndarray], np.ndarray], nodes, anchor: float) -> np.ndarray:
    """Integral of ``g(p - anchor)`` from ``nodes[0]`` to each node.

    ``nodes`` must be increasing and ``anchor`` must lie in
    ``[nodes[0], nodes[-1]]``.
    """
    nodes = np.asarray(nodes, dtype=float)
    if anchor < nodes[0] or anchor > nodes[-1]:
        raise ValueError("anchor must lie inside the node range")
    right = nodes >= anchor
    left = ~right
    # signed integral from the anchor to every node
    from_anchor = np.empty_like(nodes)
    if np.any(right):
        t = np.sqrt(nodes[right] - anchor)
        if t[0] > 0.0:
            from_anchor[right] = _side_cumulative(g, np.concatenate([[0.0], t]), 1.0)[1:]
        else:
            from_anchor[right] = _side_cumulative(g, t, 1.0)
    if np.any(left):
        t = np.sqrt(anchor - nodes[left])[::-1]
        cum = _side_cumulative(g, np.concatenate([[0.0], t]), -1.0)
        from_anchor[left] = -cum[1:][::-1]
    return from_anchor - from_anchor[0]


def integral_graded(g: Callable[[np.ndarray], np.ndarray], a: float, b: float, anchor: float) -> float:
    """Integral of ``g(p - anchor)`` over ``[a, b]`` with ``a <= anchor <= b``."""
    nodes = np.unique(np.array([a, anchor, b], dtype=float))
    return float(cumulative_graded(g, nodes, anchor)[-1])


def brent_root(f: Callable[[float], float], lo: float, hi: float, xtol: float = 1e-15) -> float:
    """Brent's method on a bracket already known to change sign."""
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if np.sign(flo) == np.sign(fhi):
        raise BracketError(
            f"no sign change on [{lo:.17g}, {hi:.17g}]: f = {flo:.6g}, {fhi:.6g}"
        )
    return optimize.brentq(f, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=500)


def grow_upper(f: Callable[[float], float], base: float, start: float, want_sign: float, max_doublings: int = 80) -> float:
    """Return ``x = base + start * 2**k`` with ``sign(f(x)) == want_sign``."""
    step = start
    for _ in range(max_doublings):
        x = base + step
        if np.sign(f(x)) == want_sign:
            return x
        step *= 2.0
    raise BracketError(f"could not grow a bracket above {base:.6g}")


def shrink_lower(f: Callable[[float], float], base: float, start: float, want_sign: float, max_halvings: int = 60) -> float:
    """Return ``x = base + start * 2**-k`` with ``sign(f(x)) == want_sign``."""
    step = start
    for _ in range(max_halvings):
        x = base + step
        if np.sign(f(x)) == want_sign:
            return x
        step *= 0.5
    raise BracketError(f"could not shrink a bracket toward {base:.6g}")
