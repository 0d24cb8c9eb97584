"""Numerical kernel: orthogonal polynomials, gamma, the 3F2 function G, quadrature."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from betatail.core import ConvergenceError, DomainError, LogValue, Sign

# Rescale recurrences once magnitudes leave [_TINY, _HUGE].
_HUGE = 1e100
_TINY = 1e-100


@dataclass(frozen=True)
class PolyEval:
    value: LogValue
    derivative: LogValue


def _to_logvalue(mantissa: float, log_scale: float) -> LogValue:
    if mantissa == 0.0:
        return LogValue.zero()
    return LogValue(Sign.POS if mantissa > 0 else Sign.NEG, math.log(abs(mantissa)) + log_scale)


def _rescale(p_prev, p_cur, log_scale):
    m = np.maximum(np.abs(p_prev), np.abs(p_cur))
    bad = (m > _HUGE) | ((m < _TINY) & (m > 0))
    if np.any(bad):
        f = np.where(bad, m, 1.0)
        p_prev = p_prev / f
        p_cur = p_cur / f
        log_scale = log_scale + np.log(f)
    return p_prev, p_cur, log_scale


def hermite_scaled(n: int, x):
    """Vectorised physicists' Hermite recurrence.

    Returns ``(h_n, h_nm1, log_scale)`` with ``H_n(x) = h_n * exp(log_scale)``
    and ``H_{n-1}(x) = h_nm1 * exp(log_scale)``.  For ``n == 0`` the second
    entry is zero.
    """
    if n < 0:
        raise DomainError("hermite degree must be nonnegative")
    x = np.asarray(x, dtype=float)
    log_scale = np.zeros_like(x)
    p_prev = np.zeros_like(x)
    p_cur = np.ones_like(x)
    for k in range(n):
        p_prev, p_cur = p_cur, 2.0 * x * p_cur - 2.0 * k * p_prev
        p_prev, p_cur, log_scale = _rescale(p_prev, p_cur, log_scale)
    return p_cur, p_prev, log_scale


def hermite(n: int, x: float) -> PolyEval:
    """``H_n(x)`` and ``H_n'(x) = 2n H_{n-1}(x)`` in log-scaled form."""
    h_n, h_nm1, log_scale = hermite_scaled(n, float(x))
    value = _to_logvalue(float(h_n), float(log_scale))
    if n == 0:
        return PolyEval(value, LogValue.zero())
    deriv = _to_logvalue(float(h_nm1), float(log_scale)).scale(math.log(2.0 * n))
    return PolyEval(value, deriv)


def laguerre_scaled(n: int, a: float, x):
    """Vectorised associated Laguerre recurrence, same conventions as :func:`hermite_scaled`."""
    if n < 0:
        raise DomainError("laguerre degree must be nonnegative")
    x = np.asarray(x, dtype=float)
    log_scale = np.zeros_like(x)
    p_prev = np.zeros_like(x)
    p_cur = np.ones_like(x)
    for k in range(n):
        # (k+1) L_{k+1} = (2k+1+a-x) L_k - (k+a) L_{k-1}
        nxt = ((2 * k + 1 + a - x) * p_cur - (k + a) * p_prev) / (k + 1)
        p_prev, p_cur = p_cur, nxt
        p_prev, p_cur, log_scale = _rescale(p_prev, p_cur, log_scale)
    return p_cur, p_prev, log_scale


def laguerre(n: int, a: float, x: float) -> PolyEval:
    """``L_n^a(x)`` and its x-derivative, using ``d/dx L_n^a = -L_{n-1}^{a+1}``."""
    if not a > -1:
        raise DomainError(f"laguerre parameter must exceed -1, got {a}")
    l_n, _, log_scale = laguerre_scaled(n, a, float(x))
    value = _to_logvalue(float(l_n), float(log_scale))
    if n == 0:
        return PolyEval(value, LogValue.zero())
    d_n, _, d_scale = laguerre_scaled(n - 1, a + 1.0, float(x))
    return PolyEval(value, -_to_logvalue(float(d_n), float(d_scale)))


def log_gamma(x: float) -> float:
    if not x > 0:
        raise DomainError(f"log_gamma requires x > 0, got {x}")
    return math.lgamma(x)


_G_CAP = 10_000_000
_G_BLOCK = 100_000


def hyp_G(z: float, rtol: float = 1e-15) -> float:
    """``3F2(1, 1, 3/2; 2, 3; z)`` by direct summation of its power series.

    Consecutive terms have ratio ``(k+1)(k+3/2) z / ((k+2)(k+3))``.  Summation
    stops once a term drops below ``rtol`` times the partial sum.
    """
    z = float(z)
    if abs(z) > 1.0:
        raise DomainError(f"hyp_G series needs |z| <= 1, got {z}")
    if z == 0.0:
        return 1.0
    total = 0.0
    term = 1.0
    k0 = 0
    while k0 < _G_CAP:
        k = np.arange(k0, k0 + _G_BLOCK, dtype=float)
        ratios = (k + 1.0) * (k + 1.5) * z / ((k + 2.0) * (k + 3.0))
        terms = term * np.concatenate(([1.0], np.cumprod(ratios[:-1])))
        partial = total + np.cumsum(terms)
        small = np.nonzero(np.abs(terms) < rtol * np.abs(partial))[0]
        if small.size:
            return float(partial[small[0]])
        total = float(partial[-1])
        term = float(terms[-1] * ratios[-1])
        k0 += _G_BLOCK
    raise ConvergenceError(f"hyp_G({z}) did not converge within {_G_CAP} terms (partial {total!r})")


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    order: int

    def integrate(self, f: Callable, lo: float = -1.0, hi: float = 1.0) -> float:
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        return float(half * np.dot(self.weights, f(mid + half * self.nodes)))


@lru_cache(maxsize=64)
def gauss_legendre(order: int) -> QuadratureRule:
    if order < 1:
        raise DomainError("quadrature order must be >= 1")
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(nodes, weights, order)


_PANEL_ORDER = 15


def _panel(f, a: float, b: float, rule: QuadratureRule, bounds=None):
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    t = mid + half * rule.nodes
    if bounds is None:
        vals = f(t)
    else:
        lo, hi = bounds
        vals = f(t, (a - lo) + half * (1.0 + rule.nodes), (hi - b) + half * (1.0 - rule.nodes))
    vals = np.asarray(vals, dtype=float)
    return half * float(np.dot(rule.weights, vals)), half * float(np.dot(rule.weights, np.abs(vals)))


def _interval(f, a, b, depth, rule, bounds=None):
    whole, _ = _panel(f, a, b, rule, bounds)
    m = 0.5 * (a + b)
    left, labs = _panel(f, a, m, rule, bounds)
    right, rabs = _panel(f, m, b, rule, bounds)
    est = left + right
    err = abs(est - whole)
    return (-err, a, b, depth, est, err, labs + rabs)


def integrate_adaptive(f: Callable, lo: float, hi: float, tol: float = 1e-12, *,
                       weight: str | None = None, rel_tol: float = 0.0,
                       points=(), max_depth: int = 60, max_intervals: int = 20000,
                       vectorized: bool = True,
                       endpoint_distances: bool = False) -> tuple[float, float]:
    """Globally adaptive Gauss-Legendre integration of ``f`` over ``[lo, hi]``.

    Each panel is compared against its two halves (15-point rules); the
    panel with the largest discrepancy is bisected until the summed
    discrepancy is below ``max(tol, rel_tol * |value|)``.

    ``weight="sqrt"`` / ``"invsqrt"`` multiplies the integrand by
    ``(1 - u^2)^(+-1/2)`` where ``u`` maps ``[lo, hi]`` onto ``[-1, 1]``; the
    singular weight is removed exactly by the substitution ``u = cos(theta)``.

    ``f`` is called with numpy arrays of nodes unless ``vectorized=False``.
    With ``endpoint_distances=True`` it is called as ``f(t, t - lo, hi - t)``
    where both distances are computed without cancellation, so integrands
    singular at an endpoint (``log(hi - t)``) can be written exactly.

    Returns ``(value, error_estimate)``.
    """
    lo = float(lo)
    hi = float(hi)
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise DomainError("integrate_adaptive needs finite limits")
    if lo == hi:
        return 0.0, 0.0
    if hi < lo:
        value, err = integrate_adaptive(f, hi, lo, tol, weight=weight, rel_tol=rel_tol,
                                        points=points, max_depth=max_depth,
                                        max_intervals=max_intervals, vectorized=vectorized,
                                        endpoint_distances=endpoint_distances)
        return -value, err

    func = f if vectorized else np.vectorize(f, otypes=[float])
    if weight is not None:
        c, h = 0.5 * (lo + hi), 0.5 * (hi - lo)

        def at(theta, _f=func):
            if not endpoint_distances:
                return _f(c + h * np.cos(theta))
            d_hi = 2.0 * h * np.sin(0.5 * theta) ** 2
            d_lo = 2.0 * h * np.cos(0.5 * theta) ** 2
            t = np.where(theta < 0.5 * math.pi, hi - d_hi, lo + d_lo)
            return _f(t, d_lo, d_hi)

        if weight == "sqrt":
            def g(theta):
                st = np.sin(theta)
                return at(theta) * st * st * h
        elif weight == "invsqrt":
            def g(theta):
                return at(theta) * h
        else:
            raise DomainError(f"unknown weight {weight!r}")
        # Breakpoints in t map to theta = arccos((t - c) / h).
        pts = sorted(math.acos(min(1.0, max(-1.0, (p - c) / h))) for p in points if lo < p < hi)
        return integrate_adaptive(g, 0.0, math.pi, tol, rel_tol=rel_tol, points=pts,
                                  max_depth=max_depth, max_intervals=max_intervals)

    rule = gauss_legendre(_PANEL_ORDER)
    edges = [lo] + sorted(p for p in points if lo < p < hi) + [hi]
    bounds = (lo, hi) if endpoint_distances else None
    heap = [_interval(func, a, b, 0, rule, bounds) for a, b in zip(edges[:-1], edges[1:])]
    heapq.heapify(heap)
    total = sum(item[4] for item in heap)
    err = sum(item[5] for item in heap)
    eps = np.finfo(float).eps
    while err > max(tol, rel_tol * abs(total)):
        if len(heap) > max_intervals:
            raise ConvergenceError(f"integrate_adaptive exceeded {max_intervals} intervals "
                                   f"(error estimate {err:.3g})")
        worst = heapq.heappop(heap)
        _, a, b, depth, est, e, _ = worst
        if depth >= max_depth:
            raise ConvergenceError(f"integrate_adaptive hit depth limit on [{a}, {b}] "
                                   f"(error estimate {err:.3g})")
        m = 0.5 * (a + b)
        kids = [_interval(func, a, m, depth + 1, rule, bounds),
                _interval(func, m, b, depth + 1, rule, bounds)]
        for kid in kids:
            heapq.heappush(heap, kid)
        total += kids[0][4] + kids[1][4] - est
        err += kids[0][5] + kids[1][5] - e
        # Guard against drift from the running updates.
        if len(heap) % 256 == 0:
            total = sum(item[4] for item in heap)
            err = sum(item[5] for item in heap)
    total = math.fsum(item[4] for item in heap)
    err = math.fsum(item[5] for item in heap)
    roundoff = 50.0 * eps * math.fsum(item[6] for item in heap)
    return total, err + roundoff
