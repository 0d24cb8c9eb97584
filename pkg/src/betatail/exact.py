"""Exact finite-N eigenvalue densities and the normalisation prefactors.

Densities are returned in raw (unscaled) coordinates:

* Gaussian, beta=2: weight ``exp(-x^2)``;
* Gaussian, beta=1: weight ``exp(-x^2/2)``, N even;
* Laguerre, beta=2: weight ``x^a exp(-x)``.

Every density is assembled in log-scaled arithmetic so that points deep in the
tail (``|x| ~ sqrt(2N) * 1.8`` at N=30 and beyond) neither overflow nor
underflow.
"""

from __future__ import annotations

import math

import numpy as np

from betatail.core import DomainError, EnsembleSpec, Kind, LogValue, Sign, density_scale
from betatail.specfun import hermite_scaled, integrate_adaptive, laguerre_scaled, log_gamma

_LOG_SQRT_PI = 0.5 * math.log(math.pi)


def _diff_of_products(ma, la, mb, lb, mc, lc, md, ld):
    """Return ``(sign, log|.|)`` of ``A*B - C*D`` for log-scaled factors."""
    l1 = la + lb
    l2 = lc + ld
    top = np.maximum(l1, l2)
    val = ma * mb * np.exp(l1 - top) - mc * md * np.exp(l2 - top)
    with np.errstate(divide="ignore"):
        return np.sign(val), np.log(np.abs(val)) + top


def _as_logvalue(sign, log_abs) -> LogValue:
    sign = float(sign)
    if sign == 0.0 or not np.isfinite(log_abs):
        return LogValue.zero()
    return LogValue(Sign.POS if sign > 0 else Sign.NEG, float(log_abs))


def gauss_density_beta2_log(n: int, x):
    """Vectorised ``(sign, log rho)`` for the beta=2 Gaussian density."""
    if n < 1:
        raise DomainError("n must be >= 1")
    x = np.asarray(x, dtype=float)
    # H_{N-1}, H_{N-2} on a shared scale, then H_N by one more step.
    h1, h2, ls = hermite_scaled(n - 1, x)
    h0 = 2.0 * x * h1 - 2.0 * (n - 1) * h2
    # H_N' H_{N-1} - H_{N-1}' H_N = 2N H_{N-1}^2 - 2(N-1) H_{N-2} H_N
    val = 2.0 * n * h1 * h1 - 2.0 * (n - 1) * h2 * h0
    with np.errstate(divide="ignore"):
        log_val = np.log(np.abs(val)) + 2.0 * ls
    log_rho = -n * math.log(2.0) - x * x - _LOG_SQRT_PI - log_gamma(n) + log_val
    return np.sign(val), log_rho


def gauss_density_beta2(n: int, x: float) -> LogValue:
    sign, log_rho = gauss_density_beta2_log(n, float(x))
    return _as_logvalue(sign, log_rho)


def _hermite_gauss_primitive(deg: int, xs: np.ndarray, tol: float = 1e-14) -> np.ndarray:
    """``int_0^x H_deg(t) exp(-t^2/2) dt`` for each x (deg even, so the result is odd in x)."""
    def integrand(t):
        h, _, ls = hermite_scaled(deg, t)
        return h * np.exp(ls - 0.5 * t * t)

    # Cramer: |H_n(t)| e^{-t^2/2} <= 1.09 sqrt(2^n n!), so make tol relative to that
    atol = tol * math.exp(0.5 * (deg * math.log(2.0) + log_gamma(deg + 1)))
    ax = np.abs(xs)
    order = np.argsort(ax)
    out = np.empty_like(ax)
    acc = 0.0
    prev = 0.0
    for idx in order:
        hi = ax[idx]
        if hi > prev:
            piece, _ = integrate_adaptive(integrand, prev, hi, atol, rel_tol=tol)
            acc += piece
            prev = hi
        out[idx] = acc
    return np.sign(xs) * out


def gauss_density_beta1_log(n: int, x):
    """Vectorised ``(sign, log rho)`` for the beta=1 Gaussian density, N even."""
    if n < 2 or n % 2:
        raise DomainError(f"the beta=1 closed form needs N even and >= 2, got N={n}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    s1, l1 = gauss_density_beta2_log(n - 1, x)
    # second term: e^{-x^2/2} H_{N-1}(x) I(x) / (sqrt(pi) 2^{N-1} (N-2)!),
    # I(x) = (1/2) int sgn(x-t) H_{N-2}(t) e^{-t^2/2} dt = int_0^x H_{N-2} e^{-t^2/2} dt
    integral = _hermite_gauss_primitive(n - 2, x)
    h, _, ls = hermite_scaled(n - 1, x)
    prod = h * integral
    with np.errstate(divide="ignore"):
        l2 = (np.log(np.abs(prod)) + ls - 0.5 * x * x - _LOG_SQRT_PI
              - (n - 1) * math.log(2.0) - log_gamma(n - 1))
    s2 = np.sign(prod)
    top = np.maximum(l1, l2)
    top = np.where(np.isfinite(top), top, 0.0)
    val = s1 * np.exp(l1 - top) + s2 * np.exp(l2 - top)
    with np.errstate(divide="ignore"):
        return np.sign(val), np.log(np.abs(val)) + top


def gauss_density_beta1(n: int, x: float) -> LogValue:
    sign, log_rho = gauss_density_beta1_log(n, float(x))
    return _as_logvalue(sign[0], log_rho[0])


def laguerre_density_beta2_log(n: int, a: float, x):
    """Vectorised ``(sign, log rho)`` for the beta=2 Laguerre density."""
    if n < 1:
        raise DomainError("n must be >= 1")
    if not a > -1:
        raise DomainError(f"laguerre exponent must exceed -1, got {a}")
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("the Laguerre density is defined for x > 0")
    ln, lnm1, ls = laguerre_scaled(n, a, x)
    # derivatives: d/dx L_k^a = -L_{k-1}^{a+1}
    dn, dnm1, dls = laguerre_scaled(n - 1, a + 1.0, x)
    if n == 1:
        dnm1 = np.zeros_like(x)
    # L_N dL_{N-1} - L_{N-1} dL_N = L_{N-1} L_{N-1}^{a+1} - L_N L_{N-2}^{a+1}
    sign, log_val = _diff_of_products(lnm1, ls, dn, dls, ln, ls, dnm1, dls)
    log_rho = (log_gamma(n + 1) - log_gamma(n + a) + a * np.log(x) - x + log_val)
    return sign, log_rho


def laguerre_density_beta2(n: int, a: float, x: float) -> LogValue:
    if not x > 0:
        raise DomainError("the Laguerre density is defined for x > 0")
    sign, log_rho = laguerre_density_beta2_log(n, a, float(x))
    return _as_logvalue(sign, log_rho)


def exact_density_log(spec: EnsembleSpec, x):
    """Dispatch to the closed form matching ``spec`` (raw coordinates)."""
    if spec.kind is Kind.GAUSSIAN:
        if spec.beta == 2:
            return gauss_density_beta2_log(spec.n, x)
        if spec.beta == 1:
            return gauss_density_beta1_log(spec.n, x)
    elif spec.beta == 2:
        return laguerre_density_beta2_log(spec.n, spec.a, x)
    raise DomainError(f"no exact density for {spec.kind.value} beta={spec.beta}")


def exact_density(spec: EnsembleSpec, x: float) -> LogValue:
    sign, log_rho = exact_density_log(spec, np.atleast_1d(float(x)))
    return _as_logvalue(np.ravel(sign)[0], np.ravel(log_rho)[0])


def scaled_exact_density(spec: EnsembleSpec, s: float) -> LogValue:
    """``c rho_N(c s)`` with ``c = sqrt(2N)`` (Gaussian) or ``4N`` (Laguerre)."""
    c = density_scale(spec)
    return exact_density(spec, c * s).scale(math.log(c))


def prefactor_A(spec: EnsembleSpec) -> LogValue:
    """Normalisation ratio linking the (N+1)-density to the N-point beta moment."""
    beta, n, m, a = spec.beta, spec.n, spec.m_scale, spec.a
    lg_b = log_gamma(1.0 + beta / 2.0)
    if spec.kind is Kind.GAUSSIAN:
        log_a = (math.log(n + 1) - 0.5 * math.log(2.0 * math.pi)
                 + 0.5 * (n * beta + 1.0) * math.log(2.0 * m * beta)
                 + lg_b - log_gamma(1.0 + (n + 1) * beta / 2.0))
    else:
        log_a = (math.log(n + 1)
                 + (n * beta + 1.0 + a * beta / 2.0) * math.log(2.0 * m * beta)
                 + lg_b - log_gamma(1.0 + (n + 1) * beta / 2.0)
                 - log_gamma(a * beta / 2.0 + 1.0 + n * beta / 2.0))
    return LogValue.from_log(log_a)


def stirling_A(spec: EnsembleSpec) -> LogValue:
    """Large-N form of :func:`prefactor_A` (requires ``M = N + 1``)."""
    spec.require_tail_scaling()
    beta, n, a = spec.beta, spec.n, spec.a
    common = (math.log(n / math.pi) - 0.5 * beta * math.log(n * beta)
              + log_gamma(1.0 + beta / 2.0))
    if spec.kind is Kind.GAUSSIAN:
        log_a = common + (n + 0.5) * beta * math.log(2.0) + 0.5 * (n + 1) * beta
    else:
        log_a = (common + (2 * n * beta + 1.0 + beta / 2.0 + a * beta) * math.log(2.0)
                 + (n + 1) * beta)
    return LogValue.from_log(log_a)
