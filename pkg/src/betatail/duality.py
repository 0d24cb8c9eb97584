"""Duality formulas: beta moments of characteristic polynomials as
beta-dimensional integrals, evaluated deterministically.

Gaussian
    ``<prod_j (x - y_j)^beta>`` over ``ME_{beta,N}(exp(-beta M y^2))`` equals
    ``<prod_{j<=beta} (x - i y_j)^N>`` over ``ME_{4/beta,beta}(exp(-2 M y^2))``.
    For ``beta = 2`` the right side is a 2x2 moment determinant (Andreief);
    for ``beta = 4`` it is a 4x4 Pfaffian (de Bruijn) whose inner primitives
    are available in closed form.  Both reduce the multiple integral to
    one-dimensional Gauss-Hermite sums, checked by order doubling.

Laguerre (beta = 2)
    The m-fold contour integral with a squared Vandermonde is likewise an
    ``m x m`` determinant of single contour integrals, each computed with the
    periodic trapezoidal rule on ``|z| = r``.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc, roots_genlaguerre, roots_hermite

from betatail.core import ConvergenceError, DomainError, LogValue
from betatail.specfun import log_gamma

GAUSS_BETA4_MAX_N = 8
LHS_MAX_N = 4


def _hermite_rule(order: int, c: float):
    """Nodes/weights for ``int g(y) exp(-c y^2) dy``."""
    u, w = roots_hermite(order)
    return u / math.sqrt(c), w / math.sqrt(c)


def _log_charpoly_imag(x: float, y: np.ndarray, n: int) -> np.ndarray:
    """``N log(x - i y)`` with a continuous argument (x > 0 keeps it off the cut)."""
    return n * (0.5 * np.log(x * x + y * y) + 1j * np.arctan2(-y, x))


def _andreief_rhs(x: float, n: int, m: int, order: int):
    """Scaled beta=2 right side: ``(mantissa, log_scale, roundoff)``."""
    c = 2.0 * m
    y, w = _hermite_rule(order, c)
    lg = _log_charpoly_imag(x, y, n)
    shift = float(np.max(lg.real))
    f = w * np.exp(lg - shift)
    mom = [np.sum(f * y ** k) for k in range(3)]
    size = [np.sum(np.abs(f * y ** k)) for k in range(3)]
    norm = [np.sum(w * y ** k) for k in range(3)]
    num = mom[2] * mom[0] - mom[1] ** 2
    den = norm[2] * norm[0] - norm[1] ** 2
    # the integrand oscillates: sums of |terms| bound the rounding error
    roundoff = 64 * np.finfo(float).eps * (size[2] * size[0] + size[1] ** 2) / abs(num)
    return num / den, 2.0 * shift, roundoff


def _gauss_primitives(v: np.ndarray, c: float, kmax: int) -> list[np.ndarray]:
    """``P_k(v) = int_{-inf}^v u^k exp(-c u^2) du`` for ``k = 0..kmax``."""
    e = np.exp(-c * v * v)
    out = [0.5 * math.sqrt(math.pi / c) * erfc(-math.sqrt(c) * v), -e / (2.0 * c)]
    for k in range(2, kmax + 1):
        out.append(-v ** (k - 1) * e / (2.0 * c) + (k - 1) / (2.0 * c) * out[k - 2])
    return out[:kmax + 1]


def _gauss_moment(k: int, c: float) -> float:
    if k % 2:
        return 0.0
    return math.exp(log_gamma(0.5 * (k + 1))) / c ** (0.5 * (k + 1))


def _pfaffian4(a: np.ndarray):
    return a[0, 1] * a[2, 3] - a[0, 2] * a[1, 3] + a[0, 3] * a[1, 2]


def _skew_matrix(x: float, n: int, c: float, order: int) -> np.ndarray:
    """``A_jk = int int sgn(v - u) psi_j(u) psi_k(v)``, ``psi_j = u^j (x - iu)^n e^{-c u^2}``."""
    coef = np.array([math.comb(n, k) * x ** (n - k) * (-1j) ** k for k in range(n + 1)])
    v, w = _hermite_rule(order, c)
    prim = _gauss_primitives(v, c, n + 3)
    poly_v = [sum(coef[k] * v ** (k + j) for k in range(n + 1)) for j in range(4)]
    a = np.zeros((4, 4), dtype=complex)
    for j in range(4):
        phi = sum(coef[k] * prim[k + j] for k in range(n + 1))
        total = sum(coef[k] * _gauss_moment(k + j, c) for k in range(n + 1))
        inner = 2.0 * phi - total
        for k in range(j + 1, 4):
            a[j, k] = np.sum(w * poly_v[k] * inner)
            a[k, j] = -a[j, k]
    return a


def _pfaffian_rhs(x: float, n: int, m: int, order: int):
    c = 2.0 * m
    val = _pfaffian4(_skew_matrix(x, n, c, order)) / _pfaffian4(_skew_matrix(x, 0, c, order))
    return val, 0.0, 0.0


def _converged(fn, start: int, rtol: float, max_order: int):
    """Double the order until successive values agree to ``rtol`` (or to rounding)."""
    order = start
    prev, prev_scale, _ = fn(order)
    while True:
        order *= 2
        if order > max_order:
            raise ConvergenceError(f"quadrature did not settle below rtol={rtol:g} by order {max_order}")
        cur, scale, roundoff = fn(order)
        if roundoff > 1e-6:
            raise ConvergenceError(f"cancellation leaves relative precision {roundoff:.1e} only")
        if abs(cur - prev * math.exp(prev_scale - scale)) <= max(rtol, roundoff) * abs(cur):
            return cur, scale
        prev, prev_scale = cur, scale


def gauss_dual_rhs_scaled(x: float, n: int, m: int, beta: int, rtol: float = 1e-12):
    """Right side of the Gaussian duality as ``(mantissa, log_scale)``."""
    if beta not in (2, 4):
        raise DomainError(f"beta must be 2 or 4, got {beta}")
    if n < 0 or m < 1:
        raise DomainError("need n >= 0 and m >= 1")
    if not x > 0:
        raise DomainError("x must be positive")
    if n == 0:
        return 1.0 + 0j, 0.0
    if beta == 2:
        start = max(32, n // 2 + 16)
        return _converged(lambda q: _andreief_rhs(x, n, m, q), start, rtol, 1 << 14)
    if n > GAUSS_BETA4_MAX_N:
        raise DomainError(f"beta=4 path supports n <= {GAUSS_BETA4_MAX_N}")
    return _converged(lambda q: _pfaffian_rhs(x, n, m, q), 40, rtol, 5120)


def gauss_dual_rhs(x: float, n: int, m: int, beta: int) -> complex:
    """``<prod_{j<=beta} (x - i y_j)^n>`` over ``ME_{4/beta,beta}(exp(-2 m y^2))``."""
    mant, scale = gauss_dual_rhs_scaled(x, n, m, beta)
    return complex(mant) * math.exp(scale)


def gauss_moment_lhs(x: float, n: int, m: int, beta: int) -> float:
    """``<prod_j (x - y_j)^beta>`` over ``ME_{beta,N}(exp(-beta m y^2))``, tensor Gauss-Hermite.

    For even beta the integrand is a polynomial times the weight, so a rule
    of order ``beta*n/2 + 2`` per axis is exact.
    """
    if beta % 2 or beta <= 0:
        raise DomainError("brute-force left side needs even beta")
    if not 1 <= n <= LHS_MAX_N:
        raise DomainError(f"brute-force left side supports 1 <= n <= {LHS_MAX_N}")
    order = beta * n // 2 + 2
    y, w = _hermite_rule(order, beta * m)
    grids = np.meshgrid(*([y] * n), indexing="ij")
    wts = np.ones_like(grids[0])
    for g in np.meshgrid(*([w] * n), indexing="ij"):
        wts = wts * g
    vdm = np.ones_like(wts)
    for j, k in itertools.combinations(range(n), 2):
        vdm = vdm * (grids[k] - grids[j]) ** beta
    char = np.ones_like(wts)
    for g in grids:
        char = char * (x - g) ** beta
    return float(np.sum(wts * vdm * char) / np.sum(wts * vdm))


def gauss_dual_check(x: float, n: int, m: int, beta: int) -> tuple[float, float]:
    """Both sides of the Gaussian duality; raises if the right side is not real."""
    lhs = gauss_moment_lhs(x, n, m, beta)
    rhs = gauss_dual_rhs(x, n, m, beta)
    if abs(rhs.imag) > 1e-10 * abs(rhs):
        raise ConvergenceError(f"right side has imaginary part {rhs.imag!r}")
    return lhs, rhs.real


def morris_constant(alpha: float, b: float, gamma: float, m: int) -> float:
    if m < 0:
        raise DomainError("m must be nonnegative")
    log_v = 0.0
    for j in range(m):
        log_v += (log_gamma(1 + alpha + b + j * gamma) + log_gamma(1 + (j + 1) * gamma)
                  - log_gamma(1 + alpha + j * gamma) - log_gamma(1 + b + j * gamma)
                  - log_gamma(1 + gamma))
    return math.exp(log_v)


def _contour_moments(t: float, n: int, m_scale: int, a_hat: float, m: int, r: float, q: int):
    theta = 2.0 * math.pi * np.arange(q) / q
    z = r * np.exp(1j * theta)
    # log of e^{-4Mtz} z^{-N-1-(m-1)} (1+z)^{a_hat+N} times dz/(2 pi i) = z dtheta/(2 pi)
    logf = -4.0 * m_scale * t * z + (-n - m + 1) * np.log(z) + (a_hat + n) * np.log1p(z)
    f = np.exp(logf)
    return [np.mean(f * z ** p) for p in range(2 * m - 1)]


def laguerre_dual_rhs(t: float, n: int, m_scale: int, beta: int = 2, a: float = 0.0,
                      m: int | None = None, r: float = 0.5, rtol: float = 1e-9) -> float:
    """Contour-integral side of the Laguerre duality at ``beta = 2``.

    ``m`` is the moment order (defaults to ``beta``).  The m-fold integral
    with ``prod (z_k - z_j)^2`` is evaluated as ``m! det[mu_{j+k}]``; the
    overall sign ``(-1)^{m(m-1)/2}`` orients the Vandermonde so that the
    result equals the moment side.
    """
    if beta != 2:
        raise DomainError("Laguerre duality is implemented for beta = 2 only")
    if not 0.0 < r < 1.0:
        raise DomainError(f"contour radius must lie in (0, 1), got {r}")
    m = beta if m is None else int(m)
    if m < 1 or n < 0:
        raise DomainError("need m >= 1 and n >= 0")
    a_hat = a - 1.0 + 2.0 / beta

    def evaluate(q):
        mu = _contour_moments(t, n, m_scale, a_hat, m, r, q)
        mat = np.array([[mu[j + k] for k in range(m)] for j in range(m)])
        return np.linalg.det(mat)

    q = 64
    prev = evaluate(q)
    while True:
        q *= 2
        if q > 1 << 16:
            raise ConvergenceError("contour quadrature did not converge by 2^16 points")
        cur = evaluate(q)
        if abs(cur - prev) <= rtol * abs(cur):
            break
        prev = cur
    sign = -1.0 if (m * (m - 1) // 2) % 2 else 1.0
    val = sign * math.factorial(m) * cur / morris_constant(a_hat, n, 2.0 / beta, m)
    return float(val.real)


def laguerre_moment_lhs(t: float, n: int, m_scale: int, beta: int = 2, a: float = 0.0,
                        m: int | None = None) -> float:
    """Moment side of the Laguerre duality, normalisation ratio included."""
    m = beta if m is None else int(m)
    if not 1 <= n <= LHS_MAX_N:
        raise DomainError(f"brute-force left side supports 1 <= n <= {LHS_MAX_N}")
    alpha = 0.5 * beta * a
    order = (m + beta * (n - 1)) // 2 + 2
    u, w = roots_genlaguerre(order, alpha)
    xs = u / (2.0 * m_scale * beta)
    grids = np.meshgrid(*([xs] * n), indexing="ij")
    wts = np.ones_like(grids[0])
    for g in np.meshgrid(*([w] * n), indexing="ij"):
        wts = wts * g
    vdm = np.ones_like(wts)
    for j, k in itertools.combinations(range(n), 2):
        vdm = vdm * np.abs(grids[k] - grids[j]) ** beta
    prod = np.ones_like(wts)
    for g in grids:
        prod = prod * (g - t) ** m
    avg = np.sum(wts * vdm * prod) / np.sum(wts * vdm)
    return float(math.exp(laguerre_lhs_log_prefactor(n, m_scale, beta, a, m)) * avg)


def laguerre_lhs_log_prefactor(n: int, m_scale: int, beta: int = 2, a: float = 0.0,
                               m: int | None = None) -> float:
    """Log of the normalisation ratio times ``(4M)^{Nm}`` multiplying the moment."""
    m = beta if m is None else int(m)
    alpha = 0.5 * beta * a
    log_ratio = -n * m * math.log(2.0 / beta) + sum(
        log_gamma(alpha + 1 + j * beta / 2) - log_gamma(alpha + m + 1 + j * beta / 2) for j in range(n))
    return log_ratio + n * m * math.log(4.0 * m_scale)


def laguerre_dual_moment(t: float, n: int, m_scale: int, a: float = 0.0) -> float:
    """``<prod_j (x_j - t)^2>`` at beta=2 obtained from the contour side."""
    return laguerre_dual_rhs(t, n, m_scale, 2, a) * math.exp(-laguerre_lhs_log_prefactor(n, m_scale, 2, a))


@dataclass(frozen=True)
class SaddleData:
    """Stationary-point data of the duality integrands.

    Gaussian fields are set by :func:`saddle_data_gauss`, Laguerre fields by
    :func:`saddle_data_laguerre`; the others are ``None``.
    """

    y_minus: complex | None = None
    f_at_saddle: float | None = None
    alpha_x: float | None = None
    z_plus: float | None = None
    g_at_saddle: float | None = None
    gamma_t: float | None = None


def saddle_f(x: float, y: complex) -> complex:
    return -2.0 * y * y + cmath.log(x - 1j * y)


def saddle_g(t: float, z: complex) -> complex:
    return -4.0 * t * z - cmath.log(z) + cmath.log(1.0 + z)


def saddle_data_gauss(x: float) -> SaddleData:
    if not x > 1:
        raise DomainError(f"x must exceed 1, got {x}")
    r = math.sqrt((x - 1.0) * (x + 1.0))
    # y_- = -(i/2)(x - r): the saddle with negative second derivative
    y = -0.5j * (x - r)
    f = x / (x + r) - 0.5 + math.log(0.5 * (x + r))
    alpha = 8.0 * r / (x + r)
    return SaddleData(y_minus=y, f_at_saddle=f, alpha_x=alpha)


def saddle_data_laguerre(t: float) -> SaddleData:
    if not t > 1:
        raise DomainError(f"t must exceed 1, got {t}")
    q = math.sqrt(1.0 - 1.0 / t)
    z = 0.5 * (-1.0 + q)
    g = 2.0 * t * (1.0 - q) - 2.0 * math.log(math.sqrt(t) - math.sqrt(t - 1.0))
    return SaddleData(z_plus=z, g_at_saddle=g, gamma_t=16.0 * t * t * q)


def gauss_saddle_approx(x: float, n: int, beta: int) -> LogValue:
    """Leading saddle-point form of the Gaussian dual integral at ``M = N + 1``."""
    sd = saddle_data_gauss(x)
    r = math.sqrt((x - 1.0) * (x + 1.0))
    # -2 beta y_-^2 = beta (x - r)^2 / 2
    log_v = (0.5 * beta * (x - r) ** 2 + n * beta * sd.f_at_saddle
             + 0.5 * (3 * beta - 2) * math.log(4.0 / sd.alpha_x))
    return LogValue.from_log(log_v)


def gauss_saddle_ratio(x: float, n: int, beta: int = 2) -> float:
    """Dual integral (``M = N + 1``) over its saddle-point approximation."""
    mant, scale = gauss_dual_rhs_scaled(x, n, n + 1, beta)
    return float(mant.real) * math.exp(scale - gauss_saddle_approx(x, n, beta).log_abs)
