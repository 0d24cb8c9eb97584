"""Large-N asymptotics: log-potential integrals, linear-statistic moments,
tail densities, rate functions and soft-edge forms.

Conventions
-----------
``s`` is always the bulk-normalised point.  Tail densities are in the
variable ``s``: the Gaussian form approximates ``sqrt(2N) rho(sqrt(2N) s)``
and the Laguerre form ``4N rho(4N s)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from betatail.core import DomainError, EnsembleSpec, Kind, LogValue, density_scale
from betatail.specfun import hyp_G, integrate_adaptive, log_gamma

TAIL_EPS = 1e-8
_LN2 = math.log(2.0)


def _root_pm1(s: float) -> float:
    """``sqrt(s^2 - 1)`` computed as ``sqrt(u (2 + u))`` with ``u = s - 1``."""
    u = s - 1.0
    return math.sqrt(u * (2.0 + u))


def _acosh(s: float) -> float:
    u = s - 1.0
    return math.log1p(u + math.sqrt(u * (2.0 + u)))


def _check_ge1(x: float, name: str = "x") -> None:
    if not x >= 1.0:
        raise DomainError(f"{name} must be >= 1, got {x}")


def _check_gt1(s: float, eps: float = 0.0) -> None:
    if not s > 1.0 + eps:
        raise DomainError(f"s must exceed 1 + {eps:g}, got {s}")


def log_int_semicircle(x: float) -> float:
    """``(2/pi) int_{-1}^{1} log|x - t| sqrt(1 - t^2) dt`` for ``x >= 1``."""
    _check_ge1(x)
    r = _root_pm1(x)
    # x^2 - x r = x / (x + r); -log(2(x - r)) = log((x + r)/2)
    return x / (x + r) + math.log(0.5 * (x + r)) - 0.5


def log_int_arcsine(x: float) -> float:
    """``(1/pi) int_{-1}^{1} log|x - t| (1 - t^2)^{-1/2} dt`` for ``x >= 1``."""
    _check_ge1(x)
    return math.log(0.5 * (x + _root_pm1(x)))



def nu_of(kind: Kind | str, s: float) -> float:
    """Geometric ratio of the Fourier coefficients of ``log|s - t|``."""
    _check_gt1(s)
    if Kind.parse(kind) is Kind.GAUSSIAN:
        return 1.0 / (s + _root_pm1(s))
    # 2s - 1 - 2 sqrt(s(s-1)) = (sqrt(s) - sqrt(s-1))^2
    return (1.0 / (math.sqrt(s) + math.sqrt(s - 1.0))) ** 2


def fourier_ak(kind: Kind | str, s: float, k: int) -> float:
    if k < 1:
        raise DomainError("k must be >= 1")
    return -2.0 * nu_of(kind, s) ** k / k


@dataclass(frozen=True)
class LinStatMoments:
    """Mean and variance of ``sum_j log|x - lambda_j|`` plus the ratio ``nu``."""

    mean: float
    variance: float
    nu: float


def _log_one_minus_nu2(kind: Kind, s: float) -> float:
    nu = nu_of(kind, s)
    return math.log1p(-nu * nu)


def linstat_moments(spec: EnsembleSpec, s: float) -> LinStatMoments:
    """Smooth-part mean and Gaussian-fluctuation variance of the log statistic.

    The Gaussian mean keeps the ``(N - M)`` term so any ``M`` is accepted.
    For the Laguerre case the same bookkeeping turns the ``a - 2`` coefficient
    (valid at ``M = N + 1``) into ``a + 2(N - M)``.
    """
    _check_gt1(s)
    beta, n, m = spec.beta, spec.n, spec.m_scale
    c = 1.0 / beta - 0.5
    if spec.kind is Kind.GAUSSIAN:
        arc = log_int_arcsine(s)
        mean = (m * log_int_semicircle(s)
                + c * (0.5 * math.log((s - 1.0) * (s + 1.0)) - arc)
                + (n - m) * arc)
    else:
        rs = math.sqrt(s)
        mean = (2.0 * m * log_int_semicircle(rs)
                + (spec.a + 2.0 * (n - m)) * log_int_arcsine(rs)
                - 0.5 * (2.0 * spec.a + 2.0 / beta - 1.0) * 0.5 * math.log(s)
                + c * 0.5 * math.log(s - 1.0))
    variance = -(2.0 / beta) * _log_one_minus_nu2(spec.kind, s)
    return LinStatMoments(mean, variance, nu_of(spec.kind, s))


def moment_asym(spec: EnsembleSpec, s: float) -> LogValue:
    """Large-N form of ``<prod_l |s - lambda_l|^beta>`` at ``M = N + 1``.

    Assembled as ``exp(beta mu + beta^2 sigma^2 / 2)``.
    """
    spec.require_tail_scaling()
    mom = linstat_moments(spec, s)
    beta = spec.beta
    return LogValue.from_log(beta * mom.mean + 0.5 * beta * beta * mom.variance)


def rate_psi(kind: Kind | str, s: float) -> float:
    """Large-deviation rate per unit ``N beta`` (closed form)."""
    _check_ge1(s, "s")
    if Kind.parse(kind) is Kind.GAUSSIAN:
        return s * _root_pm1(s) - _acosh(s)
    rs = math.sqrt(s)
    # acosh(sqrt(s)) = log(sqrt(s) + sqrt(s-1))
    u = s - 1.0
    acosh_rs = math.log1p(u / (rs + 1.0) + math.sqrt(u))
    return 2.0 * (math.sqrt(s * u) - acosh_rs)


def rate_psi_hypergeometric(kind: Kind | str, s: float) -> float:
    """The same rate written through ``G = 3F2(1, 1, 3/2; 2, 3; .)``."""
    _check_ge1(s, "s")
    if Kind.parse(kind) is Kind.GAUSSIAN:
        z = math.sqrt(2.0) * s
        return 0.5 * (z * z - 1.0) - math.log(z * math.sqrt(2.0)) + hyp_G(2.0 / (z * z)) / (4.0 * z * z)
    z = 4.0 * s
    # per unit N beta the Laguerre exponent is psi_+^L, matching 2(...) above
    return 0.5 * (z - 2.0) - math.log(z) + hyp_G(4.0 / z) / z


@dataclass(frozen=True)
class TailDensity:
    """A tail expansion split into exponent, algebraic factor and constant.

    ``total = exp(log_exponent + log_prefactor + log_constant)``.
    """

    log_exponent: float
    log_prefactor: float
    log_constant: float

    @property
    def log_total(self) -> float:
        return self.log_exponent + self.log_prefactor + self.log_constant

    @property
    def total(self) -> LogValue:
        return LogValue.from_log(self.log_total)

    def scale(self, log_factor: float) -> "TailDensity":
        return TailDensity(self.log_exponent, self.log_prefactor, self.log_constant + log_factor)


def _tail_parts(kind: Kind, beta: float, a: float, s: float) -> tuple[float, float]:
    """N-independent part: (exponent per unit N, algebraic log prefactor)."""
    if kind is Kind.GAUSSIAN:
        r = _root_pm1(s)
        expo = -beta * rate_psi(kind, s)
        pref = (0.5 * (1.0 - 1.5 * beta) * math.log((s - 1.0) * (s + 1.0))
                - (1.0 - 0.5 * beta) * math.log(0.5 * (s + r)))
    else:
        rs, rm = math.sqrt(s), math.sqrt(s - 1.0)
        expo = -beta * rate_psi(kind, s)
        pref = (0.5 * (1.0 - 1.5 * beta) * math.log(s - 1.0)
                - 0.5 * (0.5 * beta + 1.0) * math.log(s)
                + a * beta * math.log(rs + rm))
    return expo, pref


def _tail_constant(spec: EnsembleSpec) -> float:
    beta, n = spec.beta, spec.n
    common = math.log(n / math.pi) - 0.5 * beta * math.log(n * beta) + log_gamma(1.0 + 0.5 * beta)
    if spec.kind is Kind.GAUSSIAN:
        return common - 0.5 * beta * _LN2
    return common + (1.0 - 1.5 * beta) * _LN2


def density_asym(spec: EnsembleSpec, s: float, eps: float = TAIL_EPS) -> TailDensity:
    """Scaled tail density ``c rho_N(c s)``, ``c = sqrt(2N)`` or ``4N``."""
    spec.require_tail_scaling()
    _check_gt1(s, eps)
    expo, pref = _tail_parts(spec.kind, spec.beta, spec.a, s)
    return TailDensity(spec.n * expo, pref, _tail_constant(spec))


def largest_eig_tail(spec: EnsembleSpec, s: float, eps: float = TAIL_EPS) -> TailDensity:
    """Right-tail PDF of the largest eigenvalue in raw coordinates at ``c s``.

    This is :func:`density_asym` divided by the scale ``c``, i.e. the
    asymptotic value of ``p_N(c s)`` itself.
    """
    return density_asym(spec, s, eps).scale(-math.log(density_scale(spec)))


def _soft_constant(beta: float) -> float:
    return log_gamma(1.0 + 0.5 * beta) - 0.5 * beta * math.log(4.0 * beta) - math.log(math.pi)


def soft_edge_tail(beta: float, X: float) -> LogValue:
    """Right-tail form of the soft-edge density (and largest-eigenvalue PDF)."""
    if not X > 0:
        raise DomainError(f"X must be positive, got {X}")
    log_v = (_soft_constant(beta) - 2.0 * beta * X ** 1.5 / 3.0
             - (0.75 * beta - 0.5) * math.log(X))
    return LogValue.from_log(log_v)


def soft_edge_cdf_tail(beta: float, X: float) -> LogValue:
    """Right-tail form of ``1 - F^soft(X)``."""
    if not X > 0:
        raise DomainError(f"X must be positive, got {X}")
    log_v = (_soft_constant(beta) - math.log(beta) - 2.0 * beta * X ** 1.5 / 3.0
             - 0.75 * beta * math.log(X))
    return LogValue.from_log(log_v)


def soft_edge_map(spec: EnsembleSpec, X: float) -> tuple[float, float]:
    """Return ``(s, ds/dX)`` for the soft-edge scaling at fixed ``X``."""
    n = spec.n
    if spec.kind is Kind.GAUSSIAN:
        jac = 0.5 * n ** (-2.0 / 3.0)
    else:
        jac = (2.0 * n) ** (-2.0 / 3.0)
    return 1.0 + X * jac, jac


def double_scaling_ratio(spec: EnsembleSpec, X: float) -> float:
    """Tail density pushed to the soft-edge variable, over the soft-edge tail."""
    if not X > 0:
        raise DomainError(f"X must be positive, got {X}")
    s, jac = soft_edge_map(spec, X)
    if not s > 1.0:
        raise DomainError(f"s(N, X) = {s!r} is not above 1")
    dens = density_asym(spec, s, eps=0.0)
    return math.exp(dens.log_total + math.log(jac) - soft_edge_tail(spec.beta, X).log_abs)


def _tail_integral(spec: EnsembleSpec, s: float, eps: float) -> LogValue:
    """``int_s^inf`` of the scaled asymptotic density, computed relative to its value at s."""
    ref = density_asym(spec, s, eps).log_total

    def log_ratio(t: float) -> float:
        return density_asym(spec, t, 0.0).log_total - ref

    # march outwards until the integrand has dropped by e^{-40}
    step = max(s - 1.0, 1e-3)
    while log_ratio(s + step) > -40.0:
        step *= 2.0

    def f(t):
        return np.exp([log_ratio(float(v)) for v in np.atleast_1d(t)])

    val, _ = integrate_adaptive(f, s, s + step, 0.0, rel_tol=1e-12)
    return LogValue.from_log(ref + math.log(val))


def gap_prob_tail(spec: EnsembleSpec, k: int, s: float, eps: float = TAIL_EPS) -> LogValue:
    """``(int_s^inf c rho(c t) dt)^k`` with the asymptotic scaled density."""
    if int(k) != k or k < 1:
        raise DomainError(f"k must be a positive integer, got {k}")
    return _tail_integral(spec, s, eps) ** int(k)
