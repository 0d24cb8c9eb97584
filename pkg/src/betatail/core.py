"""Shared value types: ensemble parameters, log-scale reals, scaled points."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass


class DomainError(ValueError):
    """An argument lies outside the region where a formula is defined."""


class ConvergenceError(ArithmeticError):
    """An iterative numerical procedure failed to reach its tolerance."""


class Kind(enum.Enum):
    GAUSSIAN = "gauss"
    LAGUERRE = "laguerre"

    @classmethod
    def parse(cls, value: "Kind | str") -> "Kind":
        if isinstance(value, Kind):
            return value
        key = str(value).strip().lower()
        aliases = {"gauss": cls.GAUSSIAN, "gaussian": cls.GAUSSIAN, "g": cls.GAUSSIAN,
                   "laguerre": cls.LAGUERRE, "l": cls.LAGUERRE}
        try:
            return aliases[key]
        except KeyError:
            raise DomainError(f"unknown ensemble kind {value!r}") from None


class Sign(enum.IntEnum):
    NEG = -1
    ZERO = 0
    POS = 1


@dataclass(frozen=True)
class LogValue:
    """A real number stored as ``sign * exp(log_abs)``.

    ``log_abs`` carries no meaning when ``sign`` is ``Sign.ZERO``; it is kept
    at ``-inf`` by convention so that ``float(LogValue.zero())`` is ``0.0``.
    """

    sign: Sign
    log_abs: float

    @classmethod
    def zero(cls) -> "LogValue":
        return cls(Sign.ZERO, -math.inf)

    @classmethod
    def from_log(cls, log_abs: float, sign: Sign = Sign.POS) -> "LogValue":
        if sign is Sign.ZERO or log_abs == -math.inf:
            return cls.zero()
        return cls(Sign(sign), float(log_abs))

    @classmethod
    def from_float(cls, value: float) -> "LogValue":
        if value == 0.0:
            return cls.zero()
        if math.isnan(value):
            raise DomainError("cannot represent NaN as a LogValue")
        return cls(Sign.POS if value > 0 else Sign.NEG, math.log(abs(value)))

    def to_float(self) -> float:
        if self.sign is Sign.ZERO:
            return 0.0
        return int(self.sign) * math.exp(self.log_abs)

    __float__ = to_float

    @property
    def is_zero(self) -> bool:
        return self.sign is Sign.ZERO

    def __neg__(self) -> "LogValue":
        return LogValue(Sign(-int(self.sign)), self.log_abs)

    def __mul__(self, other: "LogValue") -> "LogValue":
        return logvalue_mul(self, other)

    def __truediv__(self, other: "LogValue") -> "LogValue":
        if other.is_zero:
            raise ZeroDivisionError("LogValue division by zero")
        if self.is_zero:
            return LogValue.zero()
        return LogValue(Sign(int(self.sign) * int(other.sign)), self.log_abs - other.log_abs)

    def __add__(self, other: "LogValue") -> "LogValue":
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        big, small = (self, other) if self.log_abs >= other.log_abs else (other, self)
        ratio = math.exp(small.log_abs - big.log_abs)
        if big.sign == small.sign:
            return LogValue(big.sign, big.log_abs + math.log1p(ratio))
        if ratio == 1.0:
            return LogValue.zero()
        return LogValue(big.sign, big.log_abs + math.log1p(-ratio))

    def __sub__(self, other: "LogValue") -> "LogValue":
        return self + (-other)

    def __pow__(self, exponent: float) -> "LogValue":
        if self.is_zero:
            if exponent <= 0:
                raise ZeroDivisionError("zero to a non-positive power")
            return LogValue.zero()
        if self.sign is Sign.NEG:
            if float(exponent).is_integer():
                sign = Sign.NEG if int(exponent) % 2 else Sign.POS
                return LogValue(sign, self.log_abs * exponent)
            raise DomainError("non-integer power of a negative LogValue")
        return LogValue(Sign.POS, self.log_abs * exponent)

    def scale(self, log_factor: float) -> "LogValue":
        """Multiply by ``exp(log_factor)``."""
        if self.is_zero:
            return self
        return LogValue(self.sign, self.log_abs + log_factor)


def logvalue_mul(a: LogValue, b: LogValue) -> LogValue:
    if a.is_zero or b.is_zero:
        return LogValue.zero()
    return LogValue(Sign(int(a.sign) * int(b.sign)), a.log_abs + b.log_abs)


@dataclass(frozen=True)
class EnsembleSpec:
    """Parameters of a Gaussian or Laguerre beta-ensemble.

    The eigenvalue weights are ``exp(-beta*M*x**2)`` (Gaussian) and
    ``x**(a*beta/2) * exp(-2*beta*M*x)`` (Laguerre), so that for ``M ~ N`` the
    bulk occupies ``(-1, 1)`` and ``(0, 1)`` respectively.  ``m_scale``
    defaults to ``n + 1``.
    """

    kind: Kind
    beta: float
    n: int
    m_scale: int | None = None
    laguerre_a: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", Kind.parse(self.kind))
        if self.m_scale is None:
            object.__setattr__(self, "m_scale", self.n + 1)
        if not self.beta > 0:
            raise DomainError(f"beta must be positive, got {self.beta}")
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n}")
        if int(self.m_scale) != self.m_scale or self.m_scale < 1:
            raise DomainError(f"m_scale must be a positive integer, got {self.m_scale}")
        if self.kind is Kind.GAUSSIAN and self.laguerre_a != 0:
            raise DomainError("laguerre_a must be 0 for the Gaussian ensemble")
        if self.kind is Kind.LAGUERRE and self.laguerre_a < 0:
            raise DomainError(f"laguerre_a must be nonnegative, got {self.laguerre_a}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "m_scale", int(self.m_scale))
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "laguerre_a", float(self.laguerre_a))

    @classmethod
    def gaussian(cls, beta: float, n: int, m_scale: int | None = None) -> "EnsembleSpec":
        return cls(Kind.GAUSSIAN, beta, n, m_scale)

    @classmethod
    def laguerre(cls, beta: float, n: int, a: float = 0.0,
                 m_scale: int | None = None) -> "EnsembleSpec":
        return cls(Kind.LAGUERRE, beta, n, m_scale, a)

    @property
    def a(self) -> float:
        return self.laguerre_a

    @property
    def is_tail_scaled(self) -> bool:
        """True when ``M == N + 1``, the only case the tail formulas cover."""
        return self.m_scale == self.n + 1

    def require_tail_scaling(self) -> None:
        if not self.is_tail_scaled:
            raise DomainError(
                f"tail formulas require m_scale = n + 1 (got n={self.n}, m_scale={self.m_scale})")


@dataclass(frozen=True)
class ScaledPoint:
    """A point ``s`` in bulk-normalised coordinates."""

    s: float

    @property
    def in_tail(self) -> bool:
        return self.s > 1.0


def raw_coordinate(spec: EnsembleSpec, p: ScaledPoint | float) -> float:
    """Map a scaled point to the unscaled eigenvalue axis using ``M``.

    Gaussian: ``sqrt(2M) * s``; Laguerre: ``4M * s``.
    """
    s = p.s if isinstance(p, ScaledPoint) else float(p)
    return weight_scale(spec) * s


def weight_scale(spec: EnsembleSpec) -> float:
    """Eigenvalue scale relating ``exp(-beta x^2/2)`` / ``exp(-beta x/2)`` to the scaled weights."""
    if spec.kind is Kind.GAUSSIAN:
        return math.sqrt(2.0 * spec.m_scale)
    return 4.0 * spec.m_scale


def density_scale(spec: EnsembleSpec) -> float:
    """Scale used by the tail density formulas: ``sqrt(2N)`` or ``4N``.

    The N-eigenvalue density is studied at ``sqrt(2N) s`` (Gaussian) and
    ``4N s`` (Laguerre); this is *not* :func:`weight_scale`, which uses ``M``.
    """
    if spec.kind is Kind.GAUSSIAN:
        return math.sqrt(2.0 * spec.n)
    return 4.0 * spec.n
