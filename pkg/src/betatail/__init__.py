"""Tail asymptotics of the spectral density for Gaussian and Laguerre beta-ensembles.

Three independent routes are provided and cross-checked against each other:

* exact finite-N densities (:mod:`betatail.exact`),
* two-term large-N expansions (:mod:`betatail.asymp`),
* Monte Carlo over tridiagonal/bidiagonal models (:mod:`betatail.sampler`)
  and deterministic duality integrals (:mod:`betatail.duality`).
"""

from betatail.core import (
    EnsembleSpec,
    Kind,
    LogValue,
    ScaledPoint,
    Sign,
    logvalue_mul,
    raw_coordinate,
)

__version__ = "0.1.0"

__all__ = [
    "EnsembleSpec",
    "Kind",
    "LogValue",
    "ScaledPoint",
    "Sign",
    "logvalue_mul",
    "raw_coordinate",
    "__version__",
]
