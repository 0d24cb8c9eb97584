"""Monte Carlo sampling of Gaussian and Laguerre beta-ensembles.

Spectra come from the tridiagonal (Gaussian) and bidiagonal (Laguerre)
matrix models with independent normal and chi entries.  Eigenvalues are
returned in the scaled-weight coordinates of :class:`~betatail.core.EnsembleSpec`,
i.e. distributed as ``ME_{beta,N}(exp(-beta M x^2))`` or
``ME_{beta,N}(x^{a beta/2} exp(-2 beta M x))``.

Reproducibility
---------------
Work is split into batches of ``cfg.batch`` spectra.  Batch ``j`` draws from a
Philox stream seeded by ``SeedSequence(cfg.seed, spawn_key=(j,))``, and batch
statistics are merged in batch order, so results are bit-identical for a
given ``(seed, samples, batch)`` regardless of ``workers``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import LinAlgError, eigvalsh_tridiagonal

from betatail.core import ConvergenceError, DomainError, EnsembleSpec, Kind


@dataclass(frozen=True)
class MCConfig:
    samples: int
    seed: int = 0
    batch: int = 10_000
    workers: int = 1

    def __post_init__(self) -> None:
        if int(self.samples) != self.samples or self.samples < 1:
            raise DomainError(f"samples must be a positive integer, got {self.samples}")
        if int(self.batch) != self.batch or self.batch < 1:
            raise DomainError(f"batch must be a positive integer, got {self.batch}")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise DomainError("seed must be a 64-bit unsigned integer")
        if self.workers < 1:
            raise DomainError("workers must be >= 1")

    @property
    def n_batches(self) -> int:
        return -(-self.samples // self.batch)

    def batch_sizes(self) -> list[int]:
        sizes = [self.batch] * (self.samples // self.batch)
        if self.samples % self.batch:
            sizes.append(self.samples % self.batch)
        return sizes


@dataclass(frozen=True)
class MCEstimate:
    mean: float
    std_err: float
    n: int
    seed: int


@dataclass(frozen=True)
class SpectrumSample:
    eigenvalues: np.ndarray

    def __post_init__(self) -> None:
        ev = np.asarray(self.eigenvalues, dtype=float)
        if np.any(np.diff(ev) < 0):
            raise DomainError("eigenvalues must be sorted ascending")
        object.__setattr__(self, "eigenvalues", ev)


def batch_rng(seed: int, index: int) -> np.random.Generator:
    """Independent Philox substream for batch ``index``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=(int(index),))))


def _chi(rng: np.random.Generator, dof, size) -> np.ndarray:
    # chi_k = sqrt(2 Gamma(k/2, 1))
    return np.sqrt(2.0 * rng.standard_gamma(0.5 * np.asarray(dof, dtype=float), size=size))


def eig_sym_tridiag(diag, offdiag) -> np.ndarray:
    """Eigenvalues (ascending) of a symmetric tridiagonal matrix."""
    d = np.asarray(diag, dtype=float)
    e = np.asarray(offdiag, dtype=float)
    if d.ndim != 1 or e.shape != (max(d.size - 1, 0),):
        raise DomainError("need len(offdiag) == len(diag) - 1")
    try:
        return eigvalsh_tridiagonal(d, e)
    except LinAlgError as exc:
        raise ConvergenceError(f"tridiagonal eigensolver failed: {exc}") from exc


def _tridiag_eigs(d: np.ndarray, e: np.ndarray) -> np.ndarray:
    """Batched eigenvalues of symmetric tridiagonal matrices, rows of ``d``/``e``."""
    b, n = d.shape
    if n == 1:
        return d.copy()
    mat = np.zeros((b, n, n))
    idx = np.arange(n)
    mat[:, idx, idx] = d
    mat[:, idx[:-1], idx[1:]] = e
    mat[:, idx[1:], idx[:-1]] = e
    return np.linalg.eigvalsh(mat)


def gaussian_model(spec: EnsembleSpec, rng: np.random.Generator, size: int):
    """Diagonal and off-diagonal of ``size`` Hermite-model matrices (unscaled)."""
    n, beta = spec.n, spec.beta
    d = rng.standard_normal((size, n))
    e = _chi(rng, beta * np.arange(n - 1, 0, -1), (size, n - 1)) / math.sqrt(2.0)
    return d, e


def laguerre_model(spec: EnsembleSpec, rng: np.random.Generator, size: int):
    """Diagonal and sub-diagonal of ``size`` bidiagonal Laguerre-model matrices."""
    n, beta = spec.n, spec.beta
    shape = 0.5 * spec.a * beta + 1.0 + 0.5 * beta * (n - 1)
    dof_d = 2.0 * shape - beta * np.arange(n)
    if np.any(dof_d <= 0):
        raise DomainError("Laguerre model has a non-positive chi parameter")
    x = _chi(rng, dof_d, (size, n))
    y = _chi(rng, beta * np.arange(n - 1, 0, -1), (size, n - 1))
    return x, y


def sample_batch(spec: EnsembleSpec, rng: np.random.Generator, size: int) -> np.ndarray:
    """``(size, N)`` array of sorted spectra in scaled-weight coordinates."""
    if spec.kind is Kind.GAUSSIAN:
        d, e = gaussian_model(spec, rng, size)
        # model weight exp(-x^2/2) -> exp(-beta M x^2)
        return _tridiag_eigs(d, e) / math.sqrt(2.0 * spec.beta * spec.m_scale)
    x, y = laguerre_model(spec, rng, size)
    # B B^T is tridiagonal: diag x_k^2 + y_{k-1}^2, off x_k y_k
    d = x * x
    d[:, 1:] += y * y
    e = x[:, :-1] * y
    eig = _tridiag_eigs(d, e)
    # model weight x^{a beta/2} exp(-x/2) -> exp(-2 beta M x)
    return np.maximum(eig, 0.0) / (4.0 * spec.beta * spec.m_scale)


def sample_gaussian(spec: EnsembleSpec, rng: np.random.Generator) -> SpectrumSample:
    if spec.kind is not Kind.GAUSSIAN:
        raise DomainError("sample_gaussian needs a Gaussian spec")
    return SpectrumSample(sample_batch(spec, rng, 1)[0])


def sample_laguerre(spec: EnsembleSpec, rng: np.random.Generator) -> SpectrumSample:
    if spec.kind is not Kind.LAGUERRE:
        raise DomainError("sample_laguerre needs a Laguerre spec")
    return SpectrumSample(sample_batch(spec, rng, 1)[0])


def _run_batches(spec: EnsembleSpec, cfg: MCConfig, stat: Callable[[np.ndarray], np.ndarray]):
    """Apply ``stat`` to each batch of spectra; returns per-batch results in order."""
    sizes = cfg.batch_sizes()

    def work(j: int):
        return stat(sample_batch(spec, batch_rng(cfg.seed, j), sizes[j]))

    if cfg.workers == 1 or len(sizes) == 1:
        return [work(j) for j in range(len(sizes))]
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(work, range(len(sizes))))


def _merge_moments(parts) -> tuple[int, np.ndarray, np.ndarray]:
    """Chan-style merge of ``(count, mean, M2)`` triples, in the given order."""
    n_tot, mean, m2 = 0, None, None
    for n, mu, q in parts:
        if mean is None:
            n_tot, mean, m2 = n, mu, q
            continue
        delta = mu - mean
        tot = n_tot + n
        mean = mean + delta * (n / tot)
        m2 = m2 + q + delta * delta * (n_tot * n / tot)
        n_tot = tot
    return n_tot, mean, m2


def _moment_stat(values: np.ndarray):
    mu = values.mean(axis=0)
    return values.shape[0], mu, ((values - mu) ** 2).sum(axis=0)


def mc_mean(spec: EnsembleSpec, cfg: MCConfig, fn: Callable[[np.ndarray], np.ndarray]):
    """Sample mean and standard error of ``fn(spectra)`` (vector-valued allowed)."""
    n, mean, m2 = _merge_moments(_run_batches(spec, cfg, lambda ev: _moment_stat(fn(ev))))
    var = m2 / (n - 1) if n > 1 else np.zeros_like(m2)
    return mean, np.sqrt(var / n), n


def _estimate(mean, se, n, cfg) -> MCEstimate:
    return MCEstimate(float(mean), float(se), int(n), int(cfg.seed))


def _log_abs_charpoly(ev: np.ndarray, s: float) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(np.abs(s - ev)).sum(axis=1)


def mc_moment(spec: EnsembleSpec, s: float, cfg: MCConfig) -> MCEstimate:
    """Estimate ``<prod_l |s - lambda_l|^beta>``."""
    beta = spec.beta
    mean, se, n = mc_mean(spec, cfg, lambda ev: np.exp(beta * _log_abs_charpoly(ev, s)))
    return _estimate(mean, se, n, cfg)


def mc_charfn(spec: EnsembleSpec, s: float, k: float, cfg: MCConfig) -> tuple[MCEstimate, MCEstimate]:
    """Real and imaginary parts of ``<exp(i k sum_l log|s - lambda_l|)>``."""
    def fn(ev):
        phase = k * _log_abs_charpoly(ev, s)
        return np.stack([np.cos(phase), np.sin(phase)], axis=1)

    mean, se, n = mc_mean(spec, cfg, fn)
    return _estimate(mean[0], se[0], n, cfg), _estimate(mean[1], se[1], n, cfg)


def mc_exceedance(spec: EnsembleSpec, threshold: float, cfg: MCConfig) -> MCEstimate:
    """Probability that the largest eigenvalue exceeds ``threshold``."""
    mean, se, n = mc_mean(spec, cfg, lambda ev: (ev[:, -1] > threshold).astype(float))
    return _estimate(mean, se, n, cfg)


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    counts: np.ndarray
    n_spectra: int

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    @property
    def density(self) -> np.ndarray:
        """Estimated one-point density (integrates to N over the full line)."""
        return self.counts / (self.n_spectra * self.widths)

    @property
    def std_err(self) -> np.ndarray:
        """Poisson error of :attr:`density`."""
        return np.sqrt(self.counts) / (self.n_spectra * self.widths)


def mc_histogram(spec: EnsembleSpec, edges, cfg: MCConfig, scale: float = 1.0) -> Histogram:
    """Eigenvalue histogram of ``scale * lambda`` over ``edges``."""
    edges = np.asarray(edges, dtype=float)
    counts = _run_batches(spec, cfg, lambda ev: np.histogram(scale * ev.ravel(), bins=edges)[0])
    return Histogram(edges, np.sum(counts, axis=0), cfg.samples)
