import cmath
import itertools
import math

import numpy as np
import pytest
from scipy import integrate
from scipy.special import roots_hermite

from betatail.asymp import linstat_moments, log_int_semicircle, moment_asym
from betatail.core import ConvergenceError, DomainError, EnsembleSpec
from betatail.duality import (GAUSS_BETA4_MAX_N, _contour_moments, gauss_dual_check, gauss_dual_rhs,
                              gauss_dual_rhs_scaled, gauss_moment_lhs, gauss_saddle_ratio,
                              laguerre_dual_moment, laguerre_dual_rhs, laguerre_lhs_log_prefactor,
                              laguerre_moment_lhs, morris_constant, saddle_data_gauss,
                              saddle_data_laguerre, saddle_f, saddle_g)
from betatail.specfun import log_gamma


def tensor_rhs_beta2(x, n, m):
    """Direct 2-d Gauss-Hermite sum of the beta=2 dual integral (exact for this polynomial)."""
    u, w = roots_hermite(n + 4)
    y, w = u / math.sqrt(2 * m), w / math.sqrt(2 * m)
    y1, y2 = np.meshgrid(y, y, indexing="ij")
    ww = np.outer(w, w) * (y1 - y2) ** 2
    return np.sum(ww * (x - 1j * y1) ** n * (x - 1j * y2) ** n) / np.sum(ww)


def quad_moment_gauss(x, n, m, beta):
    """scipy-adaptive left side for n in {1, 2}."""
    wt = lambda y: math.exp(-beta * m * y * y)
    lim = 12 / math.sqrt(beta * m)
    if n == 1:
        num = integrate.quad(lambda y: (x - y) ** beta * wt(y), -lim, lim, epsrel=1e-12)[0]
        return num / integrate.quad(wt, -lim, lim, epsrel=1e-12)[0]
    f = lambda y2, y1: (y1 - y2) ** beta * wt(y1) * wt(y2)
    num = integrate.dblquad(lambda y2, y1: f(y2, y1) * ((x - y1) * (x - y2)) ** beta, -lim, lim, -lim, lim,
                            epsrel=1e-12)[0]
    return num / integrate.dblquad(f, -lim, lim, -lim, lim, epsrel=1e-12)[0]


def test_empty_product_is_one():
    assert gauss_dual_rhs(1.7, 0, 3, 2) == 1.0
    assert gauss_dual_rhs(1.7, 0, 3, 4) == 1.0


@pytest.mark.parametrize("x,m,expect", [(2.0, 1, 4.25), (1.5, 2, 2.375)])
def test_single_eigenvalue_values(x, m, expect):
    lhs, rhs = gauss_dual_check(x, 1, m, 2)
    assert lhs == pytest.approx(expect, rel=1e-13)
    assert rhs == pytest.approx(expect, rel=1e-12)


@pytest.mark.parametrize("n", [1, 2, 3, 7, 15])
def test_beta2_rhs_matches_tensor_sum(n):
    x, m = 1.5, n + 1
    assert gauss_dual_rhs(x, n, m, 2) == pytest.approx(tensor_rhs_beta2(x, n, m), rel=1e-11)


@pytest.mark.parametrize("beta,n", [(2, 1), (2, 2), (4, 1), (4, 2)])
def test_tensor_lhs_matches_adaptive_quadrature(beta, n):
    assert gauss_moment_lhs(2.0, n, 3, beta) == pytest.approx(quad_moment_gauss(2.0, n, 3, beta), rel=1e-9)


@pytest.mark.parametrize("x", [1.5, 2.0])
@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("shift", [0, 1])
def test_gauss_duality_beta2(x, n, shift):
    lhs, rhs = gauss_dual_check(x, n, n + shift, 2)
    assert abs(lhs - rhs) / abs(lhs) < 1e-6


@pytest.mark.parametrize("x", [1.5, 2.0])
@pytest.mark.parametrize("n", [1, 2])
@pytest.mark.parametrize("shift", [0, 1])
def test_gauss_duality_beta4(x, n, shift):
    lhs, rhs = gauss_dual_check(x, n, n + shift, 4)
    assert abs(lhs - rhs) / abs(lhs) < 1e-5


def test_gauss_duality_beyond_acceptance_grid():
    for beta, n in [(2, 4), (4, 3), (4, 4)]:
        lhs, rhs = gauss_dual_check(1.3, n, n + 1, beta)
        assert rhs == pytest.approx(lhs, rel=1e-9)


def test_gauss_rhs_domain():
    with pytest.raises(DomainError):
        gauss_dual_rhs(1.5, 2, 3, 3)
    with pytest.raises(DomainError):
        gauss_dual_rhs(1.5, GAUSS_BETA4_MAX_N + 1, 10, 4)
    with pytest.raises(DomainError):
        gauss_moment_lhs(1.5, 5, 6, 2)
    with pytest.raises(DomainError):
        gauss_moment_lhs(1.5, 2, 3, 1)


def test_morris_constant_cases():
    assert morris_constant(1.3, 2.0, 0.7, 0) == 1.0
    expect = math.exp(log_gamma(1 + 1.3 + 2.0) - log_gamma(2.3) - log_gamma(3.0))
    assert morris_constant(1.3, 2.0, 0.7, 1) == pytest.approx(expect, rel=1e-13)
    for g in (0.5, 1.0, 2.0, 3.0):
        # telescoping at alpha = b = 0: Gamma(1 + m g) / Gamma(1 + g)^m
        expect = math.exp(log_gamma(1 + 2 * g) - 2 * log_gamma(1 + g))
        assert morris_constant(0.0, 0.0, g, 2) == pytest.approx(expect, rel=1e-12)
    with pytest.raises(DomainError):
        morris_constant(0.0, 0.0, 1.0, -1)


@pytest.mark.parametrize("g", [1, 2, 3])
def test_morris_matches_dyson_constant_term(g):
    # constant term of prod_{j != k} (1 - z_j/z_k)^g for two variables, via torus trapezoid
    q = 64
    th = 2 * math.pi * np.arange(q) / q
    t1, t2 = np.meshgrid(th, th, indexing="ij")
    z1, z2 = np.exp(1j * t1), np.exp(1j * t2)
    ct = np.mean(((1 - z1 / z2) * (1 - z2 / z1)) ** g).real
    assert ct == pytest.approx(math.comb(2 * g, g), rel=1e-12)
    assert morris_constant(0.0, 0.0, float(g), 2) == pytest.approx(ct, rel=1e-12)


@pytest.mark.parametrize("n,a_hat", [(1, 0.0), (3, 1.5), (6, 0.25)])
def test_contour_binomial(n, a_hat):
    mu0 = _contour_moments(0.0, n, 2, a_hat, 1, 0.5, 128)[0]
    expect = math.exp(log_gamma(a_hat + n + 1) - log_gamma(n + 1) - log_gamma(a_hat + 1))
    assert mu0.real == pytest.approx(expect, rel=1e-12)
    assert abs(mu0.imag) < 1e-12 * expect


def test_laguerre_single_eigenvalue_identity():
    n, a, t, m = 1, 0.0, 1.5, 2
    wt = lambda x: math.exp(-4 * m * x)
    avg = (integrate.quad(lambda x: (x - t) ** 2 * wt(x), 0, np.inf, epsrel=1e-13)[0]
           / integrate.quad(wt, 0, np.inf, epsrel=1e-13)[0])
    lhs = avg * math.exp(laguerre_lhs_log_prefactor(n, m, 2, a))
    assert laguerre_dual_rhs(t, n, m, 2, a) == pytest.approx(lhs, rel=1e-6)


def test_laguerre_moment_lhs_against_adaptive_quadrature():
    n, a, t, m = 2, 1.0, 1.3, 3
    wt = lambda x: x * math.exp(-4 * m * x)
    f = lambda y, x: (x - y) ** 2 * wt(x) * wt(y)
    num = integrate.dblquad(lambda y, x: f(y, x) * ((x - t) * (y - t)) ** 2, 0, 10, 0, 10, epsrel=1e-12)[0]
    den = integrate.dblquad(f, 0, 10, 0, 10, epsrel=1e-12)[0]
    lhs = laguerre_moment_lhs(t, n, m, 2, a) * math.exp(-laguerre_lhs_log_prefactor(n, m, 2, a))
    assert lhs == pytest.approx(num / den, rel=1e-9)


@pytest.mark.parametrize("n", [1, 2])
@pytest.mark.parametrize("a", [0.0, 1.0, 2.5])
@pytest.mark.parametrize("t", [1.3, 2.0])
def test_laguerre_duality(n, a, t):
    m = n + 1
    lhs = laguerre_moment_lhs(t, n, m, 2, a)
    rhs = laguerre_dual_rhs(t, n, m, 2, a)
    assert abs(lhs - rhs) / abs(lhs) < 1e-5
    r3 = laguerre_dual_rhs(t, n, m, 2, a, r=0.3)
    r6 = laguerre_dual_rhs(t, n, m, 2, a, r=0.6)
    assert abs(r3 - r6) / abs(r3) < 1e-8


def test_laguerre_trivial_moment():
    # m = 1, t = 0: both sides reduce to the binomial ratio, which equals one
    assert laguerre_dual_rhs(0.0, 3, 4, 2, 1.5, m=1) == pytest.approx(1.0, rel=1e-12)
    assert laguerre_moment_lhs(0.0, 3, 4, 2, 1.5, m=1) == pytest.approx(1.0, rel=1e-12)


def test_laguerre_dual_moment_is_plain_average():
    n, a, t, m = 3, 0.5, 1.4, 4
    direct = laguerre_moment_lhs(t, n, m, 2, a) * math.exp(-laguerre_lhs_log_prefactor(n, m, 2, a))
    assert laguerre_dual_moment(t, n, m, a) == pytest.approx(direct, rel=1e-8)


def test_laguerre_dual_domain():
    with pytest.raises(DomainError):
        laguerre_dual_rhs(1.5, 2, 3, beta=4)
    with pytest.raises(DomainError):
        laguerre_dual_rhs(1.5, 2, 3, r=1.0)


@pytest.mark.parametrize("x", [1.2, 2.0, 5.0])
def test_gauss_saddle_stationary(x):
    sd = saddle_data_gauss(x)
    y = sd.y_minus
    assert abs(-4 * y - 1j / (x - 1j * y)) < 1e-12
    assert saddle_f(x, y).real == pytest.approx(sd.f_at_saddle, abs=1e-12)
    assert abs(saddle_f(x, y).imag) < 1e-12
    assert sd.alpha_x > 0
    # second derivative along the real y direction is negative at this saddle
    assert (-4 + 1 / (x - 1j * y) ** 2).real < 0


def test_gauss_saddle_value_matches_log_potential():
    for x in (1.1, 1.5, 3.0):
        assert saddle_data_gauss(x).f_at_saddle == pytest.approx(log_int_semicircle(x), abs=1e-12)


@pytest.mark.parametrize("t", [1.2, 2.0, 5.0])
def test_laguerre_saddle(t):
    sd = saddle_data_laguerre(t)
    z = sd.z_plus
    assert abs(-4 * t - 1 / z + 1 / (1 + z)) < 1e-12
    g = saddle_g(t, complex(z))
    assert g.real == pytest.approx(sd.g_at_saddle, abs=1e-12)
    # z_+ < 0 puts log z on its cut; the imaginary part is the constant -pi
    assert g.imag == pytest.approx(-math.pi, abs=1e-12)
    assert sd.gamma_t > 0


def test_laguerre_saddle_exponent_offset():
    # per unit M beta, g(t, z_+) exceeds the leading moment exponent by 1 + 2 log 2
    for t in (1.2, 2.0, 5.0):
        lead = 2 * log_int_semicircle(math.sqrt(t))
        assert saddle_data_laguerre(t).g_at_saddle - lead == pytest.approx(1 + 2 * math.log(2), abs=1e-12)


def test_saddle_domain():
    with pytest.raises(DomainError):
        saddle_data_gauss(1.0)
    with pytest.raises(DomainError):
        saddle_data_laguerre(0.5)


def test_saddle_ratio_converges():
    ratios = [gauss_saddle_ratio(1.5, n) for n in (20, 40, 80)]
    assert ratios[0] < ratios[1] < ratios[2] < 1.0
    assert abs(ratios[2] - 1) < 0.02


def test_saddle_ratio_signals_cancellation():
    with pytest.raises(ConvergenceError):
        gauss_saddle_ratio(1.5, 400)


def test_dual_matches_asymptotic_moment():
    # the exact beta=2 moment and its large-N form agree better as N grows
    errs = []
    for n in (10, 20, 40, 80):
        mant, scale = gauss_dual_rhs_scaled(1.5, n, n + 1, 2)
        exact = math.log(mant.real) + scale
        errs.append(abs(exact - moment_asym(EnsembleSpec.gaussian(2, n), 1.5).log_abs))
    assert all(a > b for a, b in zip(errs, errs[1:]))
