import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from betatail.core import ConvergenceError, DomainError
from betatail.specfun import (gauss_legendre, hermite, hyp_G, integrate_adaptive, laguerre,
                              log_gamma)


def test_hermite_small_values():
    ev = hermite(3, 1.0)
    assert float(ev.value) == pytest.approx(-4.0)
    assert float(ev.derivative) == pytest.approx(12.0)
    assert float(hermite(2, 2.0).value) == pytest.approx(14.0)
    assert hermite(0, 5.0).derivative.is_zero


def test_laguerre_small_values():
    assert float(laguerre(1, 0.0, 2.0).value) == pytest.approx(-1.0)
    assert float(laguerre(2, 0.0, 0.0).value) == pytest.approx(1.0)
    # L_2^a'(x) = -L_1^{a+1}(x) = x - a - 2
    assert float(laguerre(2, 1.5, 0.7).derivative) == pytest.approx(0.7 - 3.5)
    with pytest.raises(DomainError):
        laguerre(3, -1.0, 1.0)


@pytest.mark.parametrize("n,x", [(10, 0.3), (40, 7.1), (120, 15.0), (400, 30.0)])
def test_hermite_against_mpmath(n, x):
    mpmath.mp.dps = 40
    ref = mpmath.hermite(n, x)
    got = hermite(n, x).value
    assert got.sign == mpmath.sign(ref)
    assert got.log_abs == pytest.approx(float(mpmath.log(abs(ref))), abs=1e-11)


@pytest.mark.parametrize("n,a,x", [(5, 1.0, 2.0), (30, 2.5, 40.0), (200, 0.0, 900.0), (60, 0.5, 3.3)])
def test_laguerre_against_mpmath(n, a, x):
    mpmath.mp.dps = 40
    ref = mpmath.laguerre(n, a, x)
    got = laguerre(n, a, x).value
    assert got.sign == mpmath.sign(ref)
    assert got.log_abs == pytest.approx(float(mpmath.log(abs(ref))), abs=1e-10)


def test_hermite_no_overflow_at_extreme_degree():
    v = hermite(2000, 150.0).value
    assert math.isfinite(v.log_abs) and v.log_abs > 700


def test_log_gamma_domain():
    assert log_gamma(5.0) == pytest.approx(math.log(24.0))
    with pytest.raises(DomainError):
        log_gamma(0.0)


@pytest.mark.parametrize("z", [0.0, 0.1, 0.5, -0.7, 0.99])
def test_hyp_G_against_mpmath(z):
    ref = float(mpmath.hyp3f2(1, 1, 1.5, 2, 3, z))
    assert hyp_G(z) == pytest.approx(ref, rel=1e-13)


def test_hyp_G_closed_value():
    # G(1/2) from the closed-form rate identity
    assert hyp_G(0.5) == pytest.approx(1.16097193909552, rel=1e-12)


def test_hyp_G_rejects_outside_disc():
    with pytest.raises(DomainError):
        hyp_G(1.5)


def test_gauss_legendre_exact_for_polynomials():
    rule = gauss_legendre(5)
    assert rule.integrate(lambda t: t ** 8, 0.0, 2.0) == pytest.approx(2 ** 9 / 9, rel=1e-14)


def test_adaptive_log_endpoint():
    val, err = integrate_adaptive(lambda t: np.log1p(-t), 0.0, 1.0, 1e-13)
    assert abs(val + 1.0) < 1e-12
    assert err < 1e-11


def test_adaptive_sqrt_weight():
    val, _ = integrate_adaptive(lambda t: np.ones_like(t), -1.0, 1.0, 1e-14, weight="sqrt")
    assert val == pytest.approx(math.pi / 2, rel=1e-13)
    val, _ = integrate_adaptive(lambda t: np.ones_like(t), -1.0, 1.0, 1e-14, weight="invsqrt")
    assert val == pytest.approx(math.pi, rel=1e-13)


def test_endpoint_distances_log_singularity():
    # (1/pi) int log(1 - t) (1-t^2)^{-1/2} dt = -log 2
    val, _ = integrate_adaptive(lambda t, dlo, dhi: np.log(dhi), -1.0, 1.0, 1e-14,
                                weight="invsqrt", endpoint_distances=True)
    assert val / math.pi == pytest.approx(-math.log(2.0), abs=1e-12)


def test_reversed_limits_and_empty_interval():
    fwd, _ = integrate_adaptive(np.exp, 0.0, 1.0)
    rev, _ = integrate_adaptive(np.exp, 1.0, 0.0)
    assert rev == pytest.approx(-fwd)
    assert integrate_adaptive(np.exp, 2.0, 2.0) == (0.0, 0.0)


def test_adaptive_signals_failure():
    with pytest.raises(ConvergenceError):
        integrate_adaptive(lambda t: 1.0 / t, 0.0, 1.0, 1e-12, max_intervals=50)
    with pytest.raises(DomainError):
        integrate_adaptive(np.exp, 0.0, math.inf)


def test_scalar_integrand():
    val, _ = integrate_adaptive(math.cos, 0.0, math.pi / 2, 1e-13, vectorized=False)
    assert val == pytest.approx(1.0, rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.floats(min_value=1.01, max_value=20.0))
def test_error_estimate_bounds_true_error(c):
    # int_0^1 dt/(c - t) = log(c/(c-1))
    val, err = integrate_adaptive(lambda t: 1.0 / (c - t), 0.0, 1.0, 1e-12)
    assert abs(val - math.log(c / (c - 1.0))) <= max(err, 1e-14)
