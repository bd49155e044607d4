import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.special import erfc, gamma, rgamma

from fracpoisson.errors import DomainError
from fracpoisson.special import (SERIES_THRESHOLD, inverse_stable_density, mittag_leffler,
                                 stable_cdf, stable_density_g)

import oracles


def levy_half(x):
    return x**-1.5 * np.exp(-1 / (4 * x)) / (2 * math.sqrt(math.pi))


def test_half_closed_form():
    assert stable_density_g(0.5, 1.0) == pytest.approx(0.21969564473386122, rel=1e-13)
    x = np.logspace(-2, 3, 60)
    assert np.allclose(stable_density_g(0.5, x), levy_half(x), rtol=1e-12, atol=0)


@pytest.mark.parametrize("beta", [0.1, 0.3, 0.7, 0.9])
@pytest.mark.parametrize("x", [0.05, 0.3, 1.0, 1.99, 2.0, 5.0, 50.0])
def test_density_against_extended_precision(beta, x):
    ref = float(oracles.stable_density(beta, x))
    got = stable_density_g(beta, x)
    if ref < 1e-300:
        assert got < 1e-290
    else:
        assert got == pytest.approx(ref, rel=1e-9)


@pytest.mark.parametrize("beta", [0.3, 0.5, 0.8])
def test_density_normalization_and_laplace(beta):
    g = lambda u: stable_density_g(beta, math.exp(u)) * math.exp(u)  # noqa: E731
    assert quad(g, -15, 0, limit=200)[0] + quad(g, 0, 60, limit=200)[0] == pytest.approx(
        1.0, abs=1e-6)
    for lam in (0.5, 1.0, 2.0):
        h = lambda u: math.exp(-lam * math.exp(u)) * g(u)  # noqa: E731
        val = quad(h, -15, 0, limit=200)[0] + quad(h, 0, 10, limit=200)[0]
        assert val == pytest.approx(math.exp(-lam**beta), abs=1e-6)


@pytest.mark.parametrize("beta", [0.2, 0.5, 0.8])
def test_series_and_integral_agree_on_overlap(beta):
    x = np.linspace(2, 10, 17)
    a = stable_density_g(beta, x, method="series")
    b = stable_density_g(beta, x, method="zolotarev")
    assert np.max(np.abs(a / b - 1)) <= 1e-7
    assert SERIES_THRESHOLD == 2.0


@pytest.mark.parametrize("beta", [0.3, 0.5, 0.7])
def test_unimodal(beta):
    x = np.logspace(-4, 2, 3000)
    d = np.diff(stable_density_g(beta, x))
    signs = np.sign(d[d != 0])
    assert np.count_nonzero(np.diff(signs)) == 1


def test_density_domain():
    with pytest.raises(DomainError):
        stable_density_g(1.0, 1.0)
    with pytest.raises(DomainError):
        stable_density_g(0.5, -1.0)
    assert stable_density_g(0.5, 0.0) == 0.0
    with pytest.raises(DomainError):
        stable_density_g(0.3, 1.0, method="closed_form_half")


def test_cdf():
    # P(S <= x) = erfc(1/(2 sqrt(x))) for beta = 1/2
    x = np.logspace(-2, 3, 30)
    assert np.allclose(stable_cdf(0.5, x), erfc(1 / (2 * np.sqrt(x))), rtol=1e-10, atol=1e-15)
    up = stable_cdf(0.5, x, upper=True)
    assert np.allclose(up, 1 - erfc(1 / (2 * np.sqrt(x))), rtol=1e-9, atol=1e-15)
    assert stable_cdf(0.5, 1e8, upper=True) == pytest.approx(1 / math.sqrt(math.pi * 1e8),
                                                            rel=1e-6)


@pytest.mark.parametrize("beta", [0.3, 0.7])
def test_cdf_is_integral_of_density(beta):
    for x in (0.5, 1.0, 4.0):
        g = lambda u: stable_density_g(beta, math.exp(u)) * math.exp(u)  # noqa: E731
        assert stable_cdf(beta, x) == pytest.approx(quad(g, -20, math.log(x), limit=200)[0],
                                                   rel=1e-8)


def test_mittag_leffler_examples():
    assert mittag_leffler(1.0, 1.0, -1.0) == pytest.approx(math.exp(-1), rel=1e-14)
    assert mittag_leffler(0.5, 1.0, -1.0) == pytest.approx(math.e * math.erfc(1), rel=1e-13)
    assert mittag_leffler(0.5, 1.0, -1.0) == pytest.approx(0.42758, abs=1e-5)
    assert mittag_leffler(0.5, 0.5, 0.0) == pytest.approx(1 / math.sqrt(math.pi), rel=1e-15)


# the series oracle costs ~|z|**(1/beta) digits, so very large ones are left to
# the asymptotic test below
ML_CASES = [(b, g, z) for b in (0.3, 0.5, 0.7, 0.9) for g in (0.3, 1.0, 1.7)
            for z in (-20.0, -7.5, -3.0, -1.0, -0.2, 0.5, 2.0) if abs(z) ** (1 / b) < 3000]


@pytest.mark.parametrize("beta,gam,z", ML_CASES)
def test_mittag_leffler_against_series(beta, gam, z):
    ref = oracles.ml_series(beta, gam, z)
    got = mittag_leffler(beta, gam, z)
    assert got == pytest.approx(ref, rel=1e-10, abs=1e-14)


@pytest.mark.parametrize("beta", [0.3, 0.6])
def test_mittag_leffler_large_argument_asymptotics(beta):
    for z in (-1e4, -1e6, -1e8):
        # E_{b,1}(z) ~ -sum_k z^-k / Gamma(1 - b k)
        ref = sum(-(z ** -k) * rgamma(1 - beta * k) for k in range(1, 6))
        assert mittag_leffler(beta, 1.0, z) == pytest.approx(ref, rel=1e-12)


def test_inverse_stable_examples():
    assert inverse_stable_density(0.5, 1.0, 1.0) == pytest.approx(
        math.exp(-0.25) / math.sqrt(math.pi), rel=1e-13)
    r = np.linspace(0.1, 5, 20)
    t = 2.0
    assert np.allclose(inverse_stable_density(0.5, t, r),
                       np.exp(-r * r / (4 * t)) / np.sqrt(np.pi * t), rtol=1e-12)


@pytest.mark.parametrize("beta", [0.3, 0.5, 0.8])
def test_inverse_stable_moments(beta):
    t = 1.0
    h = lambda r: inverse_stable_density(beta, t, r)  # noqa: E731
    mass = quad(h, 0, 1, limit=200)[0] + quad(h, 1, np.inf, limit=200)[0]
    assert mass == pytest.approx(1.0, abs=1e-6)
    mean = quad(lambda r: r * h(r), 0, 1, limit=200)[0] + quad(lambda r: r * h(r), 1, np.inf,
                                                               limit=200)[0]
    assert mean == pytest.approx(t**beta / gamma(1 + beta), abs=1e-5)


@settings(max_examples=15, deadline=None)
@given(st.sampled_from([0.3, 0.5, 0.7]), st.floats(0.2, 5.0), st.floats(0.3, 3.0))
def test_inverse_stable_laplace_is_mittag_leffler(beta, lam, t):
    f = lambda r: math.exp(-lam * r) * inverse_stable_density(beta, t, r)  # noqa: E731
    val = quad(f, 0, 1, limit=200)[0] + quad(f, 1, np.inf, limit=200)[0]
    assert val == pytest.approx(mittag_leffler(beta, 1.0, -lam * t**beta), abs=1e-5)
