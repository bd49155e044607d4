import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.special import gamma

from fracpoisson import BernsteinSpec, verify_weak_scaling
from fracpoisson.bernstein import bisect_increasing
from fracpoisson.errors import BracketError, DomainError, NotSpecialError

MIX = BernsteinSpec.mixture([(0.5, 0.3), (0.5, 0.7)])
betas = st.floats(0.05, 0.95)
lams = st.floats(1e-6, 1e6)


def test_phi_examples():
    assert BernsteinSpec.stable(0.5).phi(4.0) == pytest.approx(2.0, rel=1e-15)
    for b in (0.2, 0.5, 0.9):
        assert BernsteinSpec.stable(b).phi(1.0) == 1.0
    assert MIX.phi(2.0) == pytest.approx(0.5 * 2**0.3 + 0.5 * 2**0.7, rel=1e-15)
    assert MIX.phi(2.0) == pytest.approx(1.4278, abs=1e-4)


def test_phi_prime_examples():
    s = BernsteinSpec.stable(0.5)
    assert s.phi_prime(1.0) == pytest.approx(0.5)
    assert s.phi_prime(4.0) == pytest.approx(0.25)


def test_tabulated_phi_prime_matches_analytic():
    lam = np.logspace(-6, 6, 1201)
    tab = BernsteinSpec.tabulated(lam, lam**0.5)
    x = np.logspace(-4, 4, 17)
    assert np.max(np.abs(tab.phi_prime(x) - 0.5 * x**-0.5)) <= 1e-6 * np.max(0.5 * x**-0.5)
    assert np.allclose(tab.phi(x), x**0.5, rtol=1e-9)


def test_inverses_examples():
    s = BernsteinSpec.stable(0.5)
    assert s.phi_prime_inverse(0.5) == pytest.approx(1.0)
    assert s.phi_prime_inverse(0.25) == pytest.approx(4.0)
    assert BernsteinSpec.stable(0.3).phi_prime_inverse(1.0) == pytest.approx(0.3 ** (1 / 0.7))
    assert BernsteinSpec.stable(0.3).phi_prime_inverse(1.0) == pytest.approx(0.1791, abs=1e-4)
    assert s.phi_inverse(2.0) == pytest.approx(4.0)
    assert BernsteinSpec.stable(0.7).phi_inverse(1.0) == pytest.approx(1.0)
    y = np.logspace(-6, 6, 25)
    assert np.allclose(MIX.phi(MIX.phi_inverse(y)), y, rtol=1e-10)


def test_mixture_prime_inverse_by_bisection():
    y = np.logspace(-3, 3, 13)
    s = MIX.phi_prime_inverse(y)
    assert np.allclose(MIX.phi_prime(s), y, rtol=1e-10)


@given(betas, st.floats(-6, 6))
def test_phi_inverse_round_trip(beta, e):
    lam = 10.0**e
    for spec in (BernsteinSpec.stable(beta), BernsteinSpec.mixture([(1.0, beta), (0.3, 0.5)])):
        assert spec.phi_inverse(spec.phi(lam)) == pytest.approx(lam, rel=1e-9)


@given(betas, lams)
def test_scaling_ratio_bounds(beta, lam):
    s = BernsteinSpec.stable(beta)
    assert lam * s.phi_prime(lam) / s.phi(lam) == pytest.approx(beta, rel=1e-12)
    m = BernsteinSpec.mixture([(1.0, beta), (2.0, 0.5)])
    ratio = m.phi(lam) / (lam * m.phi_prime(lam))
    assert 1.0 <= ratio <= 1.0 / min(beta, 0.5) + 1e-12


def test_levy_density_and_tail():
    s = BernsteinSpec.stable(0.5)
    assert s.levy_density(1.0) == pytest.approx(1 / (2 * math.sqrt(math.pi)), rel=1e-14)
    assert s.levy_tail(1.0) == pytest.approx(1 / math.sqrt(math.pi), rel=1e-14)
    assert s.levy_tail(1e300) < 1e-140
    t = np.logspace(-4, 4, 40)
    for spec in (s, MIX):
        tn = t * spec.levy_density(t)
        assert np.all(np.diff(tn) <= 0)
    parts = sum(BernsteinSpec.stable(b).levy_density(2.0) * w for w, b in MIX.components)
    assert MIX.levy_density(2.0) == pytest.approx(parts, rel=1e-14)


@pytest.mark.parametrize("spec", [BernsteinSpec.stable(0.5), BernsteinSpec.stable(0.3), MIX])
@pytest.mark.parametrize("lam", [0.1, 1.0, 10.0])
def test_tail_laplace_transform(spec, lam):
    f = lambda u: math.exp(-lam * math.exp(u)) * spec.levy_tail(math.exp(u)) * math.exp(u)  # noqa
    val = quad(f, -60, -math.log(lam), limit=200)[0] + quad(f, -math.log(lam), 8, limit=200)[0]
    assert val == pytest.approx(spec.phi(lam) / lam, rel=1e-6)


def test_conjugate():
    assert BernsteinSpec.stable(0.5).conjugate() == BernsteinSpec.stable(0.5)
    assert BernsteinSpec.stable(0.3).conjugate().beta == pytest.approx(0.7)
    conj = MIX.conjugate()
    lam = np.logspace(-4, 4, 33)
    assert np.allclose(MIX.phi(lam) * conj.phi(lam), lam, rtol=1e-8)


def test_conjugate_rejects_non_special():
    # a wiggly increasing table whose conjugate lam/phi is not concave
    lam = np.logspace(-2, 2, 50)
    phi = lam**0.5 * (1 + 0.5 * np.sin(3 * np.log(lam)) ** 2)
    phi = np.maximum.accumulate(phi) + 1e-9 * np.arange(50)
    tab = BernsteinSpec.tabulated(lam, phi)
    with pytest.raises(NotSpecialError):
        tab.conjugate(grid=lam)


def test_potential_density_exact():
    assert BernsteinSpec.stable(0.5).potential_density_exact(1.0) == pytest.approx(
        1 / math.sqrt(math.pi), rel=1e-14)
    for b in (0.2, 0.6):
        t = 3.7
        val = BernsteinSpec.stable(b).potential_density_exact(t)
        assert val * gamma(b) * t ** (1 - b) == pytest.approx(1.0, rel=1e-14)


def test_weak_scaling_witness():
    lam = np.logspace(-3, 3, 25)
    kap = np.logspace(0, 2, 9)
    w = verify_weak_scaling(BernsteinSpec.stable(0.5), lam, kap)
    assert (w.beta1, w.beta2, w.c1, w.c2) == pytest.approx((0.5, 0.5, 1, 1), rel=1e-12)
    assert w.valid
    wm = verify_weak_scaling(MIX, np.logspace(-8, 8, 33), kap)
    assert wm.beta1 == pytest.approx(0.3, abs=0.02)
    assert wm.beta2 == pytest.approx(0.7, abs=0.02)
    assert wm.akm_min >= 1.0
    assert math.isfinite(wm.c_star)
    with pytest.raises(DomainError):
        verify_weak_scaling(MIX, np.logspace(0, 2, 5), kap)


def test_serialization_round_trip():
    for spec in (BernsteinSpec.stable(0.4), MIX):
        again = BernsteinSpec.from_json(spec.to_json())
        assert again == spec
    assert BernsteinSpec.parse("mixture:0.5@0.3,0.5@0.7") == MIX
    assert BernsteinSpec.parse("stable:0.5") == BernsteinSpec.stable(0.5)
    with pytest.raises(DomainError):
        BernsteinSpec.parse("stable:x")
    with pytest.raises(DomainError):
        BernsteinSpec.parse("levy:0.5")


def test_normalization_keeps_scale():
    m = BernsteinSpec.mixture([(1.0, 0.3), (3.0, 0.7)], normalize=True)
    assert m.phi(1.0) == pytest.approx(1.0)
    assert m.scale == pytest.approx(4.0)


@pytest.mark.parametrize("bad", [0.0, 1.0, -0.2, 1.5])
def test_domain_errors(bad):
    with pytest.raises(DomainError):
        BernsteinSpec.stable(bad)
    with pytest.raises(DomainError):
        BernsteinSpec.mixture([(1.0, bad)])


@pytest.mark.parametrize("lam", [0.0, -1.0, float("nan")])
def test_phi_needs_positive_argument(lam):
    with pytest.raises(DomainError):
        BernsteinSpec.stable(0.5).phi(lam)


def test_concavity_on_log_grid():
    lam = np.logspace(-5, 5, 200)
    for spec in (BernsteinSpec.stable(0.5), MIX):
        v = spec.phi(lam)
        # concave: chord slopes are non-increasing
        slopes = np.diff(v) / np.diff(lam)
        assert np.all(np.diff(slopes) <= 1e-15 * np.abs(slopes[1:]))


def test_bisection_brackets_whole_range():
    assert bisect_increasing(np.log, 600.0) == pytest.approx(math.exp(600), rel=1e-11)
    with pytest.raises(BracketError):
        MIX.phi_inverse(1e-200)


@settings(max_examples=30)
@given(st.lists(st.tuples(st.floats(0.01, 10), betas), min_size=1, max_size=4))
def test_mixture_is_increasing_concave(comps):
    spec = BernsteinSpec.mixture(comps)
    lam = np.logspace(-4, 4, 60)
    v = spec.phi(lam)
    assert np.all(np.diff(v) > 0)
    d = spec.phi_prime(lam)
    assert np.all(np.diff(d) <= 0)
