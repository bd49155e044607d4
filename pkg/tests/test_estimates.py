import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracpoisson import (BernsteinSpec, DensityEval, EnvelopeSpec, H_ge1_diff, H_ge1_jump,
                         H_le1, HeatKernelSpec, ScaleFunction, VolumeFunction, envelope_diff,
                         envelope_jump, fit_line, n_solver, q_kernel, q_split_I1_I2,
                         ratio_sweep)
from fracpoisson.errors import DomainError

HALF = BernsteinSpec.stable(0.5)
MIX = BernsteinSpec.mixture([(0.5, 0.3), (0.5, 0.7)])


def test_H_le1_examples():
    assert H_le1(1, 2, 0.5, 1.0, 0.5) == 1.0
    assert H_le1(4, 2, 0.5, 1.0, 0.5) == pytest.approx(math.log(8))
    assert H_le1(1, 1, 0.5, 4.0, 1.0) == pytest.approx(0.25)
    assert H_le1(3, 1, 0.5, 1.0, 0.5) == pytest.approx(2.0)
    with pytest.raises(DomainError):
        H_le1(1, 2, 0.5, 1.0, 2.0)


def test_H_ge1_examples():
    for d, a, b in ((1, 1, 0.5), (2, 1.5, 0.3), (3, 2, 0.9)):
        assert H_ge1_jump(d, a, b, 1.0, 1.0) == 1.0
    assert H_ge1_jump(1, 1, 0.5, 1.0, 2.0) == pytest.approx(0.25)
    assert H_ge1_diff(1, 2, 0.5, 1.0, 2.0) == pytest.approx(math.exp(-4 ** (2 / 3)))
    t = 3.0
    r = t ** (0.5 / 2)
    assert H_ge1_diff(1, 2, 0.5, t, r) == pytest.approx(t ** (0.5 - 1 - 0.25) / math.e)
    with pytest.raises(DomainError):
        H_ge1_diff(1, 1.5, 0.5, 1.0, 2.0)
    with pytest.raises(DomainError):
        H_ge1_jump(1, 1, 0.5, 1.0, 0.5)


@settings(max_examples=40)
@given(st.floats(0.05, 0.95), st.floats(1.0, 3.0), st.floats(-3, 3))
def test_regimes_meet_continuously_for_jumps(beta, alpha, logt):
    # H_le1 and H_ge1_jump agree at r = t^(beta/alpha) when d < 2 alpha
    t = 10.0**logt
    r = t ** (beta / alpha)
    assert H_le1(1, alpha, beta, t, r) == pytest.approx(H_ge1_jump(1, alpha, beta, t, r),
                                                        rel=1e-9)


def test_n_solver():
    P = ScaleFunction(2.0)
    assert n_solver(HALF, P, 1.0, 1.0) == pytest.approx(1.0)
    assert n_solver(HALF, P, 1.0, 2.0) == pytest.approx(4 ** (2 / 3))
    # the defining relation 1/phi(n/t) = Phi(r/n), by bisection for a mixture
    for t, r in ((0.1, 1.0), (1.0, 3.0), (10.0, 0.5)):
        n = n_solver(MIX, P, t, r)
        assert 1 / MIX.phi(n / t) == pytest.approx(float(P(r / n)), rel=1e-10)
    n = [n_solver(MIX, P, t, 2.0) for t in np.logspace(-2, 2, 9)]
    assert np.all(np.diff(n) <= 0)
    tab = BernsteinSpec.tabulated(np.logspace(-8, 8, 801), np.logspace(-8, 8, 801) ** 0.5)
    assert n_solver(tab, P, 1.0, 2.0) == pytest.approx(4 ** (2 / 3), rel=1e-8)


def test_envelope_jump_closed_form():
    # V(Phi^{-1}(r)) = r^(d/alpha): the integral is [r^(2 - d/alpha) / (2 - d/alpha)]
    d, a = 1.0, 1.5
    P, V = ScaleFunction(a), VolumeFunction(d)
    t, z = 2.0, 0.3
    ph = HALF.phi(1 / t)
    e = 2 - d / a
    want = ph / t * ((2 / ph) ** e - z ** (a * e)) / e
    assert envelope_jump(HALF, P, V, t, z) == pytest.approx(want, rel=1e-9)
    # far branch
    z = 5.0
    assert envelope_jump(HALF, P, V, t, z) == pytest.approx(1 / (t * ph**2 * z * z**a))


def test_envelope_jump_matches_H_forms():
    P, V = ScaleFunction(1.0), VolumeFunction(1.0)
    ratios = []
    for t in np.logspace(-2, 2, 5):
        for z in t**0.5 * np.logspace(-2, 2, 9):
            H = H_le1(1, 1, 0.5, t, z) if z <= t**0.5 else H_ge1_jump(1, 1, 0.5, t, z)
            ratios.append(envelope_jump(HALF, P, V, t, z) / H)
    assert 1.0 - 1e-12 <= min(ratios) and max(ratios) <= 2.0


def test_envelope_diff():
    P, V = ScaleFunction(2.0), VolumeFunction(1.0)
    for t in (0.1, 1.0, 10.0):
        for z in (0.01, 1.0, 10.0):
            lo, up = envelope_diff(MIX, P, V, t, z)
            assert 0 <= lo <= up
    # at the boundary n = 1 the prefactor is 1/(t phi(1/t) V(Phi^{-1}(1/phi(1/t))))
    t = 1.0
    lo, up = envelope_diff(HALF, P, V, t, 1.0 + 1e-12, c_exp=(1.0, 1.0))
    assert up * math.e == pytest.approx(1.0, rel=1e-9)
    with pytest.raises(DomainError):
        envelope_diff(HALF, P, V, 1.0, 1.0, c_exp=(0.5, 1.0))


def test_q_split():
    ev = DensityEval.for_spec(HALF)
    cauchy = HeatKernelSpec.cauchy()
    for z in (0.01, 0.1, 0.5):
        i1, i2 = q_split_I1_I2(cauchy, ev, 1.0, z)
        assert i1 >= 0 and i2 >= 0 and i1 / (i1 + i2) >= 0.5
    gauss = HeatKernelSpec.gaussian()
    i1, i2 = q_split_I1_I2(gauss, ev, 1.0, 3.0)
    assert i2 >= 0.2 * i1
    # with the true density the pieces add up to q
    i1, i2 = q_split_I1_I2(gauss, ev, 1.0, 1.0, envelope=False)
    assert i1 + i2 == pytest.approx(q_kernel(gauss, ev, 1.0, 1.0)[0], rel=1e-8)


def test_envelope_spec():
    e = EnvelopeSpec("stable_jump", d=1, alpha=1, beta=0.5)
    assert e.regime(1.0, 0.5) == "near" and e.regime(1.0, 2.0) == "far"
    assert e.band(1.0, 2.0) == (0.25, 0.25)
    g = EnvelopeSpec("general_diffusion", alpha=2.0, spec=MIX)
    lo, up = g.band(1.0, 3.0)
    assert lo < up
    assert json.loads(json.dumps(g.to_dict()))["spec"]["kind"] == "mixture"
    with pytest.raises(DomainError):
        EnvelopeSpec("general_jump")
    with pytest.raises(DomainError):
        EnvelopeSpec("stable_diffusion", alpha=1.0)
    with pytest.raises(DomainError):
        EnvelopeSpec("other")


def test_fit_line():
    x = np.linspace(0, 1, 11)
    s, a, r2 = fit_line(x, 3 - 2 * x)
    assert (s, a, r2) == pytest.approx((-2, 3, 1))
    with pytest.raises(DomainError):
        fit_line([1.0], [2.0])


def test_ratio_sweep_cauchy(tmp_path):
    ev = DensityEval.for_spec(HALF)
    k = HeatKernelSpec.cauchy()
    env = EnvelopeSpec("stable_jump", d=1, alpha=1, beta=0.5)
    t_grid = np.logspace(-1, 2, 4)
    rep = ratio_sweep(lambda t, z: q_kernel(k, ev, t, z), env, t_grid,
                      lambda t: t**0.5 * np.logspace(-1, 1, 5))
    s = rep.summary()
    assert set(s) == {"near", "far"}
    # q/H depends on z/t^(1/2) only, so each column of the sweep repeats
    r = rep.ratio.reshape(4, 5)
    assert np.allclose(r, r[0], rtol=1e-6)
    assert 1 < rep.band_constant() < 20
    rep.to_csv(tmp_path / "r.csv")
    assert len((tmp_path / "r.csv").read_text().splitlines()) == 21
    assert json.loads(rep.to_json())["summary"]["near"]["count"] == 12
    with pytest.raises(DomainError):
        ratio_sweep(lambda t, z: 1.0, env, [1.0], [1.0])
