import math

import numpy as np
import pytest
from scipy.special import erfc

from fracpoisson import BernsteinSpec, DensityEval, SamplerConfig
from fracpoisson.errors import AccuracyError, DomainError
from fracpoisson.montecarlo import (empirical_cdf_distance, inverse_cdf_distance,
                                    inverse_mean_check, sample_inverse, sample_stable,
                                    sample_stable_increment, uniform_exponential, write_samples)

CFG = SamplerConfig(beta=0.5, n_samples=100_000, seed=7)


def test_laplace_transform():
    x = sample_stable(CFG)
    v = np.exp(-x)
    se = v.std(ddof=1) / math.sqrt(len(v))
    assert abs(v.mean() - math.exp(-1)) <= 3 * se
    y = sample_stable(CFG, scale=2.0, n=50_000)
    v = np.exp(-0.5 * y)
    se = v.std(ddof=1) / math.sqrt(len(v))
    assert abs(v.mean() - math.exp(-2 * 0.5**0.5)) <= 3 * se


def test_half_matches_levy_cdf():
    x = np.sort(sample_stable(CFG))
    F = erfc(1 / (2 * np.sqrt(x)))
    n = len(x)
    ks = max(np.max(np.arange(1, n + 1) / n - F), np.max(F - np.arange(n) / n))
    assert ks <= 0.01


@pytest.mark.parametrize("beta", [0.3, 0.5])
def test_ks_bounds(beta):
    ev = DensityEval.for_spec(BernsteinSpec.stable(beta))
    assert empirical_cdf_distance(SamplerConfig(beta, 100_000, seed=3), ev, 1.0) <= 0.01
    assert empirical_cdf_distance(SamplerConfig(beta, 1000, seed=3), ev, 1.0) <= 0.05
    grid = np.logspace(-1, 1, 5)
    assert empirical_cdf_distance(SamplerConfig(beta, 10_000, seed=3), ev, 2.0, grid) <= 0.03


def test_ks_checks_arguments():
    ev = DensityEval.for_spec(BernsteinSpec.stable(0.5))
    with pytest.raises(DomainError):
        empirical_cdf_distance(SamplerConfig(0.3, 10_000), ev, 1.0)
    with pytest.raises(DomainError):
        empirical_cdf_distance(SamplerConfig(0.5, 100), ev, 1.0)


def test_reproducible_and_partition_invariant():
    a = sample_stable(CFG, n=10_000)
    b = sample_stable(CFG, n=10_000)
    assert np.array_equal(a, b)
    parts = np.concatenate([sample_stable(CFG, start=s, n=m)
                            for s, m in ((0, 1234), (1234, 5000), (6234, 3766))])
    assert np.array_equal(parts, a)
    assert not np.array_equal(a, sample_stable(SamplerConfig(0.5, seed=8), n=10_000))
    U, E = uniform_exponential(7, 4000, 200)
    assert np.all((U > 0) & (U < 1)) and np.all(E > 0)


def test_single_increment():
    rng = np.random.default_rng(1)
    a = [sample_stable_increment(0.4, 1.0, rng) for _ in range(5)]
    rng = np.random.default_rng(1)
    b = [sample_stable_increment(0.4, 1.0, rng) for _ in range(5)]
    assert a == b and all(x > 0 for x in a)
    with pytest.raises(DomainError):
        sample_stable_increment(1.0, 1.0, rng)
    with pytest.raises(DomainError):
        sample_stable_increment(0.5, 0.0, rng)


def test_first_passage_mean_and_law():
    cfg = SamplerConfig(beta=0.5, n_samples=20_000, seed=11, step=1e-3)
    x = sample_inverse(cfg, 1.0)
    assert np.all(x > 0)
    mean, se, exact = inverse_mean_check(cfg, 1.0, samples=x)
    assert exact == pytest.approx(1 / math.gamma(1.5))
    assert abs(mean - exact) <= 3 * se
    assert inverse_cdf_distance(cfg, 1.0, samples=x) <= 0.02


def test_first_passage_monotone_in_t():
    cfg = SamplerConfig(beta=0.5, n_samples=2000, seed=5, step=1e-3)
    # the same path is crossed later for a larger level when the step is shared
    a = sample_inverse(cfg, 1.0)
    b = sample_inverse(SamplerConfig(beta=0.5, n_samples=2000, seed=5, step=5e-4), 2.0)
    assert np.all(b >= a - 1e-12)


def test_first_passage_partition_invariant():
    cfg = SamplerConfig(beta=0.7, n_samples=6000, seed=2)
    whole = sample_inverse(cfg, 1.0)
    parts = np.concatenate([sample_inverse(cfg, 1.0, start=0, n=4100),
                            sample_inverse(cfg, 1.0, start=4100, n=1900)])
    assert np.array_equal(whole, parts)


def test_step_budget():
    cfg = SamplerConfig(beta=0.5, n_samples=10, step=1e-3, max_steps=256)
    with pytest.raises(AccuracyError):
        sample_inverse(cfg, 1.0)


def test_config_validation():
    for kw in ({"beta": 1.0}, {"beta": 0.5, "n_samples": 0}, {"beta": 0.5, "step": 0.0},
               {"beta": 0.5, "seed": -1}):
        with pytest.raises(DomainError):
            SamplerConfig(**kw)


def test_write_samples(tmp_path):
    p = tmp_path / "s.csv"
    write_samples(p, [0.1, 1 / 3], start=10)
    assert p.read_text().splitlines() == ["index,value", "10,0.10000000000000001",
                                          "11,0.33333333333333331"]
