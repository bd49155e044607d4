"""Sampling the stable subordinator and its first passage time.

Kanter's representation gives exact draws of S_1. Walking the subordinator
with small steps gives approximate draws of E_t, whose mean is t^b / Gamma(1+b).
"""
import numpy as np

from fracpoisson import BernsteinSpec, DensityEval, SamplerConfig, empirical_cdf_distance
from fracpoisson.montecarlo import inverse_mean_check, sample_stable

cfg = SamplerConfig(beta=0.5, n_samples=100_000, seed=2024)
x = sample_stable(cfg)
print("E exp(-S_1):", np.exp(-x).mean().round(5), "vs", np.exp(-1).round(5))

ev = DensityEval.for_spec(BernsteinSpec.stable(0.5))
print("KS distance to the exact law:", round(empirical_cdf_distance(cfg, ev, 1.0), 5))

walk = SamplerConfig(beta=0.5, n_samples=20_000, seed=2024, step=1e-3)
mean, se, exact = inverse_mean_check(walk, 1.0)
print(f"mean of E_1: {mean:.4f} +- {se:.4f}  (exact {exact:.4f})")
