"""Ratio of q to its two-sided envelope for the Cauchy kernel.

The ratio should stay inside a fixed band over many decades of t and z.
"""
import numpy as np

from fracpoisson import BernsteinSpec, DensityEval, EnvelopeSpec, HeatKernelSpec, q_kernel
from fracpoisson import ratio_sweep

ev = DensityEval.for_spec(BernsteinSpec.stable(0.5))
cauchy = HeatKernelSpec.cauchy()
env = EnvelopeSpec("stable_jump", d=1, alpha=1, beta=0.5)

t_grid = np.logspace(-2, 2, 5)
rep = ratio_sweep(lambda t, z: q_kernel(cauchy, ev, t, z), env, t_grid,
                  lambda t: t**0.5 * np.logspace(-2, 2, 9))

for regime, s in rep.summary().items():
    print(f"{regime:>5}: n={s['count']:3d}  min ratio {s['min']:.4f}  max ratio {s['max']:.4f}")
print("band constant:", round(rep.band_constant(), 4))
