"""Time-fractional Poisson problem on the circle.

Solve D_t^w u = Delta u + f with f = cos x and u(0) = 0 by the Duhamel
formula, then check the answer against t^b E_{b,1+b}(-t^b) cos x and
measure the residual of the L1 Caputo discretisation.
"""
import numpy as np

from fracpoisson import (BernsteinSpec, DensityEval, HeatKernelSpec, WeightFunction,
                         duhamel_solve, graded_grid, pde_residual)
from fracpoisson.special import mittag_leffler

b = 0.5
ev = DensityEval.for_spec(BernsteinSpec.stable(b))
x = np.linspace(0, 2 * np.pi, 64, endpoint=False)
t = graded_grid(1.0, 48, 2.0)
f = lambda s, x: np.cos(x) * np.ones_like(s)  # noqa: E731

u = duhamel_solve(HeatKernelSpec.gaussian(), ev, None, f, t, x)

exact = np.array([0.0] + [s**b * mittag_leffler(b, 1 + b, -s**b) for s in t[1:]])
err = np.max(np.abs(u.values - exact[:, None] * np.cos(x)[None, :]))
print(f"max error against the Mittag-Leffler solution: {err:.2e}")

res = pde_residual(u, f, WeightFunction.caputo(b))
print(f"relative PDE residual with the L1 scheme:      {res:.2e}")

for k in (0, len(t) // 2, len(t) - 1):
    print(f"u(t={t[k]:.3f}, x=0) = {u.values[k, 0]:.8f}")
