"""First passage time E_t of a mixture subordinator.

phi(lam) = 0.5 lam^0.3 + 0.5 lam^0.7 has no closed-form density, so we look
at the mass of h_t and at the identity w * G = 1 numerically.
"""
import numpy as np
from scipy.integrate import trapezoid

from fracpoisson import BernsteinSpec, DensityEval

spec = BernsteinSpec.mixture([(0.5, 0.3), (0.5, 0.7)])
ev = DensityEval.for_spec(spec)

print("phi on a few points:", [round(float(spec.phi(x)), 6) for x in (0.5, 1.0, 2.0)])

# integrate h_t(r) in log r, where it is smooth
u = np.linspace(np.log(1e-12), np.log(1e4), 4000)
r = np.exp(u)
for t in (0.1, 1.0, 10.0):
    mass = trapezoid(r * ev.inverse_density_array(t, r), u)
    print(f"t={t:5.1f}  int h_t = {mass:.8f}")

# the renewal identity: the tail of the Levy measure convolved with G is 1
print()
for t in (0.01, 1.0, 100.0):
    print(f"w * G at t={t:g}: {ev.w_conv_G(t):.10f}")
