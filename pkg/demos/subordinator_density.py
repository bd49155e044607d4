"""Density of a one-sided stable subordinator.

For beta = 1/2 the law of S_r is the Levy distribution, so the numerical
density can be checked against a closed form. For other indices we check
the Laplace transform exp(-r lam^beta) by direct quadrature.
"""
import numpy as np

from fracpoisson import BernsteinSpec, DensityEval

ev = DensityEval.for_spec(BernsteinSpec.stable(0.5))

print("beta = 1/2 against the Levy density")
print(f"{'t':>10} {'numeric':>14} {'closed form':>14} {'rel err':>10}")
r = 1.0
for t in np.logspace(-2, 3, 6):
    exact = r / (2 * np.sqrt(np.pi) * t**1.5) * np.exp(-r * r / (4 * t))
    num = ev.density(r, t)
    print(f"{t:10.3g} {num:14.6e} {exact:14.6e} {abs(num / exact - 1):10.1e}")

# Laplace round trip for a few indices
print()
print("Laplace transform against exp(-r lam^beta), r = 1")
for beta in (0.2, 0.5, 0.8):
    ev = DensityEval.for_spec(BernsteinSpec.stable(beta))
    for lam in (0.1, 1.0, 10.0):
        got = ev.laplace_numeric(1.0, lam)
        want = np.exp(-lam**beta)
        print(f"  beta={beta:.1f} lam={lam:5.1f}  {got:.12f}  {want:.12f}")

# mode of the density moves with beta
print()
for beta in (0.3, 0.5, 0.7):
    ev = DensityEval.for_spec(BernsteinSpec.stable(beta))
    print(f"mode of S_1 for beta={beta}: {ev.mode(1.0):.5f}")
