"""Fundamental solutions q and p by subordination.

With a Gaussian base kernel and a stable time change, q and p have Fourier
representations in terms of Mittag-Leffler functions. We compare the two
routes at a few points.
"""
from fracpoisson import (BernsteinSpec, DensityEval, HeatKernelSpec, mass_p, p_fourier,
                         p_kernel, q_fourier, q_kernel)

beta = 0.5
ev = DensityEval.for_spec(BernsteinSpec.stable(beta))
gauss = HeatKernelSpec.gaussian()

print(f"{'t':>5} {'z':>5} {'q subord.':>14} {'q Fourier':>14} {'p subord.':>14} {'p Fourier':>14}")
for t in (0.5, 1.0, 4.0):
    for z in (0.0, 1.0, 3.0):
        qs = q_kernel(gauss, ev, t, z)[0]
        qf = q_fourier(gauss, beta, t, z)[0]
        ps = p_kernel(gauss, ev, t, z)[0]
        pf = p_fourier(gauss, beta, t, z)[0]
        print(f"{t:5.1f} {z:5.1f} {qs:14.8e} {qf:14.8e} {ps:14.8e} {pf:14.8e}")

# p is a probability density in z for every t
print()
for t in (0.1, 1.0, 10.0):
    print(f"mass of p at t={t:g}: {mass_p(gauss, ev, t):.8f}")
