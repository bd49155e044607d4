"""Independent high-precision reference values (mpmath)."""
import math

import mpmath as mp


def ml_series(beta, gam, z, dps=30):
    """Mittag-Leffler ``E_{beta,gam}(z)`` by its power series in extended precision.

    The terms peak near ``|z|**(1/beta)`` in size, so the working precision and the
    number of terms grow with it.
    """
    scale = abs(z) ** (1 / beta)
    with mp.workdps(dps + int(scale / math.log(10)) + 10):
        b, g, z = mp.mpf(beta), mp.mpf(gam), mp.mpf(z)
        kmin = int(2 * scale / beta) + 20
        tol = mp.mpf(10) ** (-dps)
        total = mp.mpf(0)
        k = 0
        while True:
            term = z**k / mp.gamma(b * k + g)
            total += term
            if k > kmin and abs(term) < tol * max(1, abs(total)):
                break
            k += 1
        return float(total)


def stable_density(beta, x, dps=40):
    """One-sided stable density from Zolotarev's integral in extended precision:
    ``b x**(-1/(1-b)) / ((1-b) pi) int_0^pi A exp(-x**(-b/(1-b)) A) dtheta``."""
    with mp.workdps(dps):
        b = mp.mpf(beta)
        x = mp.mpf(x)

        def A(th):
            return mp.sin(b * th) ** (b / (1 - b)) * mp.sin((1 - b) * th) \
                / mp.sin(th) ** (1 / (1 - b))

        k = x ** (-b / (1 - b))
        # the integrand peaks sharply near 0 for small x
        pts = [0] + [mp.pi * mp.mpf(2) ** -j for j in range(14, 0, -1)] + [mp.pi]
        val = mp.quad(lambda th: A(th) * mp.exp(-k * A(th)), pts)
        return b / ((1 - b) * mp.pi) * x ** (-1 / (1 - b)) * val


def fourier_cos(hat, z, dps=20):
    """``(1/pi) int_0^oo cos(xi z) hat(xi) dxi``.

    ``[0, 1]`` goes to tanh-sinh, which copes with a non-smooth ``hat`` at 0.
    """
    with mp.workdps(dps):
        if z == 0:
            return float(mp.quad(hat, [0, 1, 10, mp.inf]) / mp.pi)
        f = lambda x: mp.cos(x * z) * hat(x)  # noqa: E731
        head = mp.quad(f, [0, 1])
        return float((head + mp.quadosc(f, [1, mp.inf], omega=z)) / mp.pi)
