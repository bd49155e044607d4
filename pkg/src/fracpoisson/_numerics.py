"""Shared quadrature and Laplace-inversion helpers."""
from __future__ import annotations

import warnings

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import IntegrationWarning, quad

from .errors import AccuracyError

# Weideman-Trefethen hyperbolic contour, parameters optimized for transforms
# analytic off the negative real axis.
_H, _MU, _ALPHA = 1.0818, 4.4921, 1.1721


def contour_parameters(growth_index=0.5, nodes=None):
    """Return ``(nodes, h*nodes, mu*t/nodes, alpha)`` for the hyperbolic contour.

    ``growth_index`` is the largest exponent ``b`` such that the transform
    behaves like ``exp(-c z**b)`` at infinity. For ``b > 1/2`` this grows
    outside the sector ``|arg z| < pi/(2b)``, so the contour is narrowed to
    90% of that sector; the step and scale constants for that case were
    tuned on one-sided stable transforms.
    """
    if growth_index <= 0.5:
        return nodes or 16, _H, _MU, _ALPHA
    alpha = min(_ALPHA, 0.9 * (np.pi / (2 * growth_index) - np.pi / 2))
    default = 32 if growth_index <= 0.75 else 48
    return nodes or default, 2.75, 0.3, alpha


def invert_laplace(F, t, nodes=None, growth_index=0.5, roundoff=False):
    """Bromwich inversion along a hyperbolic (Talbot-class) contour.

    ``F`` maps a complex array of abscissae of shape ``(len(t), 2*nodes+1)``
    to transform values of the same shape. Returns real values at ``t``, and
    with ``roundoff=True`` also a round-off bound from the absolute sum.
    """
    n, ch, cm, alpha = contour_parameters(growth_index, nodes)
    t = np.atleast_1d(np.asarray(t, dtype=float))[:, None]
    h = ch / n
    mu = cm * n / t
    u = np.arange(-n, n + 1) * h
    z = mu * (1 + np.sin(1j * u - alpha))
    dz = mu * 1j * np.cos(1j * u - alpha)
    with np.errstate(over="ignore", invalid="ignore", under="ignore"):
        terms = np.exp(z * t) * F(z) * dz
    terms = np.nan_to_num(terms, nan=0.0, posinf=0.0, neginf=0.0)
    val = (h / (2j * np.pi) * terms.sum(axis=1)).real
    if roundoff:
        return val, 8e-16 * h / (2 * np.pi) * np.abs(terms).sum(axis=1)
    return val


def invert_laplace_checked(F, t, nodes=None, growth_index=0.5):
    """Inversion with a self-check: returns ``(values, error_estimates)``.

    The error estimate is the disagreement between ``n`` and ``n + n // 2``
    contour points. Refining by larger factors only amplifies round-off in
    double precision.
    """
    n = contour_parameters(growth_index, nodes)[0]
    a, ra = invert_laplace(F, t, n, growth_index, roundoff=True)
    b, rb = invert_laplace(F, t, n + n // 2, growth_index, roundoff=True)
    return a, np.abs(a - b) + ra + rb


def log_quad(f, a, b, points=(), epsrel=1e-10, epsabs=0.0, limit=400):
    """``int_a^b f(s) ds`` for ``0 < a < b <= inf`` via ``s = exp(u)``.

    ``points`` are breakpoints in ``s``. Returns ``(value, error)``.
    """
    ua = np.log(a)
    ub = np.log(b) if np.isfinite(b) else np.inf

    def g(u):
        if u > 700.0:
            return 0.0
        s = np.exp(u)
        return f(s) * s

    brk = sorted(np.log(p) for p in points if a < p < b)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        if np.isinf(ub):
            edges = [ua] + brk
            total, err = 0.0, 0.0
            for lo, hi in zip(edges[:-1], edges[1:]):
                v, e = quad(g, lo, hi, epsabs=epsabs, epsrel=epsrel, limit=limit)
                total += v
                err += e
            v, e = quad(g, edges[-1], np.inf, epsabs=epsabs, epsrel=epsrel, limit=limit)
            return total + v, err + e
        v, e = quad(g, ua, ub, points=brk or None, epsabs=epsabs, epsrel=epsrel, limit=limit)
        return v, e


def support_window(f_log, center, below=40.0, above=12.0, n=241, cutoff=1e-14):
    """Locate where a positive integrand (in ``u = log s``) is non-negligible.

    ``f_log`` is evaluated vectorized on ``n`` points of
    ``[center - below, center + above]``. Returns ``(u_lo, u_hi, u_peak)``
    bracketing the region where the integrand exceeds ``cutoff`` times its
    running maximum.
    """
    u = np.linspace(center - below, center + above, n)
    vals = np.abs(np.nan_to_num(f_log(u), nan=0.0))
    peak = vals.max()
    if not peak > 0:
        return u[0], u[-1], center
    keep = np.flatnonzero(vals > cutoff * peak)
    lo = u[max(keep[0] - 1, 0)]
    hi = u[min(keep[-1] + 1, n - 1)]
    return lo, hi, u[np.argmax(vals)]


def quad_window(f_log, lo, hi, points=(), epsrel=1e-10, epsabs=0.0, limit=400):
    """Adaptive quadrature of ``f_log(u)`` over ``[lo, hi]`` with breakpoints.

    ``f_log`` is called with scalars. Returns ``(value, error)``.
    """
    brk = sorted(p for p in points if lo < p < hi)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        v, e = quad(lambda u: float(f_log(np.array([u]))[0]), lo, hi, points=brk or None,
                    epsabs=epsabs, epsrel=epsrel, limit=limit)
    return v, e


def gauss_panels(lo, hi, panels, order):
    """Composite Gauss-Legendre nodes and weights on ``[lo, hi]``."""
    x, w = leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    half = np.diff(edges)[:, None] / 2
    mid = (edges[:-1] + edges[1:])[:, None] / 2
    return (mid + half * x).ravel(), (half * w).ravel()


def check_error(value, err, rtol, what):
    if not err <= rtol * abs(value) + 1e-300:
        raise AccuracyError(f"{what}: error estimate {err:.3g} exceeds tolerance", err)
