"""Closed forms and series used as independent oracles.

One-sided stable densities (Laplace transform ``exp(-lam**beta)``), their
distribution functions, inverse-stable densities and the two-parameter
Mittag-Leffler function on the real line.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import IntegrationWarning, quad
from scipy.special import erfcx, gamma, gammaln

from .errors import AccuracyError, DomainError

__all__ = [
    "StableDensityParams",
    "stable_density_g",
    "stable_cdf",
    "mittag_leffler",
    "inverse_stable_density",
    "SERIES_THRESHOLD",
    "ML_TAYLOR_RADIUS",
]

#: ``x`` at and above which the convergent large-argument series is used.
SERIES_THRESHOLD = 2.0
#: ``|z|`` up to which the Mittag-Leffler Taylor series is summed directly.
ML_TAYLOR_RADIUS = 1.0

_ORDER = 32
_TOL = 1e-10


@dataclass(frozen=True)
class StableDensityParams:
    beta: float
    method: str = "auto"  # "series", "zolotarev", "closed_form_half" or "auto"

    def __post_init__(self):
        if not 0.0 < self.beta < 1.0:
            raise DomainError(f"beta must lie in (0, 1), got {self.beta}")
        if self.method not in ("auto", "series", "zolotarev", "closed_form_half"):
            raise DomainError(f"unknown method {self.method!r}")
        if self.method == "closed_form_half" and self.beta != 0.5:
            raise DomainError("closed_form_half requires beta = 1/2")


def _check_beta(beta):
    if not 0.0 < beta < 1.0:
        raise DomainError(f"beta must lie in (0, 1), got {beta}")


def _zolotarev_A(beta, theta):
    """Kanter's function on (0, pi); increasing from A(0+) to +inf."""
    b = beta
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        return (np.sin(b * theta) ** (b / (1 - b)) * np.sin((1 - b) * theta)
                / np.sin(theta) ** (1 / (1 - b)))


@lru_cache(maxsize=None)
def _panel_rule(order):
    """Gauss-Legendre panels on [0, pi], graded geometrically toward both ends."""
    u, w = leggauss(order)
    edges = np.pi * np.array([0.0] + [2.0**-k for k in range(14, 0, -1)]
                             + [1 - 2.0**-k for k in range(2, 11)] + [1.0])
    half = np.diff(edges) / 2
    mid = (edges[:-1] + edges[1:]) / 2
    nodes = (mid[:, None] + half[:, None] * u[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _zolotarev_parts(beta, x, cdf=False):
    """Return ``(k, A0, integral, error)`` for the Zolotarev form.

    ``k = x**(-beta/(1-beta))`` (an array), ``A0 = A(0)`` and ``integral`` is
    the panel-rule value of ``int A(theta) exp(-k (A(theta) - A0)) dtheta``
    over ``(0, pi)``; with ``cdf=True`` the integrand drops the leading ``A``
    factor. The caller multiplies by ``exp(-k A0)`` and its own prefactor.
    ``error`` compares against a rule of half the order.
    """
    b = beta
    k = x ** (-b / (1 - b))
    A0 = b ** (b / (1 - b)) * (1 - b)
    th, wt = _panel_rule(_ORDER)
    th2, wt2 = _panel_rule(_ORDER // 2)

    def integrate(nodes, weights):
        A = _zolotarev_A(b, nodes)
        with np.errstate(over="ignore", invalid="ignore", under="ignore"):
            e = np.exp(-k[:, None] * (A[None, :] - A0))
            f = e if cdf else A[None, :] * e
        f = np.nan_to_num(f, nan=0.0, posinf=0.0)
        return f @ weights

    fine = integrate(th, wt)
    coarse = integrate(th2, wt2)
    err = np.abs(fine - coarse)
    # exp(-k A0) underflows: the value is 0 whatever the integral is
    err[k * A0 > 745.0] = 0.0
    return k, A0, fine, err


def _zolotarev_scalar(beta, x, cdf=False):
    b = beta
    k = x ** (-b / (1 - b))
    A0 = b ** (b / (1 - b)) * (1 - b)

    def f(theta):
        A = _zolotarev_A(b, theta)
        if not np.isfinite(A):
            return 0.0
        e = np.exp(-k * (A - A0))
        return e if cdf else A * e

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        val, err = quad(f, 0.0, np.pi, epsabs=0.0, epsrel=1e-13, limit=400)
    if not err <= 1e-8 * abs(val) + 1e-300:
        raise AccuracyError("Zolotarev quadrature did not converge at x=%g" % x, err)
    return val


def _g_zolotarev(beta, x):
    b = beta
    k, A0, integral, err = _zolotarev_parts(b, x)
    bad = err > _TOL * np.abs(integral)
    for i in np.flatnonzero(bad):
        integral[i] = _zolotarev_scalar(b, x[i])
    with np.errstate(under="ignore"):
        return b / ((1 - b) * np.pi) * x ** (-1 / (1 - b)) * np.exp(-k * A0) * integral


def _g_series(beta, x, max_terms=2000):
    """Large-argument series ``sum (-1)^(k+1) Gamma(bk+1)/k! sin(pi b k) x^(-bk-1) / pi``."""
    b = beta
    out = np.empty_like(x)
    for i, xi in enumerate(x):
        if np.isinf(xi):
            out[i] = 0.0
            continue
        total = 0.0
        biggest = 0.0
        lx = np.log(xi)
        for k in range(1, max_terms + 1):
            mag = np.exp(gammaln(b * k + 1) - gammaln(k + 1) - (b * k + 1) * lx)
            term = (-1.0) ** (k + 1) * mag * np.sin(np.pi * b * k)
            total += term
            biggest = max(biggest, mag)
            if k > 3 and mag <= 1e-17 * abs(total):
                break
        else:
            raise AccuracyError("stable series did not converge at x=%g" % xi, mag)
        if biggest > 1e3 * abs(total):
            raise AccuracyError("cancellation in stable series at x=%g" % xi, biggest * 1e-16)
        out[i] = total / np.pi
    return out


def stable_density_g(beta, x, method="auto"):
    """Density of the standard one-sided ``beta``-stable law.

    The law has Laplace transform ``exp(-lam**beta)``. ``method="auto"``
    uses the large-``x`` series for ``x >= SERIES_THRESHOLD`` and Zolotarev's
    integral representation below it. The integral is evaluated with a
    vectorized composite Gauss-Legendre rule whose embedded half-resolution
    estimate sends hard points to adaptive quadrature.
    """
    _check_beta(beta)
    params = StableDensityParams(beta, method)
    xa = np.atleast_1d(np.asarray(x, dtype=float)).astype(float)
    if np.any(xa < 0):
        raise DomainError("x must be non-negative")
    shape = np.shape(x)
    xa = xa.ravel()
    out = np.zeros_like(xa)
    pos = xa > 0
    if params.method == "closed_form_half":
        xp = xa[pos]
        out[pos] = xp**-1.5 * np.exp(-1.0 / (4 * xp)) / (2 * np.sqrt(np.pi))
    elif params.method == "series":
        out[pos] = _g_series(beta, xa[pos])
    elif params.method == "zolotarev":
        out[pos] = _g_zolotarev(beta, xa[pos])
    else:
        big = pos & (xa >= SERIES_THRESHOLD)
        small = pos & ~big
        if np.any(big):
            out[big] = _g_series(beta, xa[big])
        if np.any(small):
            out[small] = _g_zolotarev(beta, xa[small])
    return float(out[0]) if shape == () else out.reshape(shape)


def stable_cdf(beta, x, upper=False):
    """``P(S <= x)`` for the standard one-sided stable law (``P(S > x)`` if ``upper``).

    Small ``x`` uses the Zolotarev form ``(1/pi) int exp(-k A) dtheta``; the
    upper tail for ``x >= SERIES_THRESHOLD`` uses the integrated series.
    """
    _check_beta(beta)
    b = beta
    xa = np.atleast_1d(np.asarray(x, dtype=float)).astype(float).ravel()
    shape = np.shape(x)
    lower = np.zeros_like(xa)
    tail = np.ones_like(xa)
    pos = xa > 0
    big = pos & (xa >= SERIES_THRESHOLD)
    small = pos & ~big
    if np.any(small):
        xs = xa[small]
        k, A0, integral, err = _zolotarev_parts(b, xs, cdf=True)
        for i in np.flatnonzero(err > _TOL * np.abs(integral)):
            integral[i] = _zolotarev_scalar(b, xs[i], cdf=True)
        with np.errstate(under="ignore"):
            lower[small] = np.exp(-k * A0) * integral / np.pi
        tail[small] = 1.0 - lower[small]
    for i in np.flatnonzero(big):
        lx = np.log(xa[i])
        total = 0.0
        for k in range(1, 2000):
            mag = np.exp(gammaln(b * k) - gammaln(k + 1) - b * k * lx)
            total += (-1.0) ** (k + 1) * mag * np.sin(np.pi * b * k)
            if k > 3 and mag <= 1e-17 * abs(total):
                break
        tail[i] = total / np.pi
        lower[i] = 1.0 - tail[i]
    res = tail if upper else lower
    return float(res[0]) if shape == () else res.reshape(shape)


def inverse_stable_density(beta, t, r):
    """Density at ``r`` of the first-passage time ``E_t`` of a ``beta``-stable subordinator.

    ``h_t(r) = (t/beta) r**(-1-1/beta) g_beta(t r**(-1/beta))``.
    """
    _check_beta(beta)
    t = np.asarray(t, dtype=float)
    r = np.asarray(r, dtype=float)
    if np.any(~(t > 0)) or np.any(~(r > 0)):
        raise DomainError("t and r must be positive")
    x = t * r ** (-1.0 / beta)
    val = (t / beta) * r ** (-1.0 - 1.0 / beta) * stable_density_g(beta, x)
    return float(val) if np.ndim(val) == 0 else val


# -- Mittag-Leffler ----------------------------------------------------------

def _ml_taylor(beta, gam, z, max_terms=10000):
    total = 0.0
    biggest = 0.0
    for k in range(max_terms):
        if z == 0.0:
            return 1.0 / gamma(gam)
        lmag = k * np.log(abs(z)) - gammaln(beta * k + gam)
        mag = np.exp(lmag)
        sign = np.sign(z) ** k * np.sign(gamma(beta * k + gam))
        total += sign * mag
        biggest = max(biggest, mag)
        if k > 5 and mag < 1e-17 * max(abs(total), 1e-300) and k * beta > abs(z):
            break
    else:
        raise AccuracyError("Mittag-Leffler series did not converge for z=%g" % z, mag)
    if biggest * 1e-16 > 1e-10 * abs(total):
        raise AccuracyError("cancellation in Mittag-Leffler series at z=%g" % z,
                            biggest * 1e-16)
    return total


def _sinpi(a):
    """``sin(pi a)``, exactly zero at integers (the ``x`` term must vanish for ``gam = beta``)."""
    return 0.0 if a == round(a) else np.sin(np.pi * a)


def _ml_integral(beta, gam, z):
    """Integral representation for z < 0, 0 < beta < 1, gam < 1 + beta."""
    x = -z
    c1 = _sinpi(1 - gam)
    c2 = _sinpi(1 - gam + beta)
    cb = np.cos(np.pi * beta)
    p = (1 - gam) / beta

    def kern(chi):
        if chi == 0.0:
            return 0.0
        with np.errstate(over="ignore", under="ignore"):
            return (chi**p * np.exp(-chi ** (1 / beta)) * (chi * c1 + x * c2)
                    / (chi * chi + 2 * chi * x * cb + x * x))

    # exp(-chi**(1/beta)) underflows beyond chi = 750**beta.
    top = 750.0**beta
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        if x < top:
            v1, e1 = quad(kern, 0.0, x, epsabs=0.0, epsrel=1e-13, limit=200)
            v2, e2 = quad(kern, x, top, epsabs=0.0, epsrel=1e-13, limit=200)
        else:
            v1, e1 = quad(kern, 0.0, top, epsabs=0.0, epsrel=1e-13, limit=200,
                          points=[1.0])
            v2, e2 = 0.0, 0.0
    val = (v1 + v2) / (beta * np.pi)
    err = (e1 + e2) / (beta * np.pi)
    if err > 1e-9 * abs(val) + 1e-300:
        raise AccuracyError("Mittag-Leffler integral did not converge at z=%g" % z, err)
    return val


def _ml_scalar(beta, gam, z, closed_forms=True):
    if beta == 1.0 and gam == 1.0:
        return np.exp(z)
    if z == 0.0:
        return 1.0 / gamma(gam)
    if closed_forms and beta == 0.5 and gam in (0.5, 1.0) and z < 0:
        return float(ml_half(z, gam))
    if abs(z) <= ML_TAYLOR_RADIUS or z > 0 or beta == 1.0:
        return _ml_taylor(beta, gam, z)
    # reduce gamma below 1 + beta, then climb back with
    # E_{b, g+b}(z) = (E_{b, g}(z) - 1/Gamma(g)) / z
    steps = 0
    g0 = gam
    while g0 >= 1 + beta:
        g0 -= beta
        steps += 1
    val = _ml_scalar(beta, g0, z, closed_forms) if g0 != gam else _ml_integral(beta, g0, z)
    for _ in range(steps):
        val = (val - 1.0 / gamma(g0)) / z
        g0 += beta
    return val


def mittag_leffler(beta, gam, z, closed_forms=True):
    """Two-parameter Mittag-Leffler function ``E_{beta,gam}(z)`` for real ``z``.

    Taylor series for ``|z| <= ML_TAYLOR_RADIUS`` (and for positive ``z``);
    for ``z < -ML_TAYLOR_RADIUS`` the real-line integral representation of
    the function, valid for ``0 < beta < 1``. At ``beta = 1/2`` the
    ``erfcx`` forms are used for ``gam`` in ``{1/2, 1}`` (and, through the
    recurrence, ``gam = 3/2, 2, ...``) unless ``closed_forms`` is false.
    """
    if not 0.0 < beta <= 1.0:
        raise DomainError(f"beta must lie in (0, 1], got {beta}")
    if not gam > 0:
        raise DomainError(f"gamma must be positive, got {gam}")
    za = np.asarray(z, dtype=float)
    out = np.array([_ml_scalar(beta, gam, float(v), closed_forms) for v in za.ravel()])
    return float(out[0]) if za.ndim == 0 else out.reshape(za.shape)


def ml_half(z, gam=1.0):
    """Closed forms at ``beta = 1/2``: ``E_{1/2}(-x) = erfcx(x)`` and
    ``E_{1/2,1/2}(-x) = 1/sqrt(pi) - x erfcx(x)``."""
    x = -np.asarray(z, dtype=float)
    if gam == 1.0:
        return erfcx(x)
    if gam == 0.5:
        return 1 / np.sqrt(np.pi) - x * erfcx(x)
    raise DomainError("closed form available for gam in {1, 1/2} only")
