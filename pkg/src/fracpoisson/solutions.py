"""Fundamental solutions of the time-fractional equation and related identities.

With ``pbar`` the subordinator density and ``h_t`` the density of the
first-passage time ``E_t``,

    q(t, z) = int_0^inf p0(r, z) pbar(r, t) dr,
    p(t, z) = int_0^inf p0(r, z) h_t(r) dr = E[p0(E_t, z)].

``q`` is the kernel of the fractional Poisson problem with zero initial data
and ``p`` the kernel of the homogeneous problem. For a stable subordinator
and a concrete kernel with Fourier symbol ``psi`` the Fourier transforms are
``t^(b-1) E_{b,b}(-psi t^b)`` and ``E_b(-psi t^b)``, which gives independent
oracles.
"""
from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import IntegrationWarning, quad, trapezoid
from scipy.special import beta as beta_fn
from scipy.special import betainc, gamma, roots_jacobi

from . import __version__
from ._numerics import quad_window
from .errors import AccuracyError, DomainError, UnsupportedOperation
from .kernels import p0_radial
from .special import mittag_leffler

__all__ = [
    "SolutionField", "WeightFunction", "q_kernel", "p_kernel", "q_fourier", "p_fourier",
    "caputo_w_derivative", "graded_grid", "cumulative_identity_residual",
    "integrated_conjugate_residual", "conjugate_identity_residual", "duhamel_solve",
    "pde_residual", "mass_q", "mass_p",
]

# Integrand cut-off relative to its running maximum.
CUTOFF = 1e-14


def _check_tz(t, z):
    if not t > 0:
        raise DomainError("t must be positive")
    if not z >= 0:
        raise DomainError("z must be non-negative")


def _require_concrete(kspec):
    if not kspec.concrete:
        raise DomainError("fundamental solutions need a concrete kernel")


def _integrate_log_r(integrand, centers, epsrel, noise=None):
    """``int_0^inf F(r) dr`` for ``F`` given on arrays, via ``u = log r``.

    The window is found by scanning ``[min(centers) - 40, max(centers) + 15]``
    and cutting where ``r F(r)`` drops below ``CUTOFF`` times its maximum.
    ``noise(r)``, if given, bounds the absolute error of ``F`` pointwise; its
    integral is an accuracy floor that is added to the returned error.
    """
    f_log = lambda u: np.exp(u) * integrand(np.exp(u))  # noqa: E731
    lo, hi = min(centers) - 40.0, max(centers) + 15.0
    u = np.linspace(lo, hi, 521)
    vals = np.abs(np.nan_to_num(f_log(u), nan=0.0, posinf=0.0))
    peak = vals.max()
    if not peak > 0:
        return 0.0, 0.0
    keep = np.flatnonzero(vals > CUTOFF * peak)
    a = u[max(keep[0] - 1, 0)]
    b = u[min(keep[-1] + 1, len(u) - 1)]
    floor = 0.0
    if noise is not None:
        floor = float(trapezoid(np.exp(u) * noise(np.exp(u)), u))
    pts = [u[np.argmax(vals)]] + [c for c in centers if a < c < b]
    val, err = quad_window(f_log, a, b, pts, epsrel=epsrel, epsabs=floor)
    # Values below the floor are reported with their (large) error rather than
    # treated as a quadrature failure.
    if err > max(1e-6 * abs(val), 2 * floor, 1e-300):
        raise AccuracyError("r-quadrature did not converge", err)
    return val, err + floor


def _centers(kspec, ev, t, z):
    c = [math.log(ev.space_scale(t))]
    if z > 0:
        c.append(math.log(float(kspec.Phi(z))))
    return c


def q_kernel(kspec, ev, t, z, epsrel=1e-10):
    """``q(t, z) = int p0(r, z) pbar(r, t) dr``; returns ``(value, error)``.

    ``ev`` is a :class:`~fracpoisson.subordinator.DensityEval`. The
    quadrature runs in ``log r`` with breakpoints at the subordinator scale
    ``1/phi(1/t)``, at ``Phi(z)`` and at the integrand peak.
    """
    t, z = float(t), float(z)
    _check_tz(t, z)
    _require_concrete(kspec)

    def F(r):
        return p0_radial(kspec, r, z) * ev.density_with_error(r, t)[0]

    def noise(r):
        return p0_radial(kspec, r, z) * ev.density_with_error(r, t)[1]

    return _integrate_log_r(F, _centers(kspec, ev, t, z), epsrel, noise)


def p_kernel(kspec, ev, t, z, epsrel=1e-10):
    """``p(t, z) = E[p0(E_t, z)]``; returns ``(value, error)``.

    ``ev`` may be a :class:`~fracpoisson.subordinator.DensityEval` or any
    object with ``inverse_rule(t) -> (nodes, weights)`` describing the law of
    ``E_t`` (used for deterministic time changes). For the Cauchy kernel the
    on-diagonal value is infinite.
    """
    t, z = float(t), float(z)
    _check_tz(t, z)
    _require_concrete(kspec)
    if not hasattr(ev, "inverse_density_array"):
        nodes, weights = ev.inverse_rule(t)
        return float(np.sum(weights * p0_radial(kspec, nodes, z))), 0.0
    if z == 0 and kspec.alpha <= kspec.d:
        return math.inf, 0.0

    def F(r):
        return p0_radial(kspec, r, z) * ev.inverse_density_array(t, r)

    def noise(r):
        return p0_radial(kspec, r, z) * ev.inverse_density_with_error(t, r)[1]

    return _integrate_log_r(F, _centers(kspec, ev, t, z), epsrel, noise)


# -- Fourier oracles (stable subordinator) -----------------------------------

def _fourier_invert(hat, z, scale):
    """``(1/pi) int_0^inf cos(xi z) hat(xi) dxi`` for an even, decaying ``hat``.

    ``scale`` is the frequency where ``hat`` turns over.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        split = 50.0 * scale
        if z == 0:
            head, e1 = quad(hat, 0.0, split, epsabs=0.0, epsrel=1e-11, limit=400,
                            points=[scale])
            tail, e2 = quad(hat, split, np.inf, epsabs=0.0, epsrel=1e-11, limit=400)
        else:
            split = max(split, 20 * np.pi / z)
            head, e1 = quad(hat, 0.0, split, weight="cos", wvar=z, epsabs=0.0, epsrel=1e-11,
                            limit=800)
            tail, e2 = quad(hat, split, np.inf, weight="cos", wvar=z, epsabs=1e-15, limlst=200)
    return (head + tail) / np.pi, (e1 + e2) / np.pi


def _ml_hat(beta, gam, pref, t, kspec):
    def hat(xi):
        return pref * float(mittag_leffler(beta, gam, -float(kspec.symbol(xi)) * t**beta))
    return hat


def q_fourier(kspec, beta, t, z):
    """Fourier oracle for ``q`` with a ``beta``-stable subordinator: ``(value, error)``."""
    t, z = float(t), float(z)
    _check_tz(t, z)
    hat = _ml_hat(beta, beta, t ** (beta - 1), t, kspec)
    return _fourier_invert(hat, z, t ** (-beta / kspec.alpha))


def p_fourier(kspec, beta, t, z):
    """Fourier oracle for ``p`` with a ``beta``-stable subordinator: ``(value, error)``."""
    t, z = float(t), float(z)
    _check_tz(t, z)
    hat = _ml_hat(beta, 1.0, 1.0, t, kspec)
    return _fourier_invert(hat, z, t ** (-beta / kspec.alpha))


def mass_q(kspec, ev, t):
    """``int_R q(t, z) dz``; equals the potential density ``G(t)``."""
    f = lambda z: 2.0 * q_kernel(kspec, ev, t, z)[0]  # noqa: E731
    scale = float(kspec.Phi.inverse(ev.space_scale(t)))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        head, _ = quad(f, 0.0, scale, epsrel=1e-9, limit=200)
        tail, _ = quad(f, scale, np.inf, epsrel=1e-9, limit=200)
    return head + tail


def mass_p(kspec, ev, t):
    """``int_R p(t, z) dz``; equals 1."""
    f = lambda z: 2.0 * p_kernel(kspec, ev, t, z)[0]  # noqa: E731
    scale = float(kspec.Phi.inverse(ev.space_scale(t)))
    lo = 1e-12 * scale
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        head, _ = quad(f, lo, scale, epsrel=1e-9, limit=200)
        tail, _ = quad(f, scale, np.inf, epsrel=1e-9, limit=200)
    return head + tail


# -- weights and the generalized Caputo derivative ----------------------------

@dataclass(frozen=True)
class WeightFunction:
    """A weight ``w(x) = sum_i c_i x**(-b_i)`` with ``0 < b_i < 1``.

    This covers the Levy tails of stable and mixture subordinators, the
    classical Caputo weight and the conjugate weight of a stable
    subordinator. ``W`` and ``W2`` are the primitives ``int_0^x w`` and
    ``int_0^x u w(u) du``.
    """

    coefs: tuple
    exponents: tuple

    def __post_init__(self):
        if len(self.coefs) != len(self.exponents) or not self.coefs:
            raise DomainError("weight needs matching, non-empty coefficient lists")
        if any(not 0 < b < 1 for b in self.exponents):
            raise DomainError("weight exponents must lie in (0, 1)")
        if any(c < 0 for c in self.coefs):
            raise DomainError("weight coefficients must be non-negative")

    @classmethod
    def caputo(cls, beta):
        return cls((1.0 / gamma(1 - beta),), (float(beta),))

    @classmethod
    def from_spec(cls, spec):
        """Levy tail of ``spec`` (stable or mixture)."""
        if spec.kind == "tabulated":
            raise UnsupportedOperation("tabulated specs have no closed-form Levy tail")
        s = spec.scale
        return cls(tuple(s * w / gamma(1 - b) for w, b in spec.components),
                   tuple(float(b) for _, b in spec.components))

    @classmethod
    def conjugate_of(cls, spec):
        """Levy tail of the conjugate subordinator (stable specs only)."""
        if spec.kind != "stable":
            raise UnsupportedOperation("closed-form conjugate weight needs a stable spec")
        b = spec.beta
        return cls((1.0 / gamma(b),), (1.0 - b,))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return sum(c * x ** (-b) for c, b in zip(self.coefs, self.exponents))

    def W(self, x):
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        return sum(c * x ** (1 - b) / (1 - b) for c, b in zip(self.coefs, self.exponents))

    def power_moment(self, T, a, b, power):
        """``int_a^b w(T - s) d(s**power)`` for ``0 <= a < b <= T`` (arrays ``a``, ``b``)."""
        a = np.asarray(a, dtype=float) / T
        b = np.asarray(b, dtype=float) / T
        out = 0.0
        for c, e in zip(self.coefs, self.exponents):
            scale = c * power * T ** (power - e) * beta_fn(power, 1 - e)
            out = out + scale * (betainc(power, 1 - e, np.minimum(b, 1.0))
                                 - betainc(power, 1 - e, a))
        return out

    def W2(self, x):
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        return sum(c * x ** (2 - b) / (2 - b) for c, b in zip(self.coefs, self.exponents))


def graded_grid(T, n, grading=3.0):
    """``T (j/n)**grading`` for ``j = 0..n``."""
    return T * (np.arange(n + 1) / n) ** grading


def _memory_integral(w, nodes, values, T):
    """``int_0^T w(T - s) (f(s) - f(0)) ds`` for piecewise-linear ``f``.

    Exact for each linear piece, using the primitives of ``w``.
    """
    s = np.asarray(nodes, dtype=float)
    f = np.asarray(values, dtype=float) - values[0]
    m = int(np.searchsorted(s, T, side="left"))
    if m >= len(s) and T > s[-1] * (1 + 1e-12):
        raise DomainError("T beyond the sampled grid")
    m = min(m, len(s) - 1)
    a, b = s[:m], np.minimum(s[1:m + 1], T)
    slope = (f[1:m + 1] - f[:m]) / (s[1:m + 1] - s[:m])
    fa = f[:m]
    # On [a, b]: f = fa + slope (s - a); with u = T - s the piece integrates to
    # fa dW + slope ((T - a) dW - dW2).
    dW = w.W(T - a) - w.W(T - b)
    dW2 = w.W2(T - a) - w.W2(T - b)
    return float(np.sum(fa * dW + slope * ((T - a) * dW - dW2)))


def caputo_w_derivative(w, nodes, values, T=None, method="l1", h=None, power=1.0):
    """Generalized Caputo derivative ``d/dT int_0^T w(T - s)(f(s) - f(0)) ds``.

    ``f`` is given by ``values`` at ``nodes`` (starting at 0, graded toward
    0) and interpolated linearly; ``values`` may carry extra trailing axes
    for the ``l1`` method. ``method="l1"`` differentiates the exact
    memory integral analytically, giving
    ``sum_j slope_j [W(T - s_j) - W(T - s_{j+1})]`` at a node ``T``. With
    ``power != 1`` the interpolation is linear in ``s**power`` instead, which
    is exact for ``a + b s**power`` and so resolves the ``t**beta`` start of
    fractional solutions.
    ``method="difference"`` uses a central difference of the memory
    integral with step ``h`` (default ``T/64``), Richardson-extrapolated
    once; it needs samples up to ``T + h``.
    """
    s = np.asarray(nodes, dtype=float)
    f = np.asarray(values, dtype=float)
    if s.ndim != 1 or len(s) < 8 or f.shape[:1] != s.shape:
        raise DomainError("need at least 8 samples on a 1-d grid")
    if s[0] != 0 or np.any(np.diff(s) <= 0):
        raise DomainError("grid must start at 0 and increase")
    T = float(s[-1] if T is None else T)
    if method == "l1":
        m = int(np.searchsorted(s, T * (1 - 1e-12)))
        if m >= len(s) or abs(s[m] - T) > 1e-12 * T:
            raise DomainError("l1 derivative is taken at a grid node")
        shape = (-1,) + (1,) * (f.ndim - 1)
        if power == 1.0:
            ds = np.diff(s[:m + 1])
            dW = w.W(T - s[:m]) - w.W(T - s[1:m + 1])
        else:
            ds = np.diff(s[:m + 1] ** power)
            dW = w.power_moment(T, s[:m], s[1:m + 1], power)
        out = np.sum(np.diff(f[:m + 1], axis=0) / ds.reshape(shape) * dW.reshape(shape), axis=0)
        return float(out) if np.ndim(out) == 0 else out
    if method == "difference":
        h = T / 64 if h is None else float(h)
        I = lambda x: _memory_integral(w, s, f, x)  # noqa: E731
        d1 = (I(T + h) - I(T - h)) / (2 * h)
        d2 = (I(T + h / 2) - I(T - h / 2)) / h
        return (4 * d2 - d1) / 3
    raise DomainError(f"unknown derivative method {method!r}")


# -- identities ----------------------------------------------------------------

def _time_rule(t, b, n, k=1.0):
    """Nodes and weights for ``int_0^t F(s) (t-s)**(b-1) ds`` (``b = 1``: no weight).

    Substitutes ``s = t v**k`` (time dependence enters through ``s**(1/k)``
    for fractional kernels) and applies Gauss-Jacobi in ``v`` with the
    ``(1-v)**(b-1)`` factor in the weight.
    """
    y, wy = roots_jacobi(n, b - 1.0, 0.0)
    v = 0.5 * (1 + y)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(v < 1, (1 - v**k) / (1 - v), k)
    w = t**b * k * wy * 0.5**b * v ** (k - 1) * ratio ** (b - 1)
    return t * v**k, w


def _time_integral(fun, t, b=1.0, n=20, k=1.0):
    """``(value, error)`` with the error from ``n`` versus ``n + n//2`` nodes."""
    vals = []
    for m in (n, n + n // 2):
        s, w = _time_rule(t, b, m, k)
        vals.append(float(np.sum(w * np.array([fun(si) for si in s]))))
    return vals[1], abs(vals[1] - vals[0])


def _p_at(kspec, ev, s, z):
    return 0.0 if s <= 0 else p_kernel(kspec, ev, s, z)[0]


def _q_at(kspec, ev, s, z):
    return 0.0 if s <= 0 else q_kernel(kspec, ev, s, z)[0]


def _check_identity_args(t, z):
    if not (t > 0 and z > 0):
        raise DomainError("t and z must be positive")


def cumulative_identity_residual(kspec, ev, t, z, n=20):
    """``|int_0^t q - int_0^t G(t - s) p(s) ds| / int_0^t q`` at distance ``z``.

    The potential density behaves like ``(t-s)**(b-1)`` with ``b = beta_max``
    at ``s = t``; that factor goes into the quadrature weight.
    """
    t, z = float(t), float(z)
    _check_identity_args(t, z)
    b = ev.spec.beta_max
    k = 1.0 / ev.spec.beta_min
    lhs, _ = _time_integral(lambda s: _q_at(kspec, ev, s, z), t, 1.0, n, k)

    def smooth(s):
        u = t - s
        return float(ev.potential_density(u)) * u ** (1 - b) * _p_at(kspec, ev, s, z)

    rhs, _ = _time_integral(smooth, t, b, n, k)
    return abs(lhs - rhs) / abs(lhs)


def integrated_conjugate_residual(kspec, ev, t, z, n=20):
    """``|int_0^t w*(t - s) p(s) ds - int_0^t q| / int_0^t q`` (stable specs)."""
    t, z = float(t), float(z)
    _check_identity_args(t, z)
    wstar = WeightFunction.conjugate_of(ev.spec)
    c, e = wstar.coefs[0], wstar.exponents[0]
    k = 1.0 / ev.spec.beta
    lhs, _ = _time_integral(lambda s: _q_at(kspec, ev, s, z), t, 1.0, n, k)
    rhs, _ = _time_integral(lambda s: _p_at(kspec, ev, s, z), t, 1.0 - e, n, k)
    return abs(lhs - c * rhs) / abs(lhs)


def conjugate_identity_residual(kspec, ev, t, z, n=160, grading=3.0):
    """Relative gap between ``q(t, z)`` and ``d^{w*}_t p(., z)(t)``.

    ``p(., z)`` is sampled on a graded grid over ``[0, t + t/64]`` and
    differentiated with ``caputo_w_derivative(method="difference")``.
    Returns ``(residual, q, derivative)``.
    """
    t, z = float(t), float(z)
    _check_identity_args(t, z)
    wstar = WeightFunction.conjugate_of(ev.spec)
    h = t / 64
    nodes = graded_grid(t + h, n, grading)
    vals = np.array([_p_at(kspec, ev, s, z) for s in nodes])
    deriv = caputo_w_derivative(wstar, nodes, vals, t, method="difference", h=h)
    q = q_kernel(kspec, ev, t, z)[0]
    return abs(deriv - q) / abs(q), q, deriv


# -- Duhamel solution on a periodic grid -----------------------------------------

@dataclass
class SolutionField:
    """Values of a solution on a ``(t, x)`` or ``(t, z)`` grid."""

    t: np.ndarray
    x: np.ndarray
    values: np.ndarray
    errors: np.ndarray
    provenance: str
    space_label: str = "x"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.errors = np.broadcast_to(np.asarray(self.errors, dtype=float),
                                      self.values.shape).copy()
        if self.values.shape != (len(self.t), len(self.x)):
            raise DomainError("values must have shape (len(t), len(x))")

    def rows(self):
        for i, ti in enumerate(self.t):
            for j, xj in enumerate(self.x):
                yield float(ti), float(xj), float(self.values[i, j]), float(self.errors[i, j])

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["t", self.space_label, "value", "error"])
            for row in self.rows():
                wr.writerow([f"{v:.17g}" for v in row])

    def to_json(self, path=None):
        doc = {
            "version": __version__, "provenance": self.provenance, "meta": self.meta,
            "t": self.t.tolist(), self.space_label: self.x.tolist(),
            "values": self.values.tolist(), "errors": self.errors.tolist(),
        }
        text = json.dumps(doc, indent=1)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


def _check_periodic(x):
    x = np.asarray(x, dtype=float)
    dx = np.diff(x)
    if len(x) < 8 or not np.allclose(dx, dx[0], rtol=1e-10):
        raise DomainError("x grid must be uniform with at least 8 points")
    return x, dx[0], dx[0] * len(x)


def duhamel_solve(kspec, ev, g, f, t_grid, x_grid, v_nodes=48):
    """Solution of the fractional Cauchy problem for the Gaussian kernel.

    ``u(t) = E[P_{E_t} g] + int_0^t Q_{t-s} f(s) ds`` on a uniform periodic
    ``x_grid`` (period ``len(x) * dx``). Both operators are Fourier
    multipliers: ``E[exp(-E_t k^2)]`` and ``int pbar(r, s) exp(-r k^2) dr``,
    computed with the subordinator quadrature rules. The memory integral
    uses ``s = t - t v**(1/b)`` with Gauss-Legendre nodes in ``v``, which
    removes the ``(t-s)**(b-1)`` singularity. ``f(s, x)`` is taken as 0 for
    ``s <= 0``; ``g`` and ``f`` may be ``None``.
    """
    if kspec.kind != "gaussian":
        raise DomainError("the Duhamel solver needs the Gaussian kernel")
    x, dx, period = _check_periodic(x_grid)
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(t_grid < 0):
        raise DomainError("t grid must be non-negative")
    k = 2 * np.pi * np.fft.rfftfreq(len(x), d=dx)
    k2 = k * k
    b = ev.spec.beta_max
    v, wv = leggauss(v_nodes)
    v = 0.5 * (v + 1)
    wv = 0.5 * wv
    out = np.zeros((len(t_grid), len(x)))
    ghat = None if g is None else np.fft.rfft(g(x))
    if ghat is not None and np.any(t_grid == 0):
        out[t_grid == 0] = g(x)
    for i, t in enumerate(t_grid):
        if t == 0:
            continue
        uhat = np.zeros(len(k), dtype=complex)
        if ghat is not None:
            r, wr = ev.inverse_rule(t)
            uhat += ghat * (np.exp(-np.outer(k2, r)) @ wr)
        if f is not None:
            sig = t * v ** (1.0 / b)
            jac = (t / b) * v ** (1.0 / b - 1.0) * wv
            for sg, jw in zip(sig, jac):
                r, wr = ev.r_rule(sg)
                mult = np.exp(-np.outer(k2, r)) @ wr
                uhat += jw * mult * np.fft.rfft(f(t - sg, x))
        out[i] = np.fft.irfft(uhat, n=len(x))
    return SolutionField(t_grid, x, out, 0.0, "duhamel",
                         meta={"spec": ev.spec.to_dict(), "kernel": kspec.to_dict(),
                               "v_nodes": v_nodes, "period": period})


def pde_residual(u, f, w, skip=0, power=None):
    """Scaled residual ``max |d^w_t u - u_xx - f| / (1 + |f|)`` of a Duhamel field.

    ``u.t`` must start at 0 (graded toward it); the derivative is the L1
    formula at each node and ``u_xx`` a periodic central second difference.
    The first ``skip`` nodes after ``t = 0`` are excluded. The time
    interpolation is linear in ``t**power`` (default: the largest weight
    exponent, the leading power of ``u`` at ``t = 0``).
    """
    power = max(w.exponents) if power is None else power
    t = np.asarray(u.t, dtype=float)
    x, dx, _ = _check_periodic(u.x)
    if len(t) < 8 or t[0] != 0:
        raise DomainError("need at least 8 time nodes starting at 0")
    vals = u.values
    if not np.any(vals) and f is None:
        return 0.0
    worst = 0.0
    for i in range(1 + skip, len(t)):
        dt = caputo_w_derivative(w, t, vals, t[i], power=power)
        uxx = (np.roll(vals[i], -1) - 2 * vals[i] + np.roll(vals[i], 1)) / dx**2
        src = np.zeros(len(x)) if f is None else f(t[i], x)
        worst = max(worst, float(np.max(np.abs(dt - uxx - src) / (1 + np.abs(src)))))
    return worst
