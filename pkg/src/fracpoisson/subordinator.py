"""Transition densities and derived quantities of a subordinator.

:class:`DensityEval` evaluates the density ``pbar(r, t)`` of ``S_r`` at
``t`` for a :class:`~fracpoisson.bernstein.BernsteinSpec`, either by the
stable scaling relation or by numerical inversion of
``lam -> exp(-r phi(lam))`` along a deformed Bromwich contour. Everything
else in this module (potential density, first-passage densities, survival
probabilities, modes, envelopes) is built on top of it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.optimize import minimize_scalar

from ._numerics import gauss_panels, invert_laplace_checked, log_quad
from .bernstein import BernsteinSpec
from .errors import AccuracyError, BracketError, DomainError, InversionError
from .special import inverse_stable_density, stable_cdf, stable_density_g

__all__ = ["DensityEval", "EnvelopeRegime", "sub_envelope_sweep", "prop_sub_constants"]

STABLE_SCALING = "stable_scaling"
CONTOUR = "contour"
# Past this index the admissible contour sector is too narrow for double precision.
CONTOUR_MAX_INDEX = 0.8


def _positive(x, name):
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError(f"{name} must be strictly positive")
    return arr


def _ret(val, *likes):
    return float(val) if all(np.ndim(v) == 0 for v in likes) else val


@dataclass(frozen=True)
class EnvelopeRegime:
    """Regime split ``r phi(1/t) <= L`` for the two-sided density envelope.

    ``c_exp`` is the constant in the exponential branch
    ``exp(-c_exp t (phi')^{-1}(t/r)) / t``; it is a comparison parameter, not
    a claimed sharp constant.
    """

    L: float = 1.0
    c_exp: float = 1.0


@dataclass(frozen=True)
class DensityEval:
    """Evaluator for ``pbar(r, t)``, the density of ``S_r`` at ``t``.

    ``method`` is ``"stable_scaling"`` (stable specs only) or ``"contour"``.
    ``nodes`` overrides the contour node count (>= 16); ``tol`` is the
    relative tolerance used by the quadratures built on the density.
    """

    spec: BernsteinSpec
    method: str = CONTOUR
    nodes: int | None = None
    tol: float = 1e-10
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.method not in (STABLE_SCALING, CONTOUR):
            raise DomainError(f"unknown density method {self.method!r}")
        if self.method == STABLE_SCALING and self.spec.kind != "stable":
            raise DomainError("stable scaling needs a stable spec")
        if self.method == CONTOUR and self.spec.kind == "tabulated":
            raise DomainError("contour inversion needs an analytic (stable/mixture) spec")
        if self.method == CONTOUR and self.spec.beta_max > CONTOUR_MAX_INDEX:
            raise DomainError("contour inversion is validated only for beta_max <= %g"
                              % CONTOUR_MAX_INDEX)
        if self.nodes is not None and self.nodes < 16:
            raise DomainError("contour inversion needs at least 16 nodes")

    @classmethod
    def for_spec(cls, spec, method=None, **kwargs):
        """Pick stable scaling for stable specs, contour inversion otherwise."""
        if method is None:
            method = STABLE_SCALING if spec.kind == "stable" else CONTOUR
        return cls(spec, method, **kwargs)

    @property
    def beta(self):
        return self.spec.beta

    @property
    def growth_index(self):
        return self.spec.beta_max

    # -- density ------------------------------------------------------------
    def density_with_error(self, r, t):
        """``(pbar(r, t), error_estimate)`` with broadcasting over ``r`` and ``t``."""
        r = _positive(r, "r")
        t = _positive(t, "t")
        rb, tb = np.broadcast_arrays(r, t)
        if self.method == STABLE_SCALING:
            b = self.beta
            scale = rb ** (-1.0 / b)
            val = scale * stable_density_g(b, tb * scale)
            return val, 1e-13 * np.abs(val)
        rf = rb.ravel()
        tf = tb.ravel()
        phi = self.spec.phi_complex
        # For small r phi(1/t) the transform is close to 1, whose inversion (a
        # point mass at 0) only cancels to about 1e-8; removing it keeps
        # relative accuracy in that regime.
        small = (rf * self.spec.phi(1.0 / tf) < 1.0)[:, None]

        def F(z):
            x = -rf[:, None] * phi(z)
            return np.where(small, np.expm1(x), np.exp(x))

        val, err = invert_laplace_checked(F, tf, self.nodes, self.growth_index)
        # Far tails sit below the contour's truncation floor, which scales
        # with the peak height phi^{-1}(1/r) rather than with the value.
        err = err + 1e-12 * np.asarray(self.spec.phi_inverse(1.0 / rf), dtype=float)
        neg = val < 0
        if np.any(neg & (-val > err)):
            i = np.flatnonzero(neg & (-val > err))[0]
            raise InversionError(
                "negative density %.3g beyond error estimate at r=%g, t=%g"
                % (val[i], rf[i], tf[i]), err[i])
        val = np.where(neg, 0.0, val)
        return val.reshape(rb.shape), err.reshape(rb.shape)

    def density(self, r, t):
        """Density ``pbar(r, t)`` of ``S_r`` at ``t``."""
        val, _ = self.density_with_error(r, t)
        return _ret(val, r, t)

    def laplace_numeric(self, r, lam):
        """``int_0^inf exp(-lam t) pbar(r, t) dt`` by quadrature (should be ``exp(-r phi(lam))``)."""
        r = float(r)
        scale = self.time_scale(r)
        # the mass below scale / y is about exp(-c y^(b/(1-b))), slow for small b
        b = min(max(self.growth_index, 0.05), 0.95)
        c = (1 - b) * b ** (b / (1 - b))
        lo = scale * min(1e-6, (40.0 / c) ** (-(1 - b) / b))
        val, err = log_quad(lambda s: np.exp(-lam * s) * self.density(r, s),
                            lo, np.inf, points=[scale, 10 * scale],
                            epsrel=1e-11, epsabs=1e-14)
        return val

    def time_scale(self, r):
        """Typical size of ``S_r``: ``1 / phi^{-1}(1/r)``."""
        return 1.0 / float(self.spec.phi_inverse(1.0 / r))

    def space_scale(self, t):
        """Typical size of ``E_t``: ``1 / phi(1/t)``."""
        return 1.0 / float(self.spec.phi(1.0 / t))

    # -- potential density ------------------------------------------------------
    def potential_density(self, t):
        """Potential density ``G(t) = int_0^inf pbar(r, t) dr``.

        Exact for the stable kind, contour inversion of ``1/phi`` otherwise.
        """
        return _ret(self.potential_density_with_error(t)[0], t)

    def potential_density_with_error(self, t):
        """``(G(t), error_estimate)`` as arrays."""
        t = _positive(t, "t")
        if self.spec.kind == "stable":
            val = np.asarray(self.spec.potential_density_exact(t), dtype=float)
            return val, 1e-15 * np.abs(val)
        phi = self.spec.phi_complex
        val, err = invert_laplace_checked(lambda z: 1.0 / phi(z), t.ravel(), self.nodes,
                                          self.growth_index)
        return val.reshape(t.shape), err.reshape(t.shape)

    def w_conv_G(self, t):
        """``int_0^t w(s) G(t - s) ds``; equal to 1 for every ``t > 0``.

        Both factors are singular at their endpoint, like ``s**(-b)`` and
        ``(t-s)**(b-1)`` with ``b = beta_max``; the singular parts are
        absorbed into an algebraic quadrature weight.
        """
        t = float(t)
        if not t > 0:
            raise DomainError("t must be positive")
        b = self.spec.beta_max
        w = self.spec.levy_tail
        G = self.potential_density

        eps = 1e-14 * t

        def smooth(s):
            # Clenshaw-Curtis moments sample the endpoints, so clip to the interior.
            s = min(max(s, eps), t - eps)
            u = t - s
            return w(s) * s**b * G(u) * u ** (1 - b)

        val, err = quad(smooth, 0.0, t, weight="alg", wvar=(-b, b - 1),
                        epsabs=0.0, epsrel=1e-10, limit=200)
        if err > 1e-6:
            raise AccuracyError("w*G quadrature did not converge", err)
        return val

    # -- first passage --------------------------------------------------------
    def inverse_density(self, t, r):
        """Density at ``r`` of ``E_t = inf{s : S_s > t}``.

        Computed as ``int_0^t w(t - s) pbar(r, s) ds``; the weight singularity at
        ``s = t`` goes into an algebraic quadrature weight and the part near
        the mode of ``pbar(r, .)`` is integrated in ``log s``.
        """
        t = float(t)
        r = float(r)
        if not (t > 0 and r > 0):
            raise DomainError("t and r must be positive")
        b = self.spec.beta_max
        w = self.spec.levy_tail
        split = 0.5 * t
        scale = self.time_scale(r)
        lo = min(split, scale) * 1e-4
        head, e1 = log_quad(lambda s: w(t - s) * self.density(r, s), lo, split,
                            points=[scale], epsrel=1e-10, epsabs=0.0)

        eps = 1e-14 * t

        def smooth(s):
            u = max(t - s, eps)
            return w(u) * u**b * self.density(r, t - u)

        tail, e2 = quad(smooth, split, t, weight="alg", wvar=(0.0, -b),
                        epsabs=0.0, epsrel=1e-10, limit=200)
        return head + tail

    def inverse_density_array(self, t, r):
        """Vectorized density of ``E_t`` at ``r``.

        Stable specs use the scaling form; otherwise the transform
        ``(phi(lam) / lam) exp(-r phi(lam))`` is inverted in ``t``.
        """
        return _ret(self.inverse_density_with_error(t, r)[0], t, r)

    def inverse_density_with_error(self, t, r):
        """``(density of E_t at r, error_estimate)`` as broadcast arrays."""
        t = _positive(t, "t")
        r = _positive(r, "r")
        tb, rb = np.broadcast_arrays(t, r)
        if self.method == STABLE_SCALING:
            val = np.asarray(inverse_stable_density(self.beta, tb, rb), dtype=float)
            return val, 1e-13 * np.abs(val)
        rf = rb.ravel()
        phi = self.spec.phi_complex

        def F(z):
            ph = phi(z)
            return ph / z * np.exp(-rf[:, None] * ph)

        val, err = invert_laplace_checked(F, tb.ravel(), self.nodes, self.growth_index)
        val = np.where((val < 0) & (-val <= err), 0.0, val)
        return val.reshape(rb.shape), err.reshape(rb.shape)

    # -- distribution function ------------------------------------------------
    def cdf(self, r, t):
        """``P(S_r <= t)`` by quadrature of the density."""
        return 1.0 - self.survival(r, t)

    def survival(self, r, t):
        """``P(S_r >= t) = 1 - int_0^t pbar(r, s) ds``.

        Whichever of the two tails is smaller is integrated directly so that
        the result keeps relative accuracy in both limits.
        """
        r = float(r)
        t = float(t)
        if not (r > 0 and t > 0):
            raise DomainError("r and t must be positive")
        scale = self.time_scale(r)
        dens = lambda s: self.density(r, s)  # noqa: E731
        if t <= scale:
            lower, _ = log_quad(dens, t * 1e-8, t, points=[], epsrel=1e-12, epsabs=0.0)
            return min(1.0, max(0.0, 1.0 - lower))
        pts = [p for p in (2 * scale, 10 * scale) if p > t]
        upper, _ = log_quad(dens, t, np.inf, points=pts, epsrel=1e-12, epsabs=0.0)
        return min(1.0, max(0.0, upper))

    # -- mode -------------------------------------------------------------------
    def mode(self, r):
        """Mode ``a_r`` of ``t -> pbar(r, t)`` by golden-section search.

        The search runs in ``log t`` on
        ``[1e-3, 1e3] / phi^{-1}(1/r)`` after a coarse scan locates the
        bracketing triple.
        """
        r = float(r)
        if not r > 0:
            raise DomainError("r must be positive")
        c = math.log(self.time_scale(r))
        grid = np.linspace(c - 3 * math.log(10), c + 3 * math.log(10), 61)
        vals = self.density_with_error(r, np.exp(grid))[0]
        i = int(np.argmax(vals))
        if i == 0 or i == len(grid) - 1:
            raise BracketError("density maximum not bracketed for r=%g" % r)
        f = lambda u: -math.log(self.density(r, math.exp(u)))  # noqa: E731
        res = minimize_scalar(f, bracket=(grid[i - 1], grid[i], grid[i + 1]),
                              method="golden", tol=1e-10)
        return math.exp(res.x)

    # -- envelopes --------------------------------------------------------------
    def envelope_density(self, r, t, regime=EnvelopeRegime()):
        """Comparison envelope for ``pbar(r, t)``.

        ``r phi(1/t) / t`` when ``r phi(1/t) <= L``, else
        ``exp(-c t (phi')^{-1}(t/r)) / t``.
        """
        r = float(r)
        t = float(t)
        x = r * self.spec.phi(1.0 / t)
        if x <= regime.L:
            return x / t
        return math.exp(-regime.c_exp * t * self.spec.phi_prime_inverse(t / r)) / t

    # -- quadrature rules -------------------------------------------------------
    def r_rule(self, sigma, panels=36, order=12, below=30.0, above=5.0):
        """Nodes and weights for ``int_0^inf pbar(r, sigma) F(r) dr ~ sum w_i F(r_i)``.

        Gauss-Legendre panels in ``log r`` around ``1/phi(1/sigma)``. The
        weights already contain the density.
        """
        sigma = float(sigma)
        c = math.log(self.space_scale(sigma))
        u, wu = gauss_panels(-below, above, panels, order)
        r = np.exp(u + c)
        if self.method == STABLE_SCALING:
            # r = sigma**b e^u gives pbar = r**(-1/b) g(exp(-u/b)), the same g for all sigma.
            gv = self._scaled_g(panels, order, below, above)
            return r, wu * r * r ** (-1 / self.beta) * gv
        dens = self.density_with_error(r, sigma)[0]
        return r, wu * r * dens

    def inverse_rule(self, t, panels=36, order=12, below=30.0, above=5.0):
        """Nodes and weights for ``E[F(E_t)] ~ sum w_i F(r_i)``."""
        t = float(t)
        c = math.log(self.space_scale(t))
        u, wu = gauss_panels(-below, above, panels, order)
        r = np.exp(u + c)
        if self.method == STABLE_SCALING:
            b = self.beta
            gv = self._scaled_g(panels, order, below, above)
            h = (t / b) * r ** (-1 - 1 / b) * gv
        else:
            h = np.asarray(self.inverse_density_array(t, r))
        return r, wu * r * h

    def _scaled_g(self, panels, order, below, above):
        key = ("g", panels, order, below, above)
        if key not in self._cache:
            u, _ = gauss_panels(-below, above, panels, order)
            self._cache[key] = stable_density_g(self.beta, np.exp(-u / self.beta))
        return self._cache[key]


def sub_envelope_sweep(ev, r_grid, t_grid, regime=EnvelopeRegime()):
    """Ratios ``pbar / envelope`` over a grid.

    Returns a list of dict rows with keys ``r, t, density, envelope, ratio,
    small`` (``small`` is true in the ``r phi(1/t) <= L`` regime).
    """
    rows = []
    for r in np.asarray(r_grid, float):
        dens = np.atleast_1d(ev.density_with_error(r, np.asarray(t_grid, float))[0])
        for t, d in zip(np.asarray(t_grid, float), dens):
            env = ev.envelope_density(r, t, regime)
            rows.append({
                "r": float(r), "t": float(t), "density": float(d), "envelope": env,
                "ratio": float(d / env) if env > 0 else float("inf"),
                "small": bool(r * ev.spec.phi(1.0 / t) <= regime.L),
            })
    return rows


def prop_sub_constants(ev, r_grid, t_grid):
    """Empirical constants in the survival bounds for ``S_r``.

    Returns a dict with

    ``upper_c1``
        ``max P(S_r >= t(1 + e r phi(1/t))) / (r phi(1/t))``
    ``lower_c2``
        ``min -log(1 - P(S_r >= t)) / (r phi(1/t))``
    ``small_ball_c1``
        ``min -log P(S_r <= t) / (r phi((phi')^{-1}(t/r)))``

    All three must be positive and finite for the bounds to hold on the grid.
    """
    spec = ev.spec
    up, lo, sb = [], [], []
    for r in r_grid:
        for t in t_grid:
            x = r * spec.phi(1.0 / t)
            up.append(ev.survival(r, t * (1 + math.e * x)) / x)
            surv = ev.survival(r, t)
            if surv < 1.0:
                lo.append(-math.log1p(-surv) / x)
            below = 1.0 - surv
            arg = r * spec.phi(spec.phi_prime_inverse(t / r))
            if below > 0:
                sb.append(-math.log(below) / arg)
    return {
        "upper_c1": float(max(up)),
        "lower_c2": float(min(lo)) if lo else float("inf"),
        "small_ball_c1": float(min(sb)) if sb else float("inf"),
    }


def stable_cdf_scaled(beta, r, t):
    """``P(S_r <= t)`` for the stable subordinator via its scaling (oracle)."""
    return stable_cdf(beta, t * r ** (-1.0 / beta))
