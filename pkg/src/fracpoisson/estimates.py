"""Envelope functions for ``q`` and the bounded-ratio harness.

For a ``beta``-stable subordinator and a kernel with scale ``r**alpha`` in
dimension ``d`` the fundamental solution ``q(t, r)`` is comparable to

* ``H_le1`` when ``r <= t**(beta/alpha)``,
* ``H_ge1_jump`` (jump kernels) or ``H_ge1_diff`` (diffusion kernels,
  exponential constants free) when ``r >= t**(beta/alpha)``.

General subordinators use :func:`envelope_jump` and :func:`envelope_diff`.
Exponential regimes hold only with dilated constants, so they are checked by
regressing ``-log q`` on the exponent rather than by pointwise ratios.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from ._numerics import log_quad
from .bernstein import BernsteinSpec, bisect_increasing
from .errors import BracketError, DomainError
from .kernels import ScaleFunction, VolumeFunction, p0_radial

__all__ = [
    "H_le1", "H_ge1_jump", "H_ge1_diff", "n_solver", "envelope_jump", "envelope_diff",
    "q_split_I1_I2", "EnvelopeSpec", "RatioReport", "ratio_sweep", "fit_line",
]

# Relative slack on regime boundaries (grid points are computed in floating point).
_SLACK = 1e-12


def _check_params(d, alpha, beta):
    if not (d > 0 and alpha > 0 and 0 < beta < 1):
        raise DomainError("need d > 0, alpha > 0 and 0 < beta < 1")


def H_le1(d, alpha, beta, t, r):
    """Near-diagonal envelope, for ``0 <= r <= t**(beta/alpha)``."""
    _check_params(d, alpha, beta)
    if not (t > 0 and 0 <= r <= t ** (beta / alpha) * (1 + _SLACK)):
        raise DomainError("H_le1 needs t > 0 and 0 <= r <= t^(beta/alpha)")
    if d < 2 * alpha:
        return t ** (beta - 1 - beta * d / alpha)
    if d == 2 * alpha:
        return t ** (-1 - beta) * math.log(2 * t**beta / r**alpha) if r > 0 else math.inf
    return t ** (-1 - beta) / r ** (d - 2 * alpha) if r > 0 else math.inf


def H_ge1_jump(d, alpha, beta, t, r):
    """Off-diagonal envelope for jump kernels, ``t**(2 beta - 1) / r**(d + alpha)``."""
    _check_params(d, alpha, beta)
    if not (t > 0 and r >= t ** (beta / alpha) * (1 - _SLACK)):
        raise DomainError("H_ge1_jump needs r >= t^(beta/alpha)")
    return t ** (2 * beta - 1) / r ** (d + alpha)


def H_ge1_diff(d, alpha, beta, t, r):
    """Off-diagonal envelope for diffusion kernels (``alpha >= 2``).

    ``t**(beta - 1 - beta d/alpha) exp(-(r**alpha / t**beta)**(1/(alpha - beta)))``.
    """
    _check_params(d, alpha, beta)
    if alpha < 2:
        raise DomainError("diffusion envelopes need alpha >= 2")
    if not (t > 0 and r >= t ** (beta / alpha) * (1 - _SLACK)):
        raise DomainError("H_ge1_diff needs r >= t^(beta/alpha)")
    n = (r**alpha / t**beta) ** (1 / (alpha - beta))
    return t ** (beta - 1 - beta * d / alpha) * math.exp(-n)


def n_solver(spec, Phi, t, r):
    """Solve ``1 / phi(n / t) = Phi(r / n)`` for ``n``.

    Closed form ``(r**alpha / t**beta)**(1/(alpha - beta))`` for a stable
    ``phi`` and a power ``Phi``. Otherwise bisection on
    ``-log phi(n/t) - log Phi(r/n)``, which increases in ``n`` when the
    scale index exceeds the subordinator index.
    """
    t = float(t)
    r = float(r)
    if not (t > 0 and r > 0):
        raise DomainError("t and r must be positive")
    if spec.kind == "stable" and isinstance(Phi, ScaleFunction):
        a, b = Phi.alpha, spec.beta
        if not a > b:
            raise DomainError("n(t, r) needs alpha > beta")
        return (r**a / t**b) ** (1 / (a - b))

    def gap(n):
        return -np.log(spec.phi(n / t)) - np.log(Phi(r / n))

    return float(bisect_increasing(gap, 0.0))


def _phi_t(spec, t):
    return float(spec.phi(1.0 / t))


def envelope_jump(spec, Phi, V, t, z):
    """Envelope for ``q`` with a jump-type base kernel.

    If ``Phi(z) phi(1/t) <= 1``:
    ``(phi(1/t)/t) int_{Phi(z)}^{2/phi(1/t)} r / V(Phi^{-1}(r)) dr``;
    otherwise ``1 / (t phi(1/t)**2 V(z) Phi(z))``.
    """
    t = float(t)
    z = float(z)
    if not (t > 0 and z >= 0):
        raise DomainError("need t > 0 and z >= 0")
    ph = _phi_t(spec, t)
    Pz = float(Phi(z))
    if Pz * ph <= 1:
        lo = max(Pz, 1e-300)
        hi = 2.0 / ph
        f = lambda r: r / float(V(Phi.inverse(r)))  # noqa: E731
        # Near r = 0 the integrand may be r**(1 - d/alpha); start far enough down.
        lo = max(lo, hi * 1e-40)
        val, _ = log_quad(f, lo, hi, epsrel=1e-10)
        return ph / t * val
    return 1.0 / (t * ph * ph * float(V(z)) * Pz)


def envelope_diff(spec, Phi, V, t, z, c_exp=(1.5, 0.5)):
    """Band ``(lower, upper)`` for ``q`` with a diffusion-type base kernel.

    The near regime coincides with :func:`envelope_jump`. In the far regime
    ``A = n / (t phi(n/t) V(Phi^{-1}(1/phi(1/t))))`` with ``n = n(t, z)``
    and the band is ``[A exp(-c_lo n), A exp(-c_hi n)]`` with
    ``c_exp = (c_lo, c_hi)``, ``c_lo >= c_hi``.
    """
    c_lo, c_hi = c_exp
    if not c_lo >= c_hi > 0:
        raise DomainError("need c_lo >= c_hi > 0")
    t = float(t)
    z = float(z)
    ph = _phi_t(spec, t)
    if float(Phi(z)) * ph <= 1:
        v = envelope_jump(spec, Phi, V, t, z)
        return v, v
    n = n_solver(spec, Phi, t, z)
    A = n / (t * float(spec.phi(n / t)) * float(V(Phi.inverse(1.0 / ph))))
    return A * math.exp(-c_lo * n), A * math.exp(-c_hi * n)


def q_split_I1_I2(kspec, ev, t, z, c0=1.0, envelope=True):
    """Split of ``int p0(r, z) pbar(r, t) dr`` at ``r = 2/phi(1/t)``.

    With ``envelope=True`` the subordinator density is replaced by its
    regime forms, ``r phi(1/t)/t`` below the split and
    ``exp(-c0 t (phi')^{-1}(t/r))/t`` above it; otherwise the true density
    is used. Returns ``(I1, I2)``.
    """
    t = float(t)
    z = float(z)
    spec = ev.spec
    ph = _phi_t(spec, t)
    split = 2.0 / ph
    if envelope:
        lower = lambda r: p0_radial(kspec, r, z) * r * ph / t  # noqa: E731

        def upper(r):
            try:
                s = float(spec.phi_prime_inverse(t / r))
            except BracketError:
                return 0.0  # s beyond 2**200: the exponential factor is 0
            return p0_radial(kspec, r, z) * math.exp(-c0 * t * s) / t
    else:
        lower = upper = lambda r: p0_radial(kspec, r, z) * ev.density(r, t)  # noqa: E731
    pz = float(kspec.Phi(z)) if z > 0 else split
    pts = [p for p in (pz,) if p < split]
    I1, _ = log_quad(lower, split * 1e-30, split, points=pts, epsrel=1e-9)
    pts = [p for p in (pz, 10 * split) if p > split]
    # The true density decays faster than exponentially in r beyond the split.
    top = np.inf if envelope else 1e6 * split
    I2, _ = log_quad(upper, split, top, points=[p for p in pts if p < top], epsrel=1e-9)
    return I1, I2


@dataclass(frozen=True)
class EnvelopeSpec:
    """Which envelope a sweep compares against.

    ``family`` is one of ``stable_jump``, ``stable_diffusion``,
    ``general_jump``, ``general_diffusion``. Stable families use
    ``(d, alpha, beta)``; general families use ``spec`` with power
    ``Phi``/``V`` of indices ``alpha``/``d``.
    """

    family: str
    d: float = 1.0
    alpha: float = 2.0
    beta: float = 0.5
    spec: BernsteinSpec | None = None
    c_exp: tuple = (1.5, 0.5)

    def __post_init__(self):
        fams = ("stable_jump", "stable_diffusion", "general_jump", "general_diffusion")
        if self.family not in fams:
            raise DomainError(f"unknown envelope family {self.family!r}")
        if self.family.startswith("stable"):
            _check_params(self.d, self.alpha, self.beta)
            if self.family == "stable_diffusion" and self.alpha < 2:
                raise DomainError("stable diffusion envelopes need alpha >= 2")
        elif self.spec is None:
            raise DomainError("general envelopes need a BernsteinSpec")

    def regime(self, t, z):
        """``"near"`` or ``"far"``."""
        if self.family.startswith("stable"):
            return "near" if z <= t ** (self.beta / self.alpha) else "far"
        return "near" if z**self.alpha * self.spec.phi(1.0 / t) <= 1 else "far"

    def band(self, t, z):
        """``(lower, upper)`` envelope values at ``(t, z)`` (equal unless banded)."""
        d, a, b = self.d, self.alpha, self.beta
        near = self.regime(t, z) == "near"
        if self.family == "stable_jump":
            v = H_le1(d, a, b, t, z) if near else H_ge1_jump(d, a, b, t, z)
            return v, v
        if self.family == "stable_diffusion":
            if near:
                v = H_le1(d, a, b, t, z)
                return v, v
            n = (z**a / t**b) ** (1 / (a - b))
            pre = t ** (b - 1 - b * d / a)
            return pre * math.exp(-self.c_exp[0] * n), pre * math.exp(-self.c_exp[1] * n)
        Phi, V = ScaleFunction(a), VolumeFunction(d)
        if self.family == "general_jump":
            v = envelope_jump(self.spec, Phi, V, t, z)
            return v, v
        return envelope_diff(self.spec, Phi, V, t, z, self.c_exp)

    def to_dict(self):
        out = {"family": self.family, "d": self.d, "alpha": self.alpha, "beta": self.beta,
               "c_exp": list(self.c_exp)}
        if self.spec is not None:
            out["spec"] = self.spec.to_dict()
        return out


def fit_line(x, y):
    """Least-squares ``y = a + s x``; returns ``(slope, intercept, r_squared)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 2:
        raise DomainError("need at least two points to fit a line")
    s, a = np.polyfit(x, y, 1)
    resid = y - (a + s * x)
    ss = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / ss if ss > 0 else 1.0
    return float(s), float(a), float(r2)


@dataclass
class RatioReport:
    """Ratios ``q / envelope`` over a grid with per-regime summaries."""

    t: np.ndarray
    z: np.ndarray
    q: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    regime: np.ndarray
    envelope: dict = field(default_factory=dict)
    slopes: dict = field(default_factory=dict)

    @property
    def ratio(self):
        return self.q / self.upper

    def summary(self):
        out = {}
        for reg in ("near", "far"):
            m = self.regime == reg
            if not np.any(m):
                continue
            r = self.ratio[m]
            out[reg] = {
                "count": int(m.sum()), "min": float(r.min()), "max": float(r.max()),
                "geomean": float(np.exp(np.mean(np.log(r)))),
                "band": float(r.max() / r.min()),
            }
        out.update(self.slopes)
        return out

    def band_constant(self, regimes=("near", "far")):
        """Smallest ``C`` with every ratio in ``[1/C, C]`` over the given regimes."""
        m = np.isin(self.regime, regimes)
        r = self.ratio[m]
        return float(max(r.max(), 1.0 / r.min()))

    def to_json(self, path=None):
        doc = {"version": __version__, "envelope": self.envelope, "summary": self.summary()}
        text = json.dumps(doc, indent=1)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["t", "z", "q", "lower", "upper", "ratio", "regime"])
            for i in range(len(self.t)):
                wr.writerow([f"{v:.17g}" for v in (self.t[i], self.z[i], self.q[i],
                             self.lower[i], self.upper[i], self.ratio[i])] + [self.regime[i]])


def ratio_sweep(compute, envelope, t_grid, z_grid):
    """Evaluate ``compute(t, z)`` over the grid and compare with ``envelope``.

    ``z_grid`` may be a 1-d array shared by all ``t`` or a callable
    ``t -> z values``. Slopes are attached separately by the caller (see
    :func:`fit_line`).
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if len(t_grid) < 2:
        raise DomainError("need at least two t values")
    T, Z, Q, L, U, R = [], [], [], [], [], []
    for t in t_grid:
        zs = z_grid(t) if callable(z_grid) else z_grid
        for z in np.asarray(zs, dtype=float):
            q = compute(t, z)
            q = q[0] if isinstance(q, tuple) else q
            lo, up = envelope.band(t, z)
            T.append(t), Z.append(z), Q.append(q), L.append(lo), U.append(up)
            R.append(envelope.regime(t, z))
    return RatioReport(np.array(T), np.array(Z), np.array(Q), np.array(L), np.array(U),
                       np.array(R), envelope.to_dict())
