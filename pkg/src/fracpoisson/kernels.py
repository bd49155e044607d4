"""Base heat kernels ``p0(t, z)`` and their scale and volume functions.

Concrete kernels live on the real line and depend on ``x, y`` only through
``z = |x - y|``:

* ``gaussian``: ``(4 pi t)^{-1/2} exp(-z^2 / 4t)``, generator ``d^2/dx^2``,
  scale ``Phi(r) = r^2``;
* ``cauchy``: ``t / (pi (t^2 + z^2))``, scale ``Phi(r) = r``;
* ``stable``: symmetric ``alpha``-stable, ``(1/pi) int cos(xi z) exp(-t xi^alpha)``.

The ``jump`` and ``diffusion`` kinds are envelope forms on a space with
volume ``V(r) = r^d`` and scale ``Phi(r) = r^alpha``; they represent a band
of kernels and are only meaningful up to constants.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.special import gamma, gammaln

from .bernstein import bisect_increasing
from .errors import AccuracyError, DomainError

__all__ = ["ScaleFunction", "VolumeFunction", "HeatKernelSpec", "p0_radial", "m_solver"]

KINDS = ("gaussian", "cauchy", "stable", "jump", "diffusion")
CONCRETE = ("gaussian", "cauchy", "stable")


@dataclass(frozen=True)
class ScaleFunction:
    """Power scale function ``Phi(r) = r**alpha`` (weak scaling with ``alpha1 = alpha2 = alpha``)."""

    alpha: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise DomainError("scale exponent must be positive")

    @property
    def alpha1(self):
        return self.alpha

    @property
    def alpha2(self):
        return self.alpha

    def __call__(self, r):
        return np.asarray(r, dtype=float) ** self.alpha

    def inverse(self, s):
        return np.asarray(s, dtype=float) ** (1.0 / self.alpha)


@dataclass(frozen=True)
class VolumeFunction:
    """Power volume function ``V(r) = r**d``."""

    d: float

    def __post_init__(self):
        if not self.d > 0:
            raise DomainError("volume exponent must be positive")

    @property
    def d1(self):
        return self.d

    @property
    def d2(self):
        return self.d

    def __call__(self, r):
        return np.asarray(r, dtype=float) ** self.d


@dataclass(frozen=True)
class HeatKernelSpec:
    """A base heat kernel.

    ``alpha`` is the scale exponent and ``d`` the dimension. For the concrete
    kinds ``d = 1`` and ``alpha`` is fixed by the kind except for ``stable``.
    """

    kind: str
    alpha: float = 2.0
    d: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown kernel kind {self.kind!r}")
        fixed = {"gaussian": 2.0, "cauchy": 1.0}
        if self.kind in fixed:
            object.__setattr__(self, "alpha", fixed[self.kind])
        if self.kind in CONCRETE and self.d != 1:
            raise DomainError("concrete kernels are one-dimensional")
        if self.kind == "stable" and not 0 < self.alpha < 2:
            raise DomainError("stable kernel needs 0 < alpha < 2")
        if self.kind == "diffusion" and not self.alpha > 1:
            raise DomainError("diffusion envelope needs alpha > 1")
        if not self.alpha > 0:
            raise DomainError("alpha must be positive")

    @classmethod
    def gaussian(cls):
        return cls("gaussian")

    @classmethod
    def cauchy(cls):
        return cls("cauchy")

    @classmethod
    def stable(cls, alpha):
        return cls("stable", alpha)

    @property
    def Phi(self):
        return ScaleFunction(self.alpha)

    @property
    def V(self):
        return VolumeFunction(self.d)

    @property
    def concrete(self):
        return self.kind in CONCRETE

    def symbol(self, xi):
        """Fourier symbol ``psi`` with ``hat p0(t, xi) = exp(-t psi(xi))`` (concrete kinds)."""
        if not self.concrete:
            raise DomainError("envelope kernels have no Fourier symbol")
        return np.abs(np.asarray(xi, dtype=float)) ** self.alpha

    def __call__(self, t, z):
        return p0_radial(self, t, z)

    def to_dict(self):
        return {"kind": self.kind, "alpha": self.alpha, "d": self.d}

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d):
        try:
            kind = d["kind"]
        except (KeyError, TypeError):
            raise DomainError("kernel spec needs a 'kind' field") from None
        return cls(kind, float(d.get("alpha", 2.0)), float(d.get("d", 1.0)))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


# Beyond this scaled distance the tail expansion replaces the Fourier integral.
TAIL_START = 20.0


def _stable_tail(alpha, x):
    """``pi * p0(1, x)`` from ``sum (-1)^(k+1) Gamma(k a + 1)/k! sin(k pi a/2) x^(-k a - 1)``.

    Convergent for ``alpha < 1`` and asymptotic above; summed until the terms
    stop shrinking. Returns ``None`` if they never get below double precision.
    """
    total, prev = 0.0, math.inf
    logx = math.log(x)
    for k in range(1, 400):
        mag = math.exp(gammaln(k * alpha + 1) - gammaln(k + 1) - (k * alpha + 1) * logx)
        if mag > prev:
            break
        total += (-1) ** (k + 1) * mag * math.sin(k * math.pi * alpha / 2)
        if mag < 1e-16 * abs(total):
            return total
        prev = mag
    return None


def _stable_fourier(alpha, t, z):
    scale = t ** (1.0 / alpha)
    x = z / scale
    if x == 0:
        return gamma(1 + 1 / alpha) / (math.pi * scale)
    if x >= TAIL_START:
        tail = _stable_tail(alpha, x)
        if tail is not None:
            return tail / (math.pi * scale)
    # exp(-xi**alpha) is below 1e-18 beyond xi = 42**(1/alpha); QAWO handles the cosine.
    top = 42.0 ** (1.0 / alpha)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        val, err = quad(lambda xi: math.exp(-(xi**alpha)), 0.0, top, weight="cos", wvar=x,
                        epsabs=1e-16, epsrel=1e-12, limit=500)
    if err > 1e-9 * abs(val) + 1e-14:
        raise AccuracyError("stable kernel quadrature did not converge", err)
    return val / (math.pi * scale)


def p0_radial(spec, t, z):
    """``p0(t, x, y)`` at distance ``z = |x - y|``.

    Concrete kinds give the exact density. ``jump`` gives
    ``min(1/V(Phi^{-1}(t)), t/(V(z) Phi(z)))`` and ``diffusion`` gives
    ``exp(-m(t, z)) / V(Phi^{-1}(t))``.
    """
    t = np.asarray(t, dtype=float)
    z = np.asarray(z, dtype=float)
    if np.any(~(t > 0)):
        raise DomainError("t must be positive")
    if np.any(~(z >= 0)):
        raise DomainError("z must be non-negative")
    tb, zb = np.broadcast_arrays(t, z)
    if spec.kind == "gaussian":
        out = np.exp(-zb * zb / (4 * tb)) / np.sqrt(4 * np.pi * tb)
    elif spec.kind == "cauchy":
        with np.errstate(over="ignore"):
            out = tb / (np.pi * (tb * tb + zb * zb))
    elif spec.kind == "stable":
        out = np.vectorize(lambda a, b: _stable_fourier(spec.alpha, a, b), otypes=[float])(tb, zb)
    else:
        Phi, V = spec.Phi, spec.V
        diag = 1.0 / V(Phi.inverse(tb))
        if spec.kind == "jump":
            with np.errstate(divide="ignore"):
                off = tb / (V(zb) * Phi(zb))
            out = np.minimum(diag, off)
        else:
            out = diag * np.exp(-m_solver(Phi, tb, np.maximum(zb, 1e-300)))
    return float(out) if out.ndim == 0 else out


def m_solver(Phi, t, r):
    """Solve ``t / m = Phi(r / m)`` for ``m``.

    For ``Phi(r) = r**alpha`` with ``alpha > 1`` this is
    ``(r**alpha / t)**(1 / (alpha - 1))``. A general increasing ``Phi`` is
    handled by bisection on ``log Phi(r/m) - log(t/m)``, which decreases
    in ``m``.
    """
    t = np.asarray(t, dtype=float)
    r = np.asarray(r, dtype=float)
    if np.any(~(t > 0)) or np.any(~(r > 0)):
        raise DomainError("t and r must be positive")
    if isinstance(Phi, ScaleFunction):
        a = Phi.alpha
        if not a > 1:
            raise DomainError("m(t, r) needs a scale exponent above 1")
        out = (r**a / t) ** (1.0 / (a - 1))
    else:
        tb, rb = np.broadcast_arrays(t, r)

        def gap(m):
            return np.log(tb / m) - np.log(Phi(rb / m))

        out = bisect_increasing(gap, np.zeros(tb.shape))
    return float(out) if np.ndim(out) == 0 else out
