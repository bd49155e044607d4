"""Laplace exponents of driftless subordinators.

A :class:`BernsteinSpec` describes a Bernstein function ``phi`` with
``E[exp(-lam S_t)] = exp(-t phi(lam))`` and provides every scalar quantity
derived from it: the derivative and its generalized inverse, the inverse of
``phi``, the Levy density ``nu`` and its tail ``w(x) = nu(x, inf)``, the
conjugate exponent ``lam / phi(lam)`` and an empirical weak-scaling witness.

Three kinds are supported:

``stable``
    ``phi(lam) = lam**beta`` with ``0 < beta < 1``.
``mixture``
    ``phi(lam) = sum_i w_i lam**beta_i``.
``tabulated``
    ``phi`` sampled on a logarithmic grid and interpolated monotonically on
    log-log axes.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.special import gamma

from .errors import BracketError, DomainError, NotSpecialError, UnsupportedOperation

__all__ = [
    "BernsteinSpec",
    "ScalingWitness",
    "verify_weak_scaling",
    "bisect_increasing",
]

REL_TOL = 1e-12
MAX_ITER = 200


def _as_positive(x, name="lam"):
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError(f"{name} must be strictly positive, got {x!r}")
    return arr


def _out(arr, like):
    return float(arr) if np.ndim(like) == 0 else arr


def bisect_increasing(func, target, rel_tol=REL_TOL, max_iter=MAX_ITER, start=1.0):
    """Solve ``func(x) = target`` for a strictly increasing ``func`` on ``(0, inf)``.

    Works elementwise on arrays of targets. The bracket is grown with a
    doubling exponent, ``start * 2**(+-(2**k - 1))``, so the whole double range
    is reached in a few steps; it is then bisected in ``log x`` (at most
    ``max_iter`` times). Returns the upper end of the final bracket, so for a
    step-like ``func`` this is the generalized inverse
    ``inf{x : func(x) >= target}``.
    """
    target = np.asarray(target, dtype=float)
    lo = np.full(target.shape, float(start))
    hi = lo.copy()
    step = 1
    while True:
        need = func(lo) >= target
        if not np.any(need):
            break
        nxt = np.where(need, np.ldexp(lo, -step), lo)
        if step > 2048 or np.any(nxt == 0):
            raise BracketError("lower bracket not found above %g" % np.min(lo[need]))
        lo = nxt
        step *= 2
    step = 1
    while True:
        need = func(hi) < target
        if not np.any(need):
            break
        with np.errstate(over="ignore"):
            nxt = np.where(need, np.ldexp(hi, step), hi)
        if step > 2048 or np.any(np.isinf(nxt)):
            raise BracketError("upper bracket not found below %g" % np.max(hi[need]))
        hi = nxt
        step *= 2
    for _ in range(max_iter):
        if np.all(hi - lo <= rel_tol * hi):
            break
        mid = np.sqrt(lo) * np.sqrt(hi)
        below = func(mid) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return hi


@dataclass(frozen=True)
class BernsteinSpec:
    """Laplace exponent of a driftless subordinator with infinite Levy measure.

    Use the constructors :meth:`stable`, :meth:`mixture` and
    :meth:`tabulated` rather than instantiating directly. ``scale`` is the
    value of ``phi(1)`` before normalization (1 when no normalization was
    requested or needed).
    """

    kind: str
    components: tuple = ()
    table_lam: np.ndarray = field(default=None, compare=False, repr=False)
    table_phi: np.ndarray = field(default=None, compare=False, repr=False)
    normalize: bool = False
    scale: float = 1.0

    # -- construction -------------------------------------------------------
    @classmethod
    def stable(cls, beta):
        beta = float(beta)
        if not 0.0 < beta < 1.0:
            raise DomainError(f"stable index must lie in (0, 1), got {beta}")
        return cls("stable", ((1.0, beta),))

    @classmethod
    def mixture(cls, components, normalize=False):
        comps = tuple((float(w), float(b)) for w, b in components)
        if not comps:
            raise DomainError("mixture needs at least one component")
        for w, b in comps:
            if not (w > 0 and np.isfinite(w)):
                raise DomainError(f"mixture weight must be positive and finite, got {w}")
            if not 0.0 < b < 1.0:
                raise DomainError(f"mixture index must lie in (0, 1), got {b}")
        scale = 1.0
        if normalize:
            scale = sum(w for w, _ in comps)
            comps = tuple((w / scale, b) for w, b in comps)
        return cls("mixture", comps, normalize=normalize, scale=scale)

    @classmethod
    def tabulated(cls, lam, phi, normalize=False):
        lam = np.asarray(lam, dtype=float)
        phi = np.asarray(phi, dtype=float)
        if lam.ndim != 1 or lam.shape != phi.shape or lam.size < 4:
            raise DomainError("tabulated spec needs matching 1-d arrays with >= 4 points")
        if np.any(lam <= 0) or np.any(np.diff(lam) <= 0):
            raise DomainError("tabulation grid must be positive and strictly increasing")
        if np.any(phi <= 0) or np.any(np.diff(phi) <= 0):
            raise DomainError("tabulated phi must be positive and strictly increasing")
        spec = cls("tabulated", (), lam, phi)
        if normalize:
            scale = float(spec.phi(1.0))
            spec = cls("tabulated", (), lam, phi / scale, normalize=True, scale=scale)
        return spec

    # -- helpers ------------------------------------------------------------
    @property
    def beta(self):
        """Stable index for the ``stable`` kind, else ``None``."""
        return self.components[0][1] if self.kind == "stable" else None

    @property
    def beta_max(self):
        """Index governing ``phi`` at infinity (small-time behaviour)."""
        if self.kind == "tabulated":
            return float(self._loglog_slope()[-1])
        return max(b for _, b in self.components)

    @property
    def beta_min(self):
        """Index governing ``phi`` near zero (large-time behaviour)."""
        if self.kind == "tabulated":
            return float(self._loglog_slope()[0])
        return min(b for _, b in self.components)

    def _require_closed_form(self, what):
        if self.kind == "tabulated":
            raise UnsupportedOperation(f"{what} is not available for tabulated specs")

    def _loglog(self):
        x = np.log(self.table_lam)
        y = np.log(self.table_phi)
        return x, y

    def _loglog_slope(self):
        x, y = self._loglog()
        return np.gradient(y, x)

    def _tab_logphi(self, loglam):
        x, y = self._loglog()
        interp = PchipInterpolator(x, y, extrapolate=False)
        out = interp(loglam)
        s = self._loglog_slope()
        lo = loglam < x[0]
        hi = loglam > x[-1]
        out = np.where(lo, y[0] + s[0] * (loglam - x[0]), out)
        out = np.where(hi, y[-1] + s[-1] * (loglam - x[-1]), out)
        return out

    def _tab_slope(self, loglam):
        x, _ = self._loglog()
        s = self._loglog_slope()
        interp = PchipInterpolator(x, s, extrapolate=False)
        out = interp(np.clip(loglam, x[0], x[-1]))
        return out

    # -- the exponent and its derivative ---------------------------------------
    def phi(self, lam):
        """Evaluate ``phi(lam)`` for ``lam > 0``."""
        arr = _as_positive(lam)
        if self.kind == "tabulated":
            val = np.exp(self._tab_logphi(np.log(arr)))
        else:
            val = sum(w * arr**b for w, b in self.components)
        return _out(val, lam)

    def phi_complex(self, z):
        """Principal-branch continuation of ``phi`` to ``C \\ (-inf, 0]``."""
        self._require_closed_form("complex evaluation")
        z = np.asarray(z, dtype=complex)
        return sum(w * np.power(z, b) for w, b in self.components)

    def phi_prime(self, lam):
        """Derivative ``phi'(lam)``; non-increasing in ``lam``.

        Tabulated specs use a central difference of ``log phi`` on the
        tabulation grid, interpolated to ``lam``.
        """
        arr = _as_positive(lam)
        if self.kind == "tabulated":
            ll = np.log(arr)
            val = self._tab_slope(ll) * np.exp(self._tab_logphi(ll)) / arr
        else:
            val = sum(w * b * arr ** (b - 1.0) for w, b in self.components)
        return _out(val, lam)

    def phi_inverse(self, y):
        """Inverse of ``phi``: closed form for the stable kind, bisection otherwise."""
        arr = _as_positive(y, "y")
        if self.kind == "stable":
            return _out(arr ** (1.0 / self.beta), y)
        return _out(bisect_increasing(self.phi, arr), y)

    def phi_prime_inverse(self, y):
        """Generalized inverse ``inf{s > 0 : phi'(s) <= y}``."""
        arr = _as_positive(y, "y")
        if self.kind == "stable":
            b = self.beta
            with np.errstate(over="ignore"):
                return _out((arr / b) ** (1.0 / (b - 1.0)), y)
        # phi' is decreasing, so -phi' is increasing
        res = bisect_increasing(lambda s: -self.phi_prime(s), -arr)
        return _out(res, y)

    # -- Levy measure -------------------------------------------------------
    def levy_density(self, t):
        """Levy density ``nu(t)``."""
        self._require_closed_form("Levy density")
        arr = _as_positive(t, "t")
        val = sum(w * b / gamma(1.0 - b) * arr ** (-1.0 - b) for w, b in self.components)
        return _out(val, t)

    def levy_tail(self, x):
        """Tail ``w(x) = nu((x, inf))``; the weight of the fractional derivative."""
        self._require_closed_form("Levy tail")
        arr = _as_positive(x, "x")
        val = sum(w * arr ** (-b) / gamma(1.0 - b) for w, b in self.components)
        return _out(val, x)

    def levy_tail_integral(self, x):
        """``int_0^x w(s) ds``."""
        self._require_closed_form("Levy tail integral")
        arr = np.asarray(x, dtype=float)
        if np.any(arr < 0):
            raise DomainError("x must be non-negative")
        val = sum(w * arr ** (1.0 - b) / gamma(2.0 - b) for w, b in self.components)
        return _out(val, x)

    def potential_density_exact(self, t):
        """Closed-form potential density ``t**(beta-1)/Gamma(beta)``; stable kind only."""
        if self.kind != "stable":
            raise UnsupportedOperation("closed-form potential density needs a stable spec")
        b = self.beta
        arr = _as_positive(t, "t")
        return _out(arr ** (b - 1.0) / gamma(b), t)

    # -- conjugate ----------------------------------------------------------
    def conjugate(self, grid=None):
        """Conjugate exponent ``lam / phi(lam)``.

        Exact for the stable kind. Otherwise a tabulated spec on ``grid``
        (default ``logspace(-8, 8, 801)``) after checking that the tabulated
        values are increasing and concave.
        """
        if self.kind == "stable":
            return BernsteinSpec.stable(1.0 - self.beta)
        lam = np.logspace(-8, 8, 801) if grid is None else np.asarray(grid, float)
        vals = lam / self.phi(lam)
        if np.any(np.diff(vals) <= 0):
            raise NotSpecialError("lam/phi(lam) is not increasing on the grid")
        slopes = np.diff(vals) / np.diff(lam)
        if np.any(np.diff(slopes) > 1e-9 * np.abs(slopes[1:])):
            raise NotSpecialError("lam/phi(lam) fails the concavity check")
        return BernsteinSpec.tabulated(lam, vals)

    # -- serialization ------------------------------------------------------
    def to_dict(self):
        d = {"kind": self.kind, "normalize": self.normalize}
        if self.kind == "stable":
            d["beta"] = self.beta
        elif self.kind == "mixture":
            d["components"] = [list(c) for c in self.components]
            if self.normalize:
                d["components"] = [[w * self.scale, b] for w, b in self.components]
        else:
            d["lambda"] = self.table_lam.tolist()
            d["phi"] = (self.table_phi * self.scale).tolist()
        return d

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict) or "kind" not in d:
            raise DomainError("spec object must be a JSON object with a 'kind' field")
        kind = d["kind"]
        norm = bool(d.get("normalize", False))
        if kind == "stable":
            if "beta" not in d:
                raise DomainError("stable spec requires field 'beta'")
            return cls.stable(d["beta"])
        if kind == "mixture":
            if "components" not in d:
                raise DomainError("mixture spec requires field 'components'")
            return cls.mixture(d["components"], normalize=norm)
        if kind == "tabulated":
            for key in ("lambda", "phi"):
                if key not in d:
                    raise DomainError(f"tabulated spec requires field '{key}'")
            return cls.tabulated(d["lambda"], d["phi"], normalize=norm)
        raise DomainError(f"unknown spec kind {kind!r}")

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    @classmethod
    def parse(cls, text):
        """Parse ``stable:0.5``, ``mixture:0.5@0.3,0.5@0.7`` or a JSON object."""
        text = text.strip()
        if text.startswith("{"):
            return cls.from_json(text)
        kind, _, rest = text.partition(":")
        try:
            if kind == "stable":
                return cls.stable(float(rest))
            if kind == "mixture":
                comps = [tuple(float(v) for v in item.split("@")) for item in rest.split(",")]
                return cls.mixture(comps)
        except ValueError as exc:
            raise DomainError(f"malformed spec {text!r}: {exc}") from None
        raise DomainError(f"malformed spec {text!r}")


@dataclass
class ScalingWitness:
    """Empirical constants for ``c1 k**beta1 <= phi(k lam)/phi(lam) <= c2 k**beta2``."""

    beta1: float
    beta2: float
    c1: float
    c2: float
    grid: list
    c_star: float
    akm_min: float
    valid: bool


def verify_weak_scaling(spec, lam_grid, kappa_grid):
    """Fit the weak-scaling sandwich of ``spec`` on a probe grid.

    ``beta1``/``beta2`` are the extreme log-log slopes ``lam phi'/phi`` over
    the probed range and ``c1``/``c2`` the tightest constants for those
    exponents. Also reports ``c_star = max phi/(lam phi')`` and its minimum
    (which must be >= 1). The witness is flagged invalid rather than raising
    when the sandwich degenerates.
    """
    lam = np.asarray(lam_grid, dtype=float)
    kap = np.asarray(kappa_grid, dtype=float)
    if np.any(lam <= 0) or np.any(kap < 1):
        raise DomainError("lam grid must be positive and kappa grid >= 1")
    if np.log10(lam.max() / lam.min()) < 4 - 1e-9:
        raise DomainError("lam grid must span at least 4 decades")
    probe = np.unique(np.concatenate([lam, (lam[:, None] * kap[None, :]).ravel()]))
    slope = probe * spec.phi_prime(probe) / spec.phi(probe)
    beta1, beta2 = float(slope.min()), float(slope.max())
    L, K = np.meshgrid(lam, kap, indexing="ij")
    ratio = spec.phi(K * L) / spec.phi(L)
    c1 = float(np.min(ratio / K**beta1))
    c2 = float(np.max(ratio / K**beta2))
    inv = 1.0 / slope
    valid = bool(0 < beta1 <= beta2 < 1 and np.isfinite(c1) and np.isfinite(c2) and c1 > 0)
    return ScalingWitness(
        beta1=beta1,
        beta2=beta2,
        c1=c1,
        c2=c2,
        grid=list(zip(L.ravel().tolist(), K.ravel().tolist())),
        c_star=float(inv.max()),
        akm_min=float(inv.min()),
        valid=valid,
    )
