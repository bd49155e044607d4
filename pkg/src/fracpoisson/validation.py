"""Validation suites: each numbered check is an acceptance criterion of the library.

Every ``criterion_N`` function returns a :class:`CriterionResult` holding the
observed quantities, the limits they were compared against and the wall
time. ``quick=True`` halves grid densities and relaxes tolerances five-fold.
Suites group criteria for the command line.
"""
from __future__ import annotations

import functools
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from ._numerics import log_quad
from .bernstein import BernsteinSpec
from .estimates import EnvelopeSpec, fit_line, ratio_sweep
from .kernels import HeatKernelSpec
from .montecarlo import SamplerConfig, empirical_cdf_distance, inverse_mean_check, sample_inverse
from .solutions import (WeightFunction, conjugate_identity_residual, cumulative_identity_residual,
                        duhamel_solve, graded_grid, integrated_conjugate_residual, p_fourier,
                        p_kernel, pde_residual, q_fourier, q_kernel)
from .special import inverse_stable_density, mittag_leffler
from .subordinator import DensityEval

__all__ = ["Check", "CriterionResult", "CRITERIA", "SUITES", "run_criterion", "run_suite",
           "suite_criteria", "CASES"]

MIXTURE = ((0.5, 0.3), (0.5, 0.7))
QUICK_RELAX = 5.0
SEED = 20240601
# Largest band constant accepted for the q/H ratios.
Q_BAND = 20.0


@dataclass
class Check:
    name: str
    value: float
    limit: str
    passed: bool

    def line(self):
        mark = "PASS" if self.passed else "FAIL"
        return f"  [{mark}] {self.name}: {self.value:.6g} ({self.limit})"


@dataclass
class CriterionResult:
    number: int
    title: str
    checks: list = field(default_factory=list)
    seconds: float = 0.0
    budget: float = math.inf
    data: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(c.passed for c in self.checks) and self.seconds <= self.budget

    def le(self, name, value, limit):
        self.checks.append(Check(name, float(value), f"<= {limit:g}", bool(value <= limit)))

    def within(self, name, value, lo, hi):
        ok = bool(lo <= value <= hi)
        self.checks.append(Check(name, float(value), f"in [{lo:g}, {hi:g}]", ok))

    def summary_line(self):
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.number:2d}. {self.title} ({self.seconds:.1f}s / {self.budget:g}s)"

    def to_dict(self):
        d = asdict(self)
        d["passed"] = self.passed
        return d


def _n(n, quick):
    return max(2, n // 2) if quick else n


def _tol(tol, quick):
    return tol * QUICK_RELAX if quick else tol


def _betas(default, beta):
    return default if beta is None else (beta,)


def _stable(beta):
    return DensityEval.for_spec(BernsteinSpec.stable(beta))


def _mixture():
    return DensityEval.for_spec(BernsteinSpec.mixture(MIXTURE))


# -- criteria -----------------------------------------------------------------

def criterion_1(quick=False, beta=None, seed=SEED):
    res = CriterionResult(1, "Laplace round-trip of the subordinator density", budget=10)
    worst = 0.0
    for beta in _betas((0.3, 0.5, 0.8), beta):
        ev = _stable(beta)
        for r in (0.5, 1.0, 2.0):
            for lam in (0.5, 1.0, 5.0):
                worst = max(worst, abs(ev.laplace_numeric(r, lam) - math.exp(-r * lam**beta)))
    res.le("max |L[pbar](lam) - exp(-r phi(lam))|", worst, _tol(1e-6, quick))
    return res


def criterion_2(quick=False, beta=None, seed=SEED):
    res = CriterionResult(2, "beta = 1/2 density against the Levy closed form", budget=5)
    n = _n(20, quick)
    r = np.logspace(-1, 1, n)[:, None]
    t = np.logspace(-2, 2, n)[None, :]
    exact = r * t**-1.5 * np.exp(-r * r / (4 * t)) / (2 * math.sqrt(math.pi))
    got = _stable(0.5).density(r, t)
    with np.errstate(invalid="ignore", divide="ignore"):
        rel = np.where(exact > 0, np.abs(got / exact - 1), np.abs(got))
    res.le("max relative error on the (r, t) grid", rel.max(), _tol(1e-8, quick))
    return res


def criterion_3(quick=False, beta=None, seed=SEED):
    res = CriterionResult(3, "w * G = 1 and the tail transform for stable and mixture subordinators", budget=30)
    b = beta or 0.5
    for label, ev in ((f"stable({b:g})", _stable(b)), ("mixture", _mixture())):
        worst = max(abs(ev.w_conv_G(t) - 1) for t in (0.1, 1.0, 10.0))
        res.le(f"{label}: max |w*G - 1|", worst, _tol(1e-4, quick))
        sp = ev.spec
        lap = max(abs(log_quad(lambda x: math.exp(-lam * x) * sp.levy_tail(x), 1e-300, np.inf,
                               points=[1.0 / lam], epsrel=1e-12)[0] * lam / sp.phi(lam) - 1)
                  for lam in (0.5, 1.0, 5.0))
        res.le(f"{label}: max relative error of int exp(-lam x) w(x) dx = phi(lam)/lam", lap,
               _tol(1e-6, quick))
    return res


def criterion_4(quick=False, beta=None, seed=SEED):
    res = CriterionResult(4, "first-passage density formula against the inverse-stable form",
                          budget=60)
    n = _n(5, quick)
    for beta in _betas((0.3, 0.5), beta):
        ev = _stable(beta)
        worst = 0.0
        for t in np.logspace(-1, 1, n):
            for rel in np.logspace(-1, 0.5, n):
                r = rel * t**beta
                exact = inverse_stable_density(beta, t, r)
                worst = max(worst, abs(ev.inverse_density(t, r) / exact - 1))
        res.le(f"beta={beta}: max relative error", worst, _tol(1e-4, quick))
    return res


def criterion_5(quick=False, beta=None, seed=SEED):
    res = CriterionResult(5, "q and p by subordination against the Fourier oracle", budget=120)
    g = HeatKernelSpec.gaussian()
    b = beta or 0.5
    ev = _stable(b)
    wq = wp = 0.0
    for t in (0.25, 1.0, 4.0):
        for z in (0.0, 0.5, 1.0, 2.0):
            wq = max(wq, abs(q_kernel(g, ev, t, z)[0] / q_fourier(g, b, t, z)[0] - 1))
            wp = max(wp, abs(p_kernel(g, ev, t, z)[0] / p_fourier(g, b, t, z)[0] - 1))
    res.le("q: max relative error", wq, _tol(1e-3, quick))
    res.le("p: max relative error", wp, _tol(1e-3, quick))
    return res


IDENTITY_POINTS = ((0.5, 0.5), (1.0, 0.5), (1.0, 1.0), (2.0, 1.0), (2.0, 2.0), (4.0, 1.5))


def criterion_6(quick=False, beta=None, seed=SEED):
    res = CriterionResult(6, "cumulative and integrated conjugate identities", budget=120)
    g = HeatKernelSpec.gaussian()
    ev = _stable(beta or 0.5)
    pts = IDENTITY_POINTS[::2] if quick else IDENTITY_POINTS
    cum = max(cumulative_identity_residual(g, ev, t, z) for t, z in pts)
    con = max(integrated_conjugate_residual(g, ev, t, z) for t, z in pts)
    res.le("max cumulative-identity residual", cum, _tol(1e-3, quick))
    res.le("max integrated-conjugate residual", con, _tol(1e-3, quick))
    return res


CONJUGATE_POINTS = ((0.5, 0.5), (1.0, 1.0), (2.0, 1.5))


def criterion_7(quick=False, beta=None, seed=SEED):
    res = CriterionResult(7, "q equals the conjugate derivative of p", budget=180)
    g = HeatKernelSpec.gaussian()
    pts = CONJUGATE_POINTS[:2] if quick else CONJUGATE_POINTS
    n = 80 if quick else 160
    for beta in _betas((0.3, 0.5), beta):
        ev = _stable(beta)
        worst = max(conjugate_identity_residual(g, ev, t, z, n=n)[0] for t, z in pts)
        res.le(f"beta={beta}: max relative residual", worst, _tol(1e-2, quick))
    return res


def sub_envelope_band(ev, n, x_max=0.5, decades=3):
    """Range of ``t pbar(r, t) / (r phi(1/t))`` over ``r phi(1/t) <= x_max``.

    The grid is ``n x n`` in ``(t, x = r phi(1/t))``, both spanning
    ``decades`` decades.
    """
    ts = np.logspace(-decades / 2, decades / 2, n)
    xs = x_max * np.logspace(-decades, 0, n)
    ratios = []
    for t in ts:
        ph = float(ev.spec.phi(1.0 / t))
        r = xs / ph
        dens = ev.density_with_error(r, t)[0]
        ratios.append(t * dens / xs)
    ratios = np.concatenate(ratios)
    return float(ratios.min()), float(ratios.max())


def criterion_8(quick=False, beta=None, seed=SEED):
    res = CriterionResult(8, "small-time envelope of the subordinator density", budget=60)
    n = _n(13, quick)
    b = beta or 0.5
    for label, ev in ((f"stable({b:g})", _stable(b)), ("mixture", _mixture())):
        lo, hi = sub_envelope_band(ev, n)
        lo2, hi2 = sub_envelope_band(ev, 2 * n - 1)
        res.within(f"{label}: min ratio", lo, 0.05, 20)
        res.within(f"{label}: max ratio", hi, 0.05, 20)
        change = abs((hi2 / lo2) / (hi / lo) - 1)
        res.le(f"{label}: band-width change under grid doubling", change, 0.10)
        res.data[label] = {"band": [lo, hi], "doubled": [lo2, hi2]}
    return res


def criterion_9(quick=False, beta=None, seed=SEED):
    res = CriterionResult(9, "mode of the subordinator density", budget=30)
    n = _n(9, quick)
    rs = np.logspace(-2, 2, n)
    b = beta or 0.5
    ev = _stable(b)
    if b == 0.5:
        err = max(abs(ev.mode(r) / (r * r / 6) - 1) for r in rs)
        res.le("beta=1/2: max relative error of a_r against r^2/6", err, _tol(1e-6, quick))
    # For phi = sum c_i lam**b_i the scaled mode tends to the pure-stable
    # constants of the largest (r -> 0) and smallest (r -> oo) index.
    limits = {k: _stable(k).mode(1.0) for k in (0.3, b, 0.7)}
    for label, e, bs in ((f"stable({b:g})", ev, (b,)), ("mixture", _mixture(), (0.3, 0.7))):
        lo, hi = min(limits[b] for b in bs), max(limits[b] for b in bs)
        scaled = np.array([e.mode(r) * float(e.spec.phi_inverse(1.0 / r))
                           for r in rs])
        res.within(f"{label}: min a_r phi^-1(1/r), band [{lo:.4g}, {hi:.4g}] +-10%",
                   scaled.min(), 0.9 * lo, 1.1 * hi)
        res.within(f"{label}: max a_r phi^-1(1/r)", scaled.max(), 0.9 * lo, 1.1 * hi)
        res.data[label] = {"band": [lo, hi], "scaled_mode": scaled.tolist()}
    return res


def _q_env_grid(n, beta, alpha, decades=3, span=(-2.0, 2.0)):
    ts = np.logspace(-decades / 2, decades / 2, n)
    # Odd count: the regime boundary z = t**(beta/alpha) is always a node.
    rel = np.logspace(span[0], span[1], 2 * n + 1)
    return ts, (lambda t: rel * t ** (beta / alpha))


def criterion_10(quick=False, beta=None, seed=SEED):
    res = CriterionResult(10, "Cauchy kernel: q against the H envelopes", budget=300)
    beta, kern = beta or 0.5, HeatKernelSpec.cauchy()
    ev = _stable(beta)
    env = EnvelopeSpec("stable_jump", d=1, alpha=1, beta=beta)
    compute = lambda t, z: q_kernel(kern, ev, t, z)  # noqa: E731
    n = _n(7, quick)
    C = []
    for m, span in ((n, (-2, 2)), (2 * n - 1, (-2, 2)), (n, (-3, 3))):
        ts, zs = _q_env_grid(m, beta, 1.0, span=span)
        C.append(ratio_sweep(compute, env, ts, zs).band_constant())
    res.le("band constant C (q/H in [1/C, C])", C[0], Q_BAND)
    res.le("relative change of C under grid doubling", abs(C[1] / C[0] - 1), 0.10)
    res.le("relative change of C over six decades of z / t^(beta/alpha)", abs(C[2] / C[0] - 1),
           0.10)
    zs = np.logspace(2, 3, _n(8, quick))
    far = fit_line(np.log(zs), np.log([compute(1.0, z)[0] for z in zs]))[0]
    res.le("|far-field z-slope + (d + alpha)|", abs(far + 2.0), 0.05)
    ts = np.logspace(-1.5, 1.5, _n(8, quick))
    near = fit_line(np.log(ts), np.log([compute(t, 0.0)[0] for t in ts]))[0]
    res.le("|near-diagonal t-slope - (beta - 1 - beta d/alpha)|", abs(near - (beta - 1 - beta)),
           0.05)
    res.data.update({"C": C, "far_slope": far, "near_slope": near})
    return res


def criterion_11(quick=False, beta=None, seed=SEED):
    res = CriterionResult(11, "Gaussian kernel: q against the H envelopes", budget=300)
    beta, alpha, kern = beta or 0.5, 2.0, HeatKernelSpec.gaussian()
    ev = _stable(beta)
    env = EnvelopeSpec("stable_diffusion", d=1, alpha=alpha, beta=beta)
    compute = lambda t, z: q_kernel(kern, ev, t, z)  # noqa: E731
    n = _n(7, quick)
    ts = np.logspace(-1.5, 1.5, n)
    near = ratio_sweep(compute, env, ts, lambda t: np.logspace(-2, 0, n) * t ** (beta / alpha))
    res.le("near-diagonal band constant C", near.band_constant(("near",)), Q_BAND)
    slopes, r2s = [], []
    for t in ts:
        s0 = t ** (beta / alpha)
        zs = np.linspace(2 * s0, 8 * s0, _n(16, quick))
        nn = (zs**alpha / t**beta) ** (1 / (alpha - beta))
        slope, _, r2 = fit_line(nn, [-math.log(compute(t, z)[0]) for z in zs])
        slopes.append(slope), r2s.append(r2)
    res.within("min fitted exponent slope", min(slopes), 1e-3, 1e3)
    res.within("max fitted exponent slope", max(slopes), 1e-3, 1e3)
    res.within("min R^2 of -log q against n(t, z)", min(r2s), 0.99, 1.0)
    res.data.update({"slopes": slopes, "r2": r2s})
    return res


def criterion_12(quick=False, beta=None, seed=SEED):
    res = CriterionResult(12, "PDE residual of the Duhamel solution", budget=300)
    beta = beta or 0.5
    ev = _stable(beta)
    n = _n(64, quick)
    x = np.linspace(0, 2 * np.pi, n, endpoint=False)
    t = graded_grid(1.0, n - 1, 3.0)
    f = lambda s, y: np.cos(y) * np.ones_like(s)  # noqa: E731
    u = duhamel_solve(HeatKernelSpec.gaussian(), ev, None, f, t, x)
    resid = pde_residual(u, f, WeightFunction.caputo(beta))
    res.le("scaled residual max |d^w u - u_xx - f| / (1 + |f|)", resid, _tol(5e-2, quick))
    mode = np.array([0.0] + [1 - mittag_leffler(beta, 1.0, -s**beta) for s in t[1:]])
    err = np.abs(u.values - mode[:, None] * np.cos(x)[None, :]).max()
    res.le("max deviation from the single-mode Fourier solution", err, _tol(1e-3, quick))
    return res


def criterion_13(quick=False, beta=None, seed=SEED):
    res = CriterionResult(13, "Monte Carlo against the analytic laws", budget=120)
    n = 20_000 if quick else 100_000
    for beta in _betas((0.3, 0.5), beta):
        cfg = SamplerConfig(beta, n, seed=seed)
        ks = empirical_cdf_distance(cfg, _stable(beta), 1.0)
        res.le(f"beta={beta}: KS distance for S_1", ks, 0.01 * (math.sqrt(1e5 / n)))
        x = sample_inverse(cfg, 1.0)
        mean, se, exact = inverse_mean_check(cfg, 1.0, x)
        res.le(f"beta={beta}: |mean(E_1) - 1/Gamma(1+beta)| / SE", abs(mean - exact) / se, 3.0)
    return res


CRITERIA = {i: globals()[f"criterion_{i}"] for i in range(1, 14)}

SUITES = {
    "scaling": (1, 2),
    "unimodality": (9,),
    "sub-envelope": (8,),
    "identities": (3, 4, 6),
    "conjugate": (7,),
    "q-envelope": (5, 10, 11),
    "pde": (12,),
    "montecarlo": (13,),
}


# Cases of the q-envelope suite.
CASES = {"oracle": 5, "cauchy": 10, "gaussian": 11}


def run_criterion(number, quick=False, beta=None, seed=None):
    """Run one criterion; ``beta`` replaces the stable index(es) it uses and
    ``seed`` the Monte Carlo seed."""
    if beta is not None and not 0 < beta < 1:
        raise ValueError("beta must lie in (0, 1)")
    fn = CRITERIA[number]
    t0 = time.perf_counter()
    res = fn(quick, beta, SEED if seed is None else seed)
    res.seconds = time.perf_counter() - t0
    return res


def suite_criteria(name, case=None):
    """Criterion numbers run by suite ``name`` (``case`` narrows ``q-envelope``)."""
    if name == "all":
        numbers = tuple(sorted(CRITERIA))
    elif name in SUITES:
        numbers = SUITES[name]
    else:
        raise KeyError(f"unknown suite {name!r}")
    if case is not None:
        if name != "q-envelope" or case not in CASES:
            raise KeyError(f"unknown case {case!r} for suite {name!r}")
        numbers = (CASES[case],)
    return numbers


def run_suite(name, quick=False, beta=None, case=None, seed=None, runner=map):
    """Run a suite. ``runner`` maps a callable over the criterion numbers
    (e.g. a process pool's ``map``); results keep the criterion order."""
    numbers = suite_criteria(name, case)
    return list(runner(functools.partial(run_criterion, quick=quick, beta=beta, seed=seed), numbers))
