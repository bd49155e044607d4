"""Command-line entry point: ``fracpoisson eval ...`` and ``fracpoisson validate ...``.

Exit codes: 0 success, 1 validation failure, 2 configuration error,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .bernstein import BernsteinSpec
from .errors import DomainError, FracPoissonError
from .kernels import HeatKernelSpec
from .solutions import duhamel_solve, graded_grid, p_kernel, q_kernel
from .subordinator import DensityEval
from .validation import CASES, SUITES, run_suite, suite_criteria

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
WORKERS_ENV = "FRACPOISSON_WORKERS"
QUANTITIES = ("phi", "density", "inverse-density", "potential", "qkernel", "pkernel", "solve")
SUITE_NAMES = tuple(SUITES) + ("all",)


class ConfigError(Exception):
    """Invalid command-line or config-file input."""


# -- parsing helpers ----------------------------------------------------------

def parse_grid(text, name="grid", positive=True):
    """``min:max:count`` (log-spaced) or a comma-separated list of values."""
    text = str(text).strip()
    try:
        if ":" in text:
            lo, hi, count = text.split(":")
            lo, hi, count = float(lo), float(hi), int(count)
            if not (lo > 0 and hi > 0):
                raise ConfigError(f"{name}: log grid bounds must be strictly positive")
            if count < 2:
                raise ConfigError(f"{name}: grid count must be at least 2")
            return np.logspace(math.log10(lo), math.log10(hi), count)
        vals = np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise ConfigError(f"{name}: cannot parse {text!r}; expected min:max:count or a,b,c") \
            from None
    if not np.all(np.isfinite(vals)) or (positive and np.any(vals <= 0)):
        raise ConfigError(f"{name}: values must be {'strictly positive' if positive else 'finite'}")
    return vals


def parse_spec(args):
    if args.spec is not None and args.beta is not None:
        raise ConfigError("--spec and --beta are mutually exclusive")
    if args.spec is None:
        return BernsteinSpec.stable(0.5 if args.beta is None else args.beta)
    try:
        return BernsteinSpec.parse(args.spec)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"--spec: JSON error at line {exc.lineno}, column {exc.colno}: "
                          f"{exc.msg}") from None
    except (DomainError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"--spec: {exc}") from None


def parse_kernel(args):
    text = args.kernel
    if text.startswith("{"):
        try:
            return HeatKernelSpec.from_json(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"--kernel: JSON error at line {exc.lineno}, column {exc.colno}: "
                              f"{exc.msg}") from None
        except DomainError as exc:
            raise ConfigError(f"--kernel: {exc}") from None
    kind, _, alpha = text.partition(":")
    try:
        if kind == "stable":
            return HeatKernelSpec.stable(float(alpha))
        return HeatKernelSpec(kind)
    except (DomainError, ValueError) as exc:
        raise ConfigError(f"--kernel: {exc}") from None


def worker_count(flag):
    if flag is not None:
        n = flag
    elif os.environ.get(WORKERS_ENV):
        try:
            n = int(os.environ[WORKERS_ENV])
        except ValueError:
            raise ConfigError(f"{WORKERS_ENV} must be an integer") from None
    else:
        n = len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else os.cpu_count()
    if n < 1:
        raise ConfigError("worker count must be at least 1")
    return n


def ordered_map(fn, items, workers):
    """``map`` over ``items``, optionally on a process pool; results keep input order."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return list(map(fn, items))
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))


# -- evaluation -----------------------------------------------------------------

def _kernel_point(which, kdict, sdict, t, z):
    kspec = HeatKernelSpec.from_dict(kdict)
    ev = DensityEval.for_spec(BernsteinSpec.from_dict(sdict))
    fn = q_kernel if which == "qkernel" else p_kernel
    return fn(kspec, ev, t, z)


def _kernel_task(args):
    return _kernel_point(*args)


def _grid_or_value(args, name, positive=True):
    grid = getattr(args, f"{name}_grid")
    value = getattr(args, name)
    if (grid is None) == (value is None):
        raise ConfigError(f"eval {args.quantity} needs exactly one of --{name} and --{name}-grid")
    if grid is not None:
        return parse_grid(grid, f"--{name}-grid", positive)
    if positive and not value > 0:
        raise ConfigError(f"--{name} must be strictly positive")
    return np.array([float(value)])


def evaluate(args, workers=1):
    """Columns and rows for ``eval``; raises :class:`ConfigError` or library errors."""
    q = args.quantity
    spec = parse_spec(args)
    if q == "phi":
        lam = _grid_or_value(args, "lam")
        val = np.atleast_1d(spec.phi(lam))
        return ["lam", "value", "error"], [(a, v, 0.0) for a, v in zip(lam, val)]
    ev = DensityEval.for_spec(spec)
    if q == "density":
        r = _grid_or_value(args, "r")
        t = _grid_or_value(args, "t")
        R, T = np.meshgrid(r, t, indexing="ij")
        val, err = ev.density_with_error(R.ravel(), T.ravel())
        return ["r", "t", "value", "error"], list(zip(R.ravel(), T.ravel(), val, err))
    if q == "inverse-density":
        t = _grid_or_value(args, "t")
        r = _grid_or_value(args, "r")
        T, R = np.meshgrid(t, r, indexing="ij")
        val, err = ev.inverse_density_with_error(T.ravel(), R.ravel())
        return ["t", "r", "value", "error"], list(zip(T.ravel(), R.ravel(), val, err))
    if q == "potential":
        t = _grid_or_value(args, "t")
        val, err = ev.potential_density_with_error(t)
        return ["t", "value", "error"], list(zip(t, val, err))
    if q in ("qkernel", "pkernel"):
        kspec = parse_kernel(args)
        t = _grid_or_value(args, "t")
        z = _grid_or_value(args, "z", positive=False)
        if np.any(z < 0):
            raise ConfigError("--z values must be non-negative")
        pts = [(ti, zi) for ti in t for zi in z]
        tasks = [(q, kspec.to_dict(), spec.to_dict(), ti, zi) for ti, zi in pts]
        out = ordered_map(_kernel_task, tasks, workers)
        return ["t", "z", "value", "error"], [(ti, zi, v, e) for (ti, zi), (v, e) in
                                              zip(pts, out)]
    if q == "solve":
        return _solve(args, spec, ev)
    raise ConfigError(f"unknown quantity {q!r}")


def _solve(args, spec, ev):
    kspec = parse_kernel(args)
    if kspec.kind != "gaussian":
        raise ConfigError("eval solve supports the gaussian kernel only")
    if args.nt < 2 or args.nx < 8:
        raise ConfigError("eval solve needs --nt >= 2 and --nx >= 8")
    if not args.T > 0:
        raise ConfigError("--T must be strictly positive")
    x = np.linspace(0.0, 2 * np.pi, args.nx, endpoint=False)
    t = graded_grid(args.T, args.nt - 1, args.grading)
    f = None if args.source == "none" else (lambda s, y: np.cos(y) * np.ones_like(s))
    g = None if args.initial == "none" else (lambda y: np.exp(np.cos(y)))
    u = duhamel_solve(kspec, ev, g, f, t, x)
    return ["t", "x", "value", "error"], list(u.rows())


def format_csv(columns, rows):
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(columns)
    for row in rows:
        wr.writerow([f"{float(v):.17g}" for v in row])
    return buf.getvalue()


def format_json(columns, rows, config):
    doc = {"version": __version__, "config": config, "columns": columns,
           "rows": [[float(v) for v in row] for row in rows]}
    return json.dumps(doc, indent=1) + "\n"


def _emit(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _config_echo(args):
    return {k: v for k, v in vars(args).items() if k not in ("func", "config")}


def cmd_eval(args):
    workers = worker_count(args.workers)
    columns, rows = evaluate(args, workers)
    fmt = args.format or ("json" if str(args.output).endswith(".json") else "csv")
    text = format_csv(columns, rows) if fmt == "csv" else format_json(columns, rows,
                                                                       _config_echo(args))
    _emit(text, args.output)
    return EXIT_OK


def cmd_validate(args):
    workers = worker_count(args.workers)
    try:
        numbers = suite_criteria(args.suite, args.case)
    except KeyError as exc:
        raise ConfigError(str(exc.args[0])) from None
    if args.beta is not None and not 0 < args.beta < 1:
        raise ConfigError("--beta must lie in (0, 1)")
    if workers > 1 and len(numbers) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(numbers))) as pool:
            results = run_suite(args.suite, args.quick, args.beta, args.case, args.seed,
                                runner=pool.map)
    else:
        results = run_suite(args.suite, args.quick, args.beta, args.case, args.seed)
    for res in results:
        print(res.summary_line())
        for c in res.checks:
            print(c.line())
    passed = all(r.passed for r in results)
    print(f"{sum(r.passed for r in results)}/{len(results)} criteria passed")
    if args.report:
        doc = {"version": __version__, "config": _config_echo(args), "passed": passed,
               "criteria": [r.to_dict() for r in results]}
        with open(args.report, "w") as fh:
            json.dump(doc, fh, indent=1, default=float)
            fh.write("\n")
    return EXIT_OK if passed else EXIT_FAIL


# -- argument parser --------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="fracpoisson", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file whose keys mirror the long flags")
    common.add_argument("--workers", type=int, default=None,
                        help=f"worker processes (default: ${WORKERS_ENV} or all CPUs)")
    common.add_argument("--beta", type=float, default=None, help="stable index")

    e = sub.add_parser("eval", parents=[common], help="evaluate a quantity on a grid")
    e.add_argument("quantity", choices=QUANTITIES)
    e.add_argument("--spec", default=None,
                   help="stable:B, mixture:C@B,C@B or a JSON spec (default stable:0.5)")
    e.add_argument("--kernel", default="gaussian", help="gaussian, cauchy, stable:ALPHA or JSON")
    for name in ("lam", "r", "t", "z"):
        e.add_argument(f"--{name}", type=float, default=None)
        e.add_argument(f"--{name}-grid", default=None, help="min:max:count or a,b,c")
    e.add_argument("--T", type=float, default=1.0, help="final time for solve")
    e.add_argument("--nt", type=int, default=64, help="time nodes for solve")
    e.add_argument("--nx", type=int, default=64, help="space nodes for solve")
    e.add_argument("--grading", type=float, default=3.0, help="time-grid grading for solve")
    e.add_argument("--source", choices=("cos", "none"), default="cos")
    e.add_argument("--initial", choices=("expcos", "none"), default="none")
    e.add_argument("--format", choices=("csv", "json"), default=None)
    e.add_argument("-o", "--output", default=None, help="output file (default stdout)")
    e.set_defaults(func=cmd_eval)

    v = sub.add_parser("validate", parents=[common], help="run an acceptance suite")
    v.add_argument("suite", choices=SUITE_NAMES)
    v.add_argument("--quick", action="store_true", help="coarser grids, 5x looser tolerances")
    v.add_argument("--case", choices=tuple(CASES), default=None,
                   help="q-envelope case (default: all three)")
    v.add_argument("--report", default=None, help="JSON report path")
    v.add_argument("--seed", type=int, default=None, help="Monte Carlo seed")
    v.set_defaults(func=cmd_validate)
    return p, {"eval": e, "validate": v}


def _load_config(path, subparser):
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: JSON error at line {exc.lineno}, column {exc.colno}: "
                          f"{exc.msg}") from None
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: top level must be an object")
    known = {a.dest: a for a in subparser._actions}
    out = {}
    for key, val in cfg.items():
        dest = key.replace("-", "_")
        if dest not in known or dest in ("help", "config"):
            raise ConfigError(f"{path}: unknown field {key!r}")
        act = known[dest]
        if act.type is not None and val is not None:
            try:
                val = act.type(val)
            except (TypeError, ValueError):
                raise ConfigError(f"{path}: field {key!r} has invalid value {val!r}") from None
        if act.choices is not None and val not in act.choices:
            raise ConfigError(f"{path}: field {key!r} must be one of {list(act.choices)}")
        out[dest] = val
    return out


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser, subs = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        if args.config:
            cfg = _load_config(args.config, subs[args.command])
            # Flags given explicitly on the command line win over the file.
            subs[args.command].set_defaults(**cfg)
            args = parser.parse_args(argv)
        return args.func(args)
    except (ConfigError, DomainError) as exc:
        print(f"fracpoisson: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FracPoissonError as exc:
        op = f"{args.command} {getattr(args, 'quantity', getattr(args, 'suite', ''))}".strip()
        print(f"fracpoisson: numerical failure in {op}: {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
