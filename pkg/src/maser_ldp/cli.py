"""Command-line front end: config handling, grid sweeps, CSV emission.

Flat key=value config files with command-line overrides; every sweep is
deterministic given its config (seeds included), and every CSV ends with a
manifest line recording completeness, the package version and a hash of
the effective config.  Numerical non-convergence aborts with exit code 2
after flushing the rows computed so far with complete=false.
"""

import argparse
import hashlib
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields, replace

import numpy as np

from . import __version__
from .model import (MaserParams, effective_potential, stationary)
from .spectral import full_spectrum, lambda_derivative, spectral_bound, cumulants
from .ldp import rate_function
from .trajectories import simulate
from . import validation

__all__ = ["RunConfig", "main", "run"]

COMMANDS = ("stationary", "potential", "trajectory", "grid", "zoom",
            "spectrum", "cumulants", "ldp", "validate")


class CliError(Exception):
    """Usage or configuration error (exit code 1)."""


class GridPointError(Exception):
    """Numerical failure at a specific grid point (exit code 2)."""

    def __init__(self, point, cause):
        super().__init__(f"non-convergence at grid point {point}: {cause}")
        self.point = point


@dataclass(frozen=True)
class RunConfig:
    """Effective run configuration; all fields round-trip through text."""

    command: str = ""
    nex: float = 150.0
    alpha: float = 6.6
    nu: float = 0.15
    tail_tol: float = 1e-10
    rel_tol: float = 1e-10
    alpha_min: float = 0.5
    alpha_max: float = 12.0
    alpha_steps: int = 24
    s_min: float = -1.0
    s_max: float = 1.0
    s_steps: int = 41
    x_min: float = math.nan  # nan = derive from the attainable slope range
    x_max: float = math.nan
    x_steps: int = 41
    ldp_s_max: float = 2.0
    t_max: float = 50.0
    n_traj: int = 3
    zoom_halfwidth: float = 1e-6
    zoom_steps: int = 21
    nex_list: tuple = (50.0, 100.0, 150.0)
    s_value: float = 0.0  # tilting field for single-point commands (spectrum)
    spectrum_dim: int = 0  # 0 = use the converged truncation
    seed: int = 0
    threads: int = 0  # 0 = MASER_LDP_THREADS env var, else 1

    def validate(self):
        if self.command not in COMMANDS:
            raise CliError(f"unknown command {self.command!r}")
        for lo, hi, steps in (("alpha_min", "alpha_max", "alpha_steps"),
                              ("s_min", "s_max", "s_steps")):
            if getattr(self, steps) < 1:
                raise CliError(f"{steps} must be >= 1")
            if getattr(self, lo) > getattr(self, hi):
                raise CliError(f"{lo} must be <= {hi}")
        if self.x_steps < 1:
            raise CliError("x_steps must be >= 1")
        if not self.nex_list:
            raise CliError("nex_list must be non-empty")
        if self.nex < 0 or self.nu < 0:
            raise CliError("nex and nu must be >= 0")
        return self


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _parse_value(key, text):
    if key not in _FIELD_TYPES:
        raise CliError(f"unknown config key {key!r}")
    kind = _FIELD_TYPES[key]
    name = kind if isinstance(kind, str) else kind.__name__
    try:
        if name == "tuple":
            return tuple(float(x) for x in text.split(",") if x.strip())
        if name == "int":
            return int(text)
        if name == "float":
            return float(text)
        return text
    except ValueError as exc:
        raise CliError(f"bad value for {key}: {text!r} ({exc})") from exc


def _format_value(value):
    if isinstance(value, tuple):
        return ",".join(repr(float(x)) for x in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def config_lines(cfg: RunConfig):
    return [f"{f.name}={_format_value(getattr(cfg, f.name))}"
            for f in fields(RunConfig)]


def config_hash(cfg: RunConfig) -> str:
    digest = hashlib.sha256("\n".join(config_lines(cfg)).encode()).hexdigest()
    return digest[:12]


def load_config_file(path):
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for ln, line in enumerate(fh, 1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise CliError(f"{path}:{ln}: expected key=value, got {line!r}")
                key, _, text = line.partition("=")
                key = key.strip()
                out[key] = _parse_value(key, text.strip())
    except OSError as exc:
        raise CliError(f"cannot read config {path}: {exc}") from exc
    return out


def _fmt_cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _write_csv(path, header, rows, cfg, complete=True):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt_cell(v) for v in row) + "\n")
        fh.write(f"# complete={'true' if complete else 'false'} "
                 f"version={__version__} config_hash={config_hash(cfg)}\n")


def _thread_count(cfg):
    if cfg.threads > 0:
        return cfg.threads
    env = os.environ.get("MASER_LDP_THREADS", "")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        return 1


def _sweep(points, fn, threads):
    """Evaluate fn over points; rows kept in point order regardless of
    completion order.  Returns (rows, failure) with failure=(point, exc)."""
    rows = []
    if threads <= 1:
        for pt in points:
            try:
                rows.extend(fn(pt))
            except Exception as exc:  # noqa: BLE001 - reported with the point
                return rows, (pt, exc)
        return rows, None
    with ThreadPoolExecutor(max_workers=threads) as ex:
        futures = [ex.submit(fn, pt) for pt in points]
        for pt, fut in zip(points, futures):
            try:
                rows.extend(fut.result())
            except Exception as exc:  # noqa: BLE001
                for other in futures:
                    other.cancel()
                return rows, (pt, exc)
    return rows, None


def _params(cfg, alpha=None, nex=None):
    nex = cfg.nex if nex is None else nex
    alpha = cfg.alpha if alpha is None else alpha
    if nex <= 0:
        raise CliError("alpha-parameterized commands require nex > 0")
    return MaserParams.from_alpha(nex, alpha, cfg.nu)


def _spectral_row(params, s, rel_tol):
    res = spectral_bound(params, s, rel_tol)
    if not res.converged:
        raise RuntimeError(f"spectral truncation did not converge (dim {res.dim_used})")
    slope = lambda_derivative(params, s, rel_tol)
    return res, slope


def _cmd_stationary(cfg, out):
    alphas = np.linspace(cfg.alpha_min, cfg.alpha_max, cfg.alpha_steps)

    def point(alpha):
        ss = stationary(_params(cfg, alpha=alpha), cfg.tail_tol)
        mean_row = [(alpha, ss.mean, ss.variance, ss.tail_mass, ss.dim)]
        dist_rows = [(alpha, n, ss.probs[n]) for n in range(ss.dim)]
        return [(mean_row, dist_rows)]

    results, failure = _sweep(alphas, point, _thread_count(cfg))
    mean_rows = [r for block, _ in results for r in block]
    dist_rows = [r for _, block in results for r in block]
    _write_csv(out("stationary_mean.csv"),
               ("alpha", "mean", "variance", "tail_mass", "dim"),
               mean_rows, cfg, complete=failure is None)
    _write_csv(out("stationary_dist.csv"), ("alpha", "n", "prob"),
               dist_rows, cfg, complete=failure is None)
    if failure:
        raise GridPointError(f"alpha={failure[0]}", failure[1])


def _cmd_potential(cfg, out):
    params = _params(cfg)
    ss = stationary(params, cfg.tail_tol)
    pot = effective_potential(params, ss)
    rows = [(n, pot.values[n], n / cfg.nex, pot.values[n] / cfg.nex)
            for n in range(ss.dim)]
    _write_csv(out("potential.csv"), ("n", "U", "x", "U_over_nex"), rows, cfg)
    lim = [(x, v) for x, v in pot.limit_samples]
    _write_csv(out("potential_limit.csv"), ("x", "v"), lim, cfg)


def _cmd_trajectory(cfg, out):
    params = _params(cfg)
    rows = []
    for i in range(cfg.n_traj):
        seed = cfg.seed + i
        traj = simulate(params, 0, cfg.t_max, seed)
        rows.append((i, seed, 0.0, 0, traj.initial, 0))
        count = 0
        for t, jump, level in traj.events:
            if jump == 1:
                count += 1
            rows.append((i, seed, t, jump, level, count))
    _write_csv(out("trajectory.csv"),
               ("traj_id", "seed", "time", "jump_type", "level", "count"),
               rows, cfg)


def _cmd_grid(cfg, out):
    alphas = np.linspace(cfg.alpha_min, cfg.alpha_max, cfg.alpha_steps)
    svals = np.linspace(cfg.s_min, cfg.s_max, cfg.s_steps)
    points = [(a, s) for a in alphas for s in svals]

    def point(pt):
        a, s = pt
        res, slope = _spectral_row(_params(cfg, alpha=a), s, cfg.rel_tol)
        return [(a, s, res.lambda_s, slope, res.gap, res.dim_used, res.converged)]

    rows, failure = _sweep(points, point, _thread_count(cfg))
    _write_csv(out("grid.csv"),
               ("alpha", "s", "lambda", "dlambda_ds", "gap", "dim_used", "converged"),
               rows, cfg, complete=failure is None)
    if failure:
        raise GridPointError(f"(alpha, s)={failure[0]}", failure[1])


def _cmd_zoom(cfg, out):
    svals = np.linspace(-cfg.zoom_halfwidth, cfg.zoom_halfwidth, cfg.zoom_steps)
    points = [(nex, s) for nex in cfg.nex_list for s in svals]

    def point(pt):
        nex, s = pt
        res, slope = _spectral_row(_params(cfg, nex=nex), s, cfg.rel_tol)
        return [(nex, cfg.alpha, s, res.lambda_s, slope, res.gap)]

    rows, failure = _sweep(points, point, _thread_count(cfg))
    _write_csv(out("zoom.csv"),
               ("nex", "alpha", "s", "lambda", "dlambda_ds", "gap"),
               rows, cfg, complete=failure is None)
    if failure:
        raise GridPointError(f"(nex, s)={failure[0]}", failure[1])


def _cmd_spectrum(cfg, out):
    params = _params(cfg)
    s = cfg.s_value
    dim = cfg.spectrum_dim
    if dim <= 0:
        dim = spectral_bound(params, s, cfg.rel_tol).dim_used
    vals = full_spectrum(params, s, dim)
    rows = [(i, v) for i, v in enumerate(vals)]
    _write_csv(out("spectrum.csv"), ("index", "eigenvalue"), rows, cfg)


def _cmd_cumulants(cfg, out):
    alphas = np.linspace(cfg.alpha_min, cfg.alpha_max, cfg.alpha_steps)
    points = [(nex, a) for nex in cfg.nex_list for a in alphas]

    def point(pt):
        nex, a = pt
        params = _params(cfg, alpha=a, nex=nex)
        ss = stationary(params, cfg.tail_tol)
        est = cumulants(params, k_max=2)
        return [(nex, a, ss.mean, ss.variance, est.m, est.V)]

    rows, failure = _sweep(points, point, _thread_count(cfg))
    _write_csv(out("cumulants.csv"),
               ("nex", "alpha", "mean_photon", "var_photon", "mean_rate", "var_rate"),
               rows, cfg, complete=failure is None)
    if failure:
        raise GridPointError(f"(nex, alpha)={failure[0]}", failure[1])


def _cmd_ldp(cfg, out):
    params = _params(cfg)
    lo, hi = cfg.x_min, cfg.x_max
    if math.isnan(lo) or math.isnan(hi):
        slope_lo = lambda_derivative(params, -cfg.ldp_s_max, cfg.rel_tol)
        slope_hi = lambda_derivative(params, cfg.ldp_s_max, cfg.rel_tol)
        pad = 0.02 * (slope_hi - slope_lo)
        lo = slope_lo + pad if math.isnan(lo) else lo
        hi = slope_hi - pad if math.isnan(hi) else hi
    xs = np.linspace(lo, hi, cfg.x_steps)
    table = rate_function(params, xs, s_max=cfg.ldp_s_max, rel_tol=1e-12)
    rows = [(p.x, p.rate, p.s_star, p.attainable, table.m, table.V)
            for p in table.points]
    _write_csv(out("ldp.csv"), ("x", "rate", "s_star", "attainable", "m", "V"),
               rows, cfg)


def _cmd_validate(cfg, out):
    results = validation.run_all(verbose=True)
    rows = [(r.index, r.name, r.passed, r.detail) for r in results]
    ok = all(r.passed for r in results)
    _write_csv(out("validate.csv"), ("criterion", "name", "passed", "detail"),
               rows, cfg, complete=ok)
    if not ok:
        failed = ", ".join(str(r.index) for r in results if not r.passed)
        raise GridPointError(f"criteria [{failed}]", "oracle cross-check failed")


_HANDLERS = {
    "stationary": _cmd_stationary,
    "potential": _cmd_potential,
    "trajectory": _cmd_trajectory,
    "grid": _cmd_grid,
    "zoom": _cmd_zoom,
    "spectrum": _cmd_spectrum,
    "cumulants": _cmd_cumulants,
    "ldp": _cmd_ldp,
    "validate": _cmd_validate,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


def _build_parser():
    parser = _Parser(prog="maser-ldp",
                     description="Counting statistics of the atom maser")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="flat key=value config file")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config key (repeatable)")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--seed", type=int, help="base RNG seed")
    parser.add_argument("--threads", type=int, help="thread hint for grid sweeps")
    return parser


def build_config(args) -> RunConfig:
    values = {"command": args.command}
    if args.config:
        values.update(load_config_file(args.config))
    for item in args.set:
        if "=" not in item:
            raise CliError(f"--set expects KEY=VALUE, got {item!r}")
        key, _, text = item.partition("=")
        values[key.strip()] = _parse_value(key.strip(), text.strip())
    if args.seed is not None:
        values["seed"] = args.seed
    if args.threads is not None:
        values["threads"] = args.threads
    values.pop("command", None)
    return replace(RunConfig(command=args.command), **values).validate()


def run(cfg: RunConfig, out_dir: str = ".") -> int:
    """Execute one subcommand; returns the process exit code."""
    os.makedirs(out_dir, exist_ok=True)

    def out(name):
        return os.path.join(out_dir, name)

    try:
        _HANDLERS[cfg.command](cfg, out)
    except GridPointError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = build_config(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return run(cfg, args.out)


if __name__ == "__main__":
    sys.exit(main())
