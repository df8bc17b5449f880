"""Photon-number model of the pumped lossy cavity.

Parameters, per-level jump rates of the diagonal birth-death dynamics,
the stationary photon distribution, the effective potential and its
infinite-pumping limit, and the semiclassical rate-intersection analysis.
"""

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "MaserParams",
    "RateTable",
    "StationaryDistribution",
    "EffectivePotential",
    "rates",
    "stationary",
    "mean_count_rate",
    "mean_count_rate_forms",
    "effective_potential",
    "limit_potential",
    "rate_intersections",
    "TruncationError",
]

# Hard cap multiplier for adaptive truncation: dim <= CAP_FACTOR * max(1, nex)
CAP_FACTOR = 100


class TruncationError(RuntimeError):
    """Adaptive truncation failed to meet the requested tail tolerance."""


@dataclass(frozen=True)
class MaserParams:
    """Physical parameters of the maser.

    nex : mean number of pumping atoms per unit cavity-decay time (>= 0)
    phi : accumulated Rabi angle in radians (>= 0)
    nu  : thermal occupation of the cavity bath (>= 0)

    The pumping parameter alpha = sqrt(nex)*phi is derived, never stored.
    """

    nex: float
    phi: float
    nu: float

    def __post_init__(self):
        for name in ("nex", "phi", "nu"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v!r}")
            if v < 0:
                raise ValueError(f"{name} must be >= 0, got {v!r}")

    @property
    def alpha(self) -> float:
        return math.sqrt(self.nex) * self.phi

    @classmethod
    def from_alpha(cls, nex, alpha, nu):
        """Build params from (nex, alpha, nu); requires nex > 0."""
        if nex <= 0:
            raise ValueError("from_alpha requires nex > 0")
        return cls(nex=float(nex), phi=float(alpha) / math.sqrt(nex), nu=float(nu))


@dataclass(frozen=True)
class RateTable:
    """Per-level rates of the diagonal dynamics on levels 0..dim-1.

    birth[n]   = counted[n] + nu*(n+1)   (total upward rate b_n)
    death[n]   = (nu+1)*n                (downward rate d_n, d_0 = 0)
    counted[n] = nex*sin^2(phi*sqrt(n+1)) (detector-counted upward rate c_n)
    """

    dim: int
    birth: np.ndarray
    death: np.ndarray
    counted: np.ndarray


def rates(params: MaserParams, dim: int) -> RateTable:
    """Rate table of the birth-death dynamics truncated to `dim` levels."""
    if dim < 2:
        raise ValueError(f"dim must be >= 2, got {dim}")
    n = np.arange(dim, dtype=float)
    counted = params.nex * np.sin(params.phi * np.sqrt(n + 1.0)) ** 2
    birth = counted + params.nu * (n + 1.0)
    death = (params.nu + 1.0) * n
    for a in (counted, birth, death):
        a.flags.writeable = False
    return RateTable(dim=dim, birth=birth, death=death, counted=counted)


@dataclass(frozen=True)
class StationaryDistribution:
    """Stationary photon-number law on levels 0..dim-1.

    log_weights are the unnormalised log weights (log_weights[0] = 0);
    probs is the normalised distribution; tail_mass is the probability
    carried by the last 5% of levels.
    """

    dim: int
    log_weights: np.ndarray
    probs: np.ndarray
    mean: float
    variance: float
    tail_mass: float
    params: MaserParams = field(repr=False, compare=False, default=None)


def _log_step_ratios(params: MaserParams, dim: int) -> np.ndarray:
    """log of the weight ratios rho(n)/rho(n-1) for n = 1..dim-1."""
    n = np.arange(1, dim, dtype=float)
    nu = params.nu
    term = nu / (nu + 1.0) + (params.nex / (nu + 1.0)) * np.sin(params.phi * np.sqrt(n)) ** 2 / n
    return np.log(term)


def stationary(params: MaserParams, tail_tol: float = 1e-10,
               cap: int = None) -> StationaryDistribution:
    """Stationary distribution with adaptive truncation.

    The truncation level grows geometrically until a rigorous geometric
    bound on the untruncated remainder falls below `tail_tol`.  Weights
    are carried in log space throughout; normalisation subtracts the max
    log weight before exponentiating.  `cap` bounds the truncation
    (default 100 * max(1, nex)); hitting it raises TruncationError.
    """
    if not params.nu > 0:
        raise ValueError("stationary requires nu > 0")
    if not (0 < tail_tol <= 1e-6):
        raise ValueError(f"tail_tol must lie in (0, 1e-6], got {tail_tol}")

    if cap is None:
        cap = int(CAP_FACTOR * max(1.0, params.nex))
    nu = params.nu
    dim = min(max(64, int(2 * params.nex) + 32), cap)
    while True:
        logw = np.concatenate([[0.0], np.cumsum(_log_step_ratios(params, dim))])
        w = np.exp(logw - logw.max())
        total = w.sum()
        # Beyond level dim-1 every step ratio is bounded by q (sin^2 <= 1 and
        # the 1/n factor is decreasing), so the remainder is geometric.
        q = nu / (nu + 1.0) + params.nex / ((nu + 1.0) * dim)
        if q < 1.0 and w[-1] * q / (1.0 - q) < tail_tol * total:
            break
        if dim >= cap:
            raise TruncationError(
                f"stationary truncation reached the hard cap {cap} without "
                f"meeting tail_tol={tail_tol}"
            )
        dim = min(int(dim * 1.5) + 1, cap)

    probs = w / total
    lv = np.arange(dim, dtype=float)
    mean = float(probs @ lv)
    var = float(probs @ (lv - mean) ** 2)
    tail = float(probs[int(math.ceil(0.95 * dim)):].sum())
    probs.flags.writeable = False
    logw.flags.writeable = False
    return StationaryDistribution(
        dim=dim, log_weights=logw, probs=probs, mean=mean,
        variance=var, tail_mass=tail, params=params,
    )


def mean_count_rate_forms(params: MaserParams, ss: StationaryDistribution):
    """The two expressions for the asymptotic detection rate.

    Returns (jump form, balance form): the stationary expectation of the
    counted jump rate, nex * sum_n pi_n sin^2(phi sqrt(n+1)), and the
    photon-balance form <n> - nu.  The two are equal by stationarity of
    the birth-death flux.
    """
    n = np.arange(ss.dim, dtype=float)
    jump_form = float(params.nex * (ss.probs @ np.sin(params.phi * np.sqrt(n + 1.0)) ** 2))
    balance_form = ss.mean - params.nu
    return jump_form, balance_form


def mean_count_rate(params: MaserParams, ss: StationaryDistribution, rtol: float = 1e-8) -> float:
    """Asymptotic rate of counted detections in the stationary state.

    Evaluates both equivalent forms and raises if they disagree beyond
    `rtol` relative (which would indicate a broken stationary law or a
    too-aggressive truncation).
    """
    if ss.params is not None and ss.params != params:
        raise ValueError("stationary distribution was computed for different parameters")
    jump_form, balance_form = mean_count_rate_forms(params, ss)
    scale = max(abs(jump_form), abs(balance_form), 1e-300)
    if abs(jump_form - balance_form) > rtol * scale and scale > 1e-14:
        raise RuntimeError(
            "count-rate identity violated: "
            f"{jump_form!r} (jump form) vs {balance_form!r} (balance form)"
        )
    return jump_form


@dataclass(frozen=True)
class EffectivePotential:
    """Effective potential U(n) = -log(rho(n)/rho(0)) and its pumping limit.

    limit_samples holds pairs (x, v(x)) of the rescaled potential that
    U(n x)/nex approaches as nex grows at fixed alpha.
    """

    values: np.ndarray
    limit_samples: np.ndarray  # shape (m, 2): columns x, v(x)


def _limit_integrand(y, alpha, nu):
    """-log of the rescaled weight ratio at x = y; smooth, with the y->0 limit alpha^2."""
    y = np.asarray(y, dtype=float)
    s = np.where(y > 0, np.sin(alpha * np.sqrt(np.abs(y))) ** 2 / np.where(y > 0, y, 1.0), alpha**2)
    return -np.log((nu + s) / (nu + 1.0))


def _adaptive_simpson(f, a, b, tol, max_depth=60):
    """Classic adaptive Simpson quadrature with absolute tolerance."""
    fa, fm, fb = f(a), f((a + b) / 2), f(b)
    whole = (b - a) / 6 * (fa + 4 * fm + fb)

    def recurse(a, b, fa, fm, fb, whole, tol, depth):
        m = (a + b) / 2
        lm, rm = (a + m) / 2, (m + b) / 2
        flm, frm = f(lm), f(rm)
        left = (m - a) / 6 * (fa + 4 * flm + fm)
        right = (b - m) / 6 * (fm + 4 * frm + fb)
        if depth <= 0:
            raise RuntimeError(f"quadrature failed to converge on [{a}, {b}]")
        if abs(left + right - whole) <= 15 * tol:
            return left + right + (left + right - whole) / 15
        return (recurse(a, m, fa, flm, fm, left, tol / 2, depth - 1)
                + recurse(m, b, fm, frm, fb, right, tol / 2, depth - 1))

    if a == b:
        return 0.0
    return recurse(a, b, fa, fm, fb, whole, tol, max_depth)


def limit_potential(alpha, nu, x_grid, tol: float = 1e-10) -> np.ndarray:
    """v(x) on the given grid: minus the integral of the log weight-ratio density.

    v(x) = -int_0^x log[(nu + sin^2(alpha sqrt(y))/y) / (nu+1)] dy, with
    the integrand continued to alpha^2 at y = 0.  Evaluated cumulatively
    segment by segment with adaptive Simpson quadrature.
    """
    x_grid = np.asarray(x_grid, dtype=float)
    if np.any(x_grid < 0):
        raise ValueError("x grid must be >= 0")
    order = np.argsort(x_grid)
    f = lambda y: float(_limit_integrand(y, alpha, nu))
    out = np.empty_like(x_grid)
    acc, prev = 0.0, 0.0
    for i in order:
        x = x_grid[i]
        try:
            acc += _adaptive_simpson(f, prev, x, tol)
        except RuntimeError as exc:
            raise RuntimeError(f"limit potential quadrature failed at x={x}: {exc}") from exc
        out[i] = acc
        prev = x
    return out


def effective_potential(params: MaserParams, ss: StationaryDistribution,
                        x_max: float = 1.2, n_samples: int = 121) -> EffectivePotential:
    """Effective potential of `ss` plus samples of the infinite-pumping limit v(x)."""
    values = -(ss.log_weights - ss.log_weights[0])
    xs = np.linspace(0.0, x_max, n_samples)
    vs = limit_potential(params.alpha, params.nu, xs)
    return EffectivePotential(values=values, limit_samples=np.column_stack([xs, vs]))


def rate_intersections(alpha, nu=None, theta_max=None, tol: float = 1e-12):
    """Intersections of the rescaled birth and death curves.

    Solves sin^2(theta) = (theta/alpha)^2, i.e. |sin theta| = theta/alpha,
    on (0, theta_max] by sign scanning plus bisection.  Each root is
    classified 'max' or 'min' of the stationary law from the sign change
    of sin^2(theta) - (theta/alpha)^2, or 'degenerate' for a tangential
    intersection (no sign change within 1e-9 of the root).

    The trivial root theta = 0 is excluded.  `nu` is accepted for
    interface symmetry; the intersection condition does not involve it.
    Returns a list of (theta, kind) with theta ascending.
    """
    if alpha <= 0:
        raise ValueError("alpha must be > 0")
    if theta_max is None:
        theta_max = 3.0 * math.pi * alpha
    # No solution beyond theta = alpha, where theta/alpha > 1 >= |sin|.
    upper = min(theta_max, alpha)

    def h(t):
        return math.sin(t) ** 2 - (t / alpha) ** 2

    roots = []
    n_scan = max(2000, int(upper * 400))
    ts = np.linspace(0.0, upper, n_scan + 1)
    hs = np.sin(ts) ** 2 - (ts / alpha) ** 2
    # Start past the trivial double root at 0; its width is O(alpha-1)
    # only near alpha = 1, where the scan resolution still separates it.
    lo_floor = min(1e-6, upper / n_scan / 8)
    for i in range(n_scan):
        a, b = ts[i], ts[i + 1]
        ha, hb = hs[i], hs[i + 1]
        if a < lo_floor:
            a, ha = lo_floor, h(lo_floor)
            if b <= a:
                continue
        if ha == 0.0 and a > lo_floor:
            roots.append(a)
            continue
        if ha * hb < 0:
            while b - a > tol:
                m = 0.5 * (a + b)
                hm = h(m)
                if ha * hm <= 0:
                    b, hb = m, hm
                else:
                    a, ha = m, hm
            roots.append(0.5 * (a + b))
    # Tangential roots produce no sign change; detect near-touch minima of |h|.
    out = []
    for r in roots:
        eps = 1e-9
        before, after = h(max(r - eps, lo_floor)), h(r + eps)
        if before > 0 and after < 0:
            kind = "max"
        elif before < 0 and after > 0:
            kind = "min"
        else:
            kind = "degenerate"
        out.append((r, kind))
    out.extend(_tangential_roots(alpha, upper, hs, ts, roots))
    out.sort(key=lambda rk: rk[0])
    return out


def _tangential_roots(alpha, upper, hs, ts, found, touch_tol=1e-9):
    """Local maxima of h that touch zero without crossing (double roots)."""
    out = []
    interior = (hs[1:-1] > hs[:-2]) & (hs[1:-1] >= hs[2:]) & (hs[1:-1] < 0)
    for i in np.nonzero(interior)[0] + 1:
        a, b = ts[i - 1], ts[i + 1]
        h = lambda t: math.sin(t) ** 2 - (t / alpha) ** 2
        # Golden-section maximisation of h on [a, b].
        inv = (math.sqrt(5) - 1) / 2
        x1 = b - inv * (b - a)
        x2 = a + inv * (b - a)
        f1, f2 = h(x1), h(x2)
        while b - a > 1e-13:
            if f1 < f2:
                a, x1, f1 = x1, x2, f2
                x2 = a + inv * (b - a)
                f2 = h(x2)
            else:
                b, x2, f2 = x2, x1, f1
                x1 = b - inv * (b - a)
                f1 = h(x1)
        t_star, h_star = 0.5 * (a + b), h(0.5 * (a + b))
        if abs(h_star) <= touch_tol and all(abs(t_star - r) > 1e-6 for r in found):
            out.append((t_star, "degenerate"))
    return out
