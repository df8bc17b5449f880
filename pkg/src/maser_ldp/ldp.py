"""Large-deviation rate function of the detection count.

Convex conjugation of the spectral bound: for each target count rate x the
tilting field solving lambda'(s) = x is found by monotone bisection (the
slope is nondecreasing by convexity), giving I(x) = s*x - lambda(s).
"""

import math
from dataclasses import dataclass

from .model import MaserParams
from .spectral import cumulants, lambda_and_slope, spectral_bound

__all__ = [
    "RatePoint",
    "RateFunctionTable",
    "legendre_transform",
    "rate_function",
    "clt_params",
]


@dataclass(frozen=True)
class RatePoint:
    """One tabulated point: I(x) with its maximizing field s_star.

    attainable is False when x falls outside the slope range reachable
    within the configured field window; rate and s_star are then inf/nan.
    """

    x: float
    rate: float
    s_star: float
    attainable: bool = True


@dataclass(frozen=True)
class RateFunctionTable:
    points: tuple
    m: float
    V: float


def legendre_transform(cgf, x_grid, s_max: float = 2.0, s_tol: float = 1e-10):
    """Pointwise convex conjugate of a smooth convex function.

    cgf(s) must return (value, slope).  For each x the stationarity
    condition slope = x is solved by bisection on [-s_max, s_max] to
    within s_tol; evaluations are memoized across grid points.  Values
    within roundoff of zero are snapped to zero (the conjugate of a
    function vanishing at the origin is nonnegative).
    """
    memo = {}

    def ev(s):
        if s not in memo:
            memo[s] = cgf(s)
        return memo[s]

    _, slope_lo = ev(-s_max)
    _, slope_hi = ev(s_max)
    points = []
    for x in x_grid:
        x = float(x)
        if not slope_lo < x < slope_hi:
            points.append(RatePoint(x=x, rate=math.inf, s_star=math.nan,
                                    attainable=False))
            continue
        a, b = -s_max, s_max
        while b - a > s_tol:
            mid = 0.5 * (a + b)
            if ev(mid)[1] < x:
                a = mid
            else:
                b = mid
        s_star = 0.5 * (a + b)
        value = s_star * x - ev(s_star)[0]
        if -1e-9 < value < 0.0:
            value = 0.0
        points.append(RatePoint(x=x, rate=value, s_star=s_star))
    return tuple(points)


def _cgf_evaluator(params: MaserParams, rel_tol: float):
    """(lambda, lambda') with the numerical offset lambda(0) subtracted.

    Subtracting the computed lambda(0) (zero up to truncation leakage)
    restores conservation exactly, which keeps the conjugate nonnegative.
    """
    lam0 = spectral_bound(params, 0.0, rel_tol).lambda_s

    def cgf(s):
        lam, slope = lambda_and_slope(params, s, rel_tol)
        return lam - lam0, slope

    return cgf


def rate_function(params: MaserParams, x_grid, s_max: float = 2.0,
                  s_tol: float = 1e-10, rel_tol: float = 1e-12) -> RateFunctionTable:
    """Rate function table on `x_grid` with CLT parameters attached.

    Points outside the slope range attainable on [-s_max, s_max] are
    reported unattainable rather than failing the whole table.
    """
    points = legendre_transform(_cgf_evaluator(params, rel_tol), x_grid,
                                s_max=s_max, s_tol=s_tol)
    m, V = clt_params(params)
    return RateFunctionTable(points=points, m=m, V=V)


def clt_params(params: MaserParams):
    """Central-limit mean and variance rates (m, V) of the count."""
    est = cumulants(params, k_max=2)
    if est.V < 0:
        raise RuntimeError(f"estimated variance rate is negative: {est.V}")
    return est.m, est.V
