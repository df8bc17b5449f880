"""Stochastic jump trajectories of the diagonal cavity dynamics.

Classical jump process on the photon number: counted upward jumps at the
detection rate, thermal upward jumps, downward decay jumps.  Detections
that leave the level unchanged are excluded; they are invisible both to
the level path and to the recorded count.  Waiting times are exponential
in the total exit rate; per-trajectory randomness comes from independent
counter-based streams keyed by explicit 64-bit seeds.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .model import MaserParams, rates

__all__ = [
    "Trajectory",
    "EnsembleStats",
    "TrajectoryCapError",
    "simulate",
    "ensemble",
    "dwell_times",
]

# Jump type tags follow the generator ordering: 1 counted absorption (up),
# 3 bath decay (down), 4 bath absorption (up).
JUMP_COUNTED, JUMP_DECAY, JUMP_THERMAL = 1, 3, 4

_CAP_MULTIPLIER = 200
_BLOCK = 512


class TrajectoryCapError(RuntimeError):
    """Level path reached the safety cap; truncation assumptions are off."""


@dataclass(frozen=True)
class Trajectory:
    """One sampled jump path.

    events holds (time, jump_type, resulting_level) in time order;
    count_1 is the number of counted detections up to t_final.
    """

    initial: int
    events: tuple
    t_final: float
    count_1: int
    seed: int


@dataclass(frozen=True)
class EnsembleStats:
    """Aggregates over independent trajectories.

    mean_rate and var_rate estimate the limiting mean and variance per
    unit time of the count (the sample variance of count/t is scaled back
    by t).  mgf_estimates holds (s, estimate, standard_error) triples;
    counts keeps the raw per-trajectory totals.  aborted lists seeds whose
    paths hit the level cap (excluded from the statistics).
    """

    n_traj: int
    t_final: float
    mean_rate: float
    var_rate: float
    mgf_estimates: tuple
    seed_base: int
    counts: np.ndarray
    aborted: tuple = ()


def _stream(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=np.uint64(seed)))


def _rate_thresholds(params: MaserParams, cap: int):
    rt = rates(params, cap)
    lvl = np.arange(cap, dtype=float)
    th1 = rt.counted
    th2 = rt.counted + params.nu * (lvl + 1.0)
    total = th2 + (params.nu + 1.0) * lvl
    return th1.tolist(), th2.tolist(), total.tolist()


def _run(th1, th2, total, initial, t_max, rng, cap, record):
    """Core jump loop; consumes exactly two uniforms per event."""
    events = [] if record else None
    n = initial
    t = 0.0
    count = 0
    u = rng.random(_BLOCK)
    ui = 0
    while True:
        r = total[n]
        if r <= 0.0:
            break  # absorbing level (no atoms, zero-temperature vacuum)
        if ui >= _BLOCK:
            u = rng.random(_BLOCK)
            ui = 0
        t += -math.log1p(-u[ui]) / r
        ui += 1
        if t > t_max:
            break
        if ui >= _BLOCK:
            u = rng.random(_BLOCK)
            ui = 0
        x = u[ui] * r
        ui += 1
        if x < th1[n]:
            jump = JUMP_COUNTED
            n += 1
            count += 1
        elif x < th2[n]:
            jump = JUMP_THERMAL
            n += 1
        else:
            jump = JUMP_DECAY
            n -= 1
        if n >= cap:
            raise TrajectoryCapError(
                f"level reached the safety cap {cap} before t={t_max}"
            )
        if record:
            events.append((t, jump, n))
    return events, count


def simulate(params: MaserParams, initial: int, t_max: float, seed: int,
             cap: int = None) -> Trajectory:
    """Sample one jump path up to t_max with the stream keyed by `seed`.

    `cap` is the level safety bound (default 200 * max(1, nex)); reaching
    it aborts with TrajectoryCapError.
    """
    if not (math.isfinite(t_max) and t_max > 0):
        raise ValueError(f"t_max must be finite and > 0, got {t_max!r}")
    if initial < 0:
        raise ValueError("initial level must be >= 0")
    if cap is None:
        cap = _CAP_MULTIPLIER * int(max(1.0, params.nex))
    th1, th2, total = _rate_thresholds(params, cap)
    events, count = _run(th1, th2, total, initial, t_max, _stream(seed), cap, True)
    return Trajectory(initial=initial, events=tuple(events), t_final=t_max,
                      count_1=count, seed=seed)


def ensemble(params: MaserParams, initial: int, t_max: float, n_traj: int,
             s_list=(), seed_base: int = 0, cap: int = None) -> EnsembleStats:
    """Statistics over n_traj independent paths seeded seed_base..seed_base+n-1.

    Trajectories that hit the level cap are reported and excluded; the run
    fails outright if they exceed 0.1% of the ensemble.
    """
    if n_traj < 2:
        raise ValueError("n_traj must be >= 2")
    if not (math.isfinite(t_max) and t_max > 0):
        raise ValueError(f"t_max must be finite and > 0, got {t_max!r}")
    if cap is None:
        cap = _CAP_MULTIPLIER * int(max(1.0, params.nex))
    th1, th2, total = _rate_thresholds(params, cap)
    counts = np.empty(n_traj)
    aborted = []
    for i in range(n_traj):
        seed = seed_base + i
        try:
            _, c = _run(th1, th2, total, initial, t_max, _stream(seed), cap, False)
            counts[i] = c
        except TrajectoryCapError:
            aborted.append(seed)
            counts[i] = np.nan
    if len(aborted) >= 1e-3 * n_traj:
        raise TrajectoryCapError(
            f"{len(aborted)} of {n_traj} trajectories hit the level cap"
        )
    ok = counts[~np.isnan(counts)]
    rates_ok = ok / t_max
    mean_rate = float(rates_ok.mean())
    var_rate = float(rates_ok.var(ddof=1) * t_max)
    mgf = []
    for s in s_list:
        vals = np.exp(float(s) * ok)
        est = float(vals.mean())
        se = float(vals.std(ddof=1) / math.sqrt(ok.size))
        if est > 0 and se > 0.1 * est:
            # exponential estimators are variance-exploding at large s*count
            warnings.warn(
                f"MGF estimate at s={s} has relative standard error "
                f"{se / est:.0%}; increase the ensemble or reduce |s|",
                RuntimeWarning, stacklevel=2,
            )
        mgf.append((float(s), est, se))
    counts.flags.writeable = False
    return EnsembleStats(
        n_traj=n_traj, t_final=t_max, mean_rate=mean_rate, var_rate=var_rate,
        mgf_estimates=tuple(mgf), seed_base=seed_base, counts=counts,
        aborted=tuple(aborted),
    )


def dwell_times(traj: Trajectory, threshold: int, min_dwell: float = 1.0):
    """Alternating (phase, duration) segments of the level path.

    The path is split at crossings of `threshold` (level >= threshold is
    'high'); excursions shorter than `min_dwell` are absorbed into the
    surrounding phase, so confirmed segments alternate.
    """
    # Raw constant-phase segments of the piecewise-constant level path.
    raw = []
    t_prev = 0.0
    phase = "high" if traj.initial >= threshold else "low"
    for t, _, lvl in traj.events:
        ph = "high" if lvl >= threshold else "low"
        if ph != phase:
            raw.append((phase, t - t_prev))
            phase, t_prev = ph, t
    raw.append((phase, traj.t_final - t_prev))

    merged = []
    for ph, dur in raw:
        if merged and (ph == merged[-1][0] or dur < min_dwell):
            merged[-1][1] += dur
        else:
            merged.append([ph, dur])
    return [(ph, dur) for ph, dur in merged]
