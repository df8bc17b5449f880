import math

import numpy as np
import pytest

from maser_ldp.model import MaserParams, rate_intersections, stationary
from maser_ldp.spectral import spectral_bound, spectral_gap
from maser_ldp.trajectories import (Trajectory, TrajectoryCapError, dwell_times,
                                    ensemble, simulate)

NU = 0.15


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_reproducible_bit_for_bit():
    p = MaserParams.from_alpha(10.0, 2.0, NU)
    a = simulate(p, 0, 20.0, 42)
    b = simulate(p, 0, 20.0, 42)
    assert a.events == b.events
    assert a.count_1 == b.count_1
    assert simulate(p, 0, 20.0, 43).events != a.events

    ea = ensemble(p, 0, 5.0, 200, s_list=(0.2,), seed_base=7)
    eb = ensemble(p, 0, 5.0, 200, s_list=(0.2,), seed_base=7)
    assert np.array_equal(ea.counts, eb.counts)
    assert ea.mgf_estimates == eb.mgf_estimates


def test_ensemble_counts_match_individual_runs():
    p = MaserParams.from_alpha(10.0, 2.0, NU)
    stats = ensemble(p, 0, 3.0, 5, seed_base=100)
    for i in range(5):
        assert stats.counts[i] == simulate(p, 0, 3.0, 100 + i).count_1


def test_absorbing_vacuum_has_no_events():
    p = MaserParams(nex=0.0, phi=0.0, nu=0.0)
    traj = simulate(p, 0, 50.0, 1)
    assert traj.events == ()
    assert traj.count_1 == 0


def test_zero_coupling_counts_nothing():
    p = MaserParams(nex=150.0, phi=0.0, nu=NU)
    traj = simulate(p, 0, 50.0, 3)
    assert traj.count_1 == 0
    assert all(jump in (3, 4) for _, jump, _ in traj.events)


def test_event_structure_invariants():
    p = MaserParams.from_alpha(10.0, 2.0, NU)
    for seed in range(5):
        traj = simulate(p, 0, 30.0, seed)
        times = [t for t, _, _ in traj.events]
        assert all(b > a for a, b in zip(times, times[1:]))
        assert all(t <= traj.t_final for t in times)
        level, counted = traj.initial, 0
        for _, jump, lvl in traj.events:
            level += 1 if jump in (1, 4) else -1
            counted += jump == 1
            assert lvl == level
            assert level >= 0
        assert traj.count_1 == counted


def test_validation_and_cap():
    p = MaserParams.from_alpha(10.0, 2.0, NU)
    with pytest.raises(ValueError):
        simulate(p, 0, math.inf, 0)
    with pytest.raises(ValueError):
        simulate(p, 0, -1.0, 0)
    with pytest.raises(ValueError):
        ensemble(p, 0, 1.0, 1)
    # mean thermal occupation far above the safety cap aborts
    hot = MaserParams(nex=0.0, phi=0.0, nu=500.0)
    with pytest.raises(TrajectoryCapError):
        simulate(hot, 0, 50.0, 0)
    with pytest.raises(TrajectoryCapError):
        ensemble(hot, 0, 50.0, 4, seed_base=0)
    # explicit cap override
    with pytest.raises(TrajectoryCapError):
        simulate(p, 0, 30.0, 0, cap=3)


def test_occupation_law_matches_stationary():
    p = MaserParams.from_alpha(10.0, 2.0, NU)
    ss = stationary(p, 1e-10)
    traj = simulate(p, 0, 1e4, 2024)
    occupation = np.zeros(ss.dim)
    t_prev, level = 0.0, traj.initial
    for t, _, lvl in traj.events:
        occupation[level] += t - t_prev
        t_prev, level = t, lvl
    occupation[level] += traj.t_final - t_prev
    occupation /= occupation.sum()
    tv = 0.5 * np.abs(occupation - ss.probs).sum()
    assert tv < 0.02


def test_empirical_mgf_growth_tracks_bound():
    # (1/t) log E(e^{s Lambda_t}) approaches lambda(s) within the combined
    # statistical and finite-time tolerance.
    p = MaserParams.from_alpha(10.0, 2.0, NU)
    s, t = 0.1, 50.0
    stats = ensemble(p, 0, t, 2000, s_list=(s,), seed_base=77)
    _, est, se = stats.mgf_estimates[0]
    lam = spectral_bound(p, s, 1e-12).lambda_s
    tolerance = 3.0 * se / (est * t) + 0.2 / t
    assert abs(math.log(est) / t - lam) < tolerance


def test_dwell_times_trivial_paths():
    flat = Trajectory(initial=0, events=(), t_final=10.0, count_1=0, seed=0)
    assert dwell_times(flat, 5) == [("low", 10.0)]

    crossing = Trajectory(initial=0, events=((5.0, 4, 7),), t_final=10.0,
                          count_1=0, seed=0)
    assert dwell_times(crossing, 5) == [("low", 5.0), ("high", 5.0)]

    # a short excursion is absorbed into the surrounding phase
    chatter = Trajectory(initial=0,
                         events=((4.0, 4, 7), (4.3, 3, 2), (8.0, 4, 9)),
                         t_final=10.0, count_1=0, seed=0)
    merged = dwell_times(chatter, 5)
    assert merged == [("low", 8.0), ("high", 2.0)]


def test_bistable_dwell_times_exceed_mixing_time():
    p = MaserParams.from_alpha(50.0, 6.6, NU)
    barrier_theta = [t for t, k in rate_intersections(6.6) if k == "min"][0]
    threshold = int(round(50.0 * (barrier_theta / 6.6) ** 2))
    traj = simulate(p, 0, 2000.0, 11)
    segments = dwell_times(traj, threshold)
    high = [d for ph, d in segments if ph == "high"]
    low = [d for ph, d in segments if ph == "low"]
    assert high and low
    mixing_time = 1.0 / spectral_gap(MaserParams.from_alpha(50.0, 3.0, NU), 0.0)
    assert np.mean(high) > 10 * mixing_time
    assert np.mean(low) > 10 * mixing_time


def test_ensemble_standard_errors():
    import warnings

    p = MaserParams.from_alpha(10.0, 2.0, NU)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        stats = ensemble(p, 0, 2.0, 50, s_list=(-0.3, 0.3), seed_base=5)
    for _, est, se in stats.mgf_estimates:
        assert est > 0 and se > 0
    assert stats.var_rate > 0
    assert stats.aborted == ()


def test_ensemble_warns_on_noisy_mgf_estimate():
    p = MaserParams.from_alpha(10.0, 2.0, NU)
    with pytest.warns(RuntimeWarning, match="relative standard error"):
        ensemble(p, 0, 5.0, 20, s_list=(1.5,), seed_base=0)
