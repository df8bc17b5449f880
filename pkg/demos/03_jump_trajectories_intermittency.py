"""Jump trajectories: steady counting vs intermittent phases.

Simulates the cavity level path and the detection counter for a unimodal
pumping (steady slope) and for the bistable point alpha = 6.66, where the
counter alternates between long active and passive stretches as the
cavity dwells in one well or the other.
"""

import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from maser_ldp import (MaserParams, dwell_times, rate_intersections, simulate,
                       spectral_gap)

NEX, NU = 50.0, 0.15
T = 400.0
OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)


def step_path(traj):
    times = [0.0]
    levels = [traj.initial]
    counts = [0]
    c = 0
    for t, jump, lvl in traj.events:
        times.append(t)
        levels.append(lvl)
        c += jump == 1
        counts.append(c)
    times.append(traj.t_final)
    levels.append(levels[-1])
    counts.append(counts[-1])
    return np.array(times), np.array(levels), np.array(counts)


fig, axes = plt.subplots(2, 2, figsize=(11, 6), sharex="col")
for col, alpha in enumerate((3.0, 6.66)):
    traj = simulate(MaserParams.from_alpha(NEX, alpha, NU), 0, T, seed=11)
    times, levels, counts = step_path(traj)
    axes[0, col].step(times, levels, where="post", lw=0.7)
    axes[0, col].set_title(rf"$\alpha = {alpha}$")
    axes[0, col].set_ylabel("cavity level")
    axes[1, col].step(times, counts, where="post", color="tab:red")
    axes[1, col].set_ylabel(r"detections $\Lambda_t$")
    axes[1, col].set_xlabel("time")
    print(f"alpha={alpha}: {len(traj.events)} events, {traj.count_1} detections")

fig.tight_layout()
fig.savefig(os.path.join(OUT, "trajectories.png"), dpi=150)
print("wrote", os.path.join(OUT, "trajectories.png"))

# Dwell-time statistics at the bistable point vs the unimodal mixing time
barrier = [t for t, k in rate_intersections(6.66) if k == "min"][0]
threshold = int(round(NEX * (barrier / 6.66) ** 2))
long_traj = simulate(MaserParams.from_alpha(NEX, 6.66, NU), 0, 5000.0, seed=4)
segments = dwell_times(long_traj, threshold)
high = [d for ph, d in segments if ph == "high"]
low = [d for ph, d in segments if ph == "low"]
mixing = 1.0 / spectral_gap(MaserParams.from_alpha(NEX, 3.0, NU), 0.0)
print(f"threshold level {threshold}; {len(segments)} phases over t=5000")
print(f"mean dwell: high {np.mean(high):.0f}, low {np.mean(low):.0f} "
      f"(unimodal mixing time {mixing:.2f})")
