"""Generator spectra and the scaling of gap and variance with pumping.

The full (real) spectrum of the symmetrized generator shows the gap
closing at the transition points as the pumping rate grows, much faster
at the bistable point alpha = 6.66 than at the threshold alpha = 1; the
count-variance rate blows up accordingly.
"""

import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from maser_ldp import (MaserParams, cumulants, full_spectrum, spectral_bound,
                       spectral_gap, stationary)

NU = 0.15
OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

fig, axes = plt.subplots(1, 3, figsize=(13, 4.2))

# Low end of the spectrum across alpha at fixed pumping
nex = 150.0
alphas = np.linspace(0.5, 8.0, 61)
for alpha in alphas:
    params = MaserParams.from_alpha(nex, alpha, NU)
    dim = spectral_bound(params, 0.0).dim_used
    vals = full_spectrum(params, 0.0, dim)[:12]
    axes[0].plot([alpha] * vals.size, vals, "k.", ms=2)
axes[0].set_ylim(-8, 0.3)
axes[0].set_xlabel(r"$\alpha$")
axes[0].set_title(f"top of the spectrum, $N = {nex:.0f}$")

# Gap scaling with pumping at the two transitions
nex_list = np.array([25.0, 50.0, 75.0, 100.0, 125.0, 150.0])
for alpha, marker in ((1.0, "o"), (6.66, "s")):
    gaps = [spectral_gap(MaserParams.from_alpha(n, alpha, NU), 0.0)
            for n in nex_list]
    axes[1].semilogy(nex_list, gaps, marker + "-", label=rf"$\alpha={alpha}$")
    print(f"alpha={alpha}: gaps", ", ".join(f"{g:.2e}" for g in gaps))
axes[1].set_xlabel("pumping rate $N$")
axes[1].set_title("spectral gap $g(0)$")
axes[1].legend()

# Photon-number and count variances across alpha for several pumping rates
alphas = np.linspace(0.5, 8.0, 40)
for n in (50.0, 100.0, 150.0):
    var_photon = [stationary(MaserParams.from_alpha(n, a, NU), 1e-10).variance / n
                  for a in alphas]
    axes[2].plot(alphas, var_photon, label=f"$N = {n:.0f}$")
axes[2].set_xlabel(r"$\alpha$")
axes[2].set_title("photon variance / $N$")
axes[2].legend()

fig.tight_layout()
fig.savefig(os.path.join(OUT, "spectrum_scaling.png"), dpi=150)
print("wrote", os.path.join(OUT, "spectrum_scaling.png"))

est = cumulants(MaserParams.from_alpha(50.0, 6.6, NU), 2)
print(f"count cumulant rates at N=50, alpha=6.6: m = {est.m:.3f}, V = {est.V:.3f}")
