"""Effective potential of the photon number and its pumping limit.

The stationary law defines a potential U(n) = -log(p_n/p_0).  Rescaled as
U(n)/nex against x = n/nex it collapses, as the pumping rate grows, onto
a limit curve v(x) whose wells are the maser's phases: at alpha = 6.66
the two wells are equally deep and the system is bistable.
"""

import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from maser_ldp import MaserParams, effective_potential, limit_potential, stationary

NU = 0.15
ALPHA = 6.66
OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

xs = np.linspace(0.0, 1.0, 201)
v = limit_potential(ALPHA, NU, xs)

fig, ax = plt.subplots(figsize=(7.5, 5))
for nex, style in ((50.0, ":"), (100.0, "--"), (200.0, "-.")):
    params = MaserParams.from_alpha(nex, ALPHA, NU)
    ss = stationary(params, 1e-12)
    pot = effective_potential(params, ss)
    n = np.arange(ss.dim)
    keep = n <= nex
    ax.plot(n[keep] / nex, pot.values[keep] / nex, style,
            label=f"$U(n)/N$ at $N = {nex:.0f}$")
    sup = np.max(np.abs(np.interp(xs * nex, n, pot.values) / nex - v))
    print(f"nex={nex:6.0f}: sup |U/nex - v| on [0,1] = {sup:.4f}")
ax.plot(xs, v, "k-", lw=2, label="limit $v(x)$")
ax.set_xlabel(r"rescaled photon number $x = n/N$")
ax.set_ylabel("rescaled potential")
ax.set_title(rf"double well at $\alpha = {ALPHA}$")
ax.legend()
fig.tight_layout()
fig.savefig(os.path.join(OUT, "effective_potential.png"), dpi=150)
print("wrote", os.path.join(OUT, "effective_potential.png"))

# Well depths at the semiclassical minima
from maser_ldp import rate_intersections

wells = [(t / ALPHA) ** 2 for t, k in rate_intersections(ALPHA) if k == "max"]
depths = limit_potential(ALPHA, NU, wells)
print(f"well positions x = {wells[0]:.4f}, {wells[1]:.4f}; "
      f"depths v = {depths[0]:.6f}, {depths[1]:.6f} (equal near alpha = 6.66)")
