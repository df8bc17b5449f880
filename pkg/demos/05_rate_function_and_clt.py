"""Large deviations of the detection count and the central limit regime.

Computes the scaled cumulant generating function lambda(s), conjugates it
into the rate function I(x), and checks the Gaussian center against a
Monte Carlo ensemble: standardized counts at long times collapse onto the
normal law with the spectral mean and variance.
"""

import math
import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from maser_ldp import (MaserParams, clt_params, ensemble, lambda_derivative,
                       rate_function, spectral_bound)

PARAMS = MaserParams.from_alpha(10.0, 2.0, 0.15)
OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

m, v = clt_params(PARAMS)
print(f"mean rate m = {m:.6f}, variance rate V = {v:.6f}")

svals = np.linspace(-1.5, 1.5, 61)
lam = np.array([spectral_bound(PARAMS, float(s)).lambda_s for s in svals])

lo = lambda_derivative(PARAMS, -2.0)
hi = lambda_derivative(PARAMS, 2.0)
xs = np.linspace(lo * 1.05, hi * 0.97, 61)
table = rate_function(PARAMS, xs, s_max=2.0)
rates_i = np.array([p.rate for p in table.points])

stats = ensemble(PARAMS, 0, 200.0, 4000, seed_base=42)
z = (stats.counts - m * 200.0) / math.sqrt(v * 200.0)
print(f"ensemble: mean rate {stats.mean_rate:.4f}, variance rate "
      f"{stats.var_rate:.4f}; standardized variance {z.var(ddof=1):.4f}")

fig, axes = plt.subplots(1, 3, figsize=(13, 4))
axes[0].plot(svals, lam)
axes[0].set_xlabel("$s$")
axes[0].set_title(r"scaled CGF $\lambda(s)$")
axes[1].plot(xs, rates_i)
axes[1].axvline(m, color="gray", ls=":", label="mean rate $m$")
axes[1].set_xlabel("count rate $x$")
axes[1].set_title("rate function $I(x)$")
axes[1].legend()
grid = np.linspace(-4, 4, 200)
axes[2].hist(z, bins=40, density=True, alpha=0.6, label="MC, $t=200$")
axes[2].plot(grid, np.exp(-grid**2 / 2) / math.sqrt(2 * math.pi), "k-",
             label="standard normal")
axes[2].set_xlabel(r"$(\Lambda_t - mt)/\sqrt{Vt}$")
axes[2].set_title("central limit check")
axes[2].legend()
fig.tight_layout()
fig.savefig(os.path.join(OUT, "rate_function_clt.png"), dpi=150)
print("wrote", os.path.join(OUT, "rate_function_clt.png"))
