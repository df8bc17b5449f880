"""Counting statistics of ground-state atom detections in the atom maser.

Stationary photon-number laws, tilted-generator spectra and gaps, limiting
cumulants, large-deviation rate functions, and quantum-jump Monte Carlo
trajectories cross-validated against exact finite-time moment generating
functions.
"""

__version__ = "0.1.0"

from .model import (MaserParams, RateTable, StationaryDistribution,
                    EffectivePotential, rates, stationary, mean_count_rate,
                    mean_count_rate_forms, effective_potential, limit_potential,
                    rate_intersections, TruncationError)
from .generator import (TiltedGenerator, DiscreteTiltedTransfer, build_tilted,
                        symmetrize, build_discrete, discrete_mgf)
from .spectral import (SpectralResult, CumulantEstimates, spectral_bound,
                       spectral_gap, lambda_derivative, lambda_and_slope,
                       slope_from_result, cumulants, full_spectrum,
                       mgf_exact, crossover_sharpness)
from .ldp import (RatePoint, RateFunctionTable, legendre_transform,
                  rate_function, clt_params)
from .trajectories import (Trajectory, EnsembleStats, TrajectoryCapError,
                           simulate, ensemble, dwell_times)

__all__ = [
    "MaserParams", "RateTable", "StationaryDistribution", "EffectivePotential",
    "rates", "stationary", "mean_count_rate", "mean_count_rate_forms",
    "effective_potential", "limit_potential", "rate_intersections",
    "TruncationError",
    "TiltedGenerator", "DiscreteTiltedTransfer", "build_tilted", "symmetrize",
    "build_discrete", "discrete_mgf",
    "SpectralResult", "CumulantEstimates", "spectral_bound", "spectral_gap",
    "lambda_derivative", "lambda_and_slope", "slope_from_result", "cumulants",
    "full_spectrum", "mgf_exact", "crossover_sharpness",
    "RatePoint", "RateFunctionTable", "legendre_transform", "rate_function",
    "clt_params",
    "Trajectory", "EnsembleStats", "TrajectoryCapError", "simulate", "ensemble",
    "dwell_times",
    "__version__",
]
