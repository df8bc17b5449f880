"""Finite truncations of the tilted dynamics generators.

Continuous time: the tridiagonal generator of the diagonal photon dynamics
with the counted jump term weighted by e^s, acting on probability column
vectors (predual convention: columns of the untilted matrix sum to zero up
to the truncation boundary).  The detection-and-excitation jump that leaves
the photon number unchanged commutes with the number basis, so it cancels
exactly against its loss term and never appears here.

Discrete time: the one-atom-per-kick transfer operator with the counted
(ground-state detection) branch weighted by e^s.

A diagonal similarity turns the continuous-time generator into a symmetric
tridiagonal with the same spectrum; eigenvectors of the original matrix are
recovered by scaling back.
"""

import math
from dataclasses import dataclass

import numpy as np

from .model import MaserParams, rates

__all__ = [
    "TiltedGenerator",
    "DiscreteTiltedTransfer",
    "build_tilted",
    "symmetrize",
    "build_discrete",
    "discrete_mgf",
]


@dataclass(frozen=True)
class TiltedGenerator:
    """Tridiagonal truncation of the tilted generator.

    sub[n]  = (M)_{n+1,n} = e^s*c_n + nu*(n+1)   upward flow, n = 0..dim-2
    sup[n]  = (M)_{n,n+1} = (nu+1)*(n+1)          downward flow
    diag[n] = (M)_{n,n}   = -(b_n + d_n)          untilted loss terms

    sym_off[n] = sqrt(sub[n]*sup[n]) is the off-diagonal of the symmetrized
    matrix S = G M G^{-1}; scale holds the similarity vector g (g_0 = 1,
    g_{n+1}/g_n = sqrt(sup_n/sub_n)) and log_scale its logarithm, which is
    the representation safe against overflow at large truncations.
    """

    s: float
    dim: int
    sub: np.ndarray
    sup: np.ndarray
    diag: np.ndarray
    sym_off: np.ndarray
    scale: np.ndarray
    log_scale: np.ndarray
    params: MaserParams

    def dense(self) -> np.ndarray:
        """The truncated generator as a dense matrix (tests, small dims)."""
        m = np.diag(self.diag)
        idx = np.arange(self.dim - 1)
        m[idx + 1, idx] = self.sub
        m[idx, idx + 1] = self.sup
        return m


def build_tilted(params: MaserParams, s: float, dim: int) -> TiltedGenerator:
    """Tilted generator truncated to `dim` levels (rows/columns >= dim dropped)."""
    if dim < 2:
        raise ValueError(f"dim must be >= 2, got {dim}")
    if not math.isfinite(s):
        raise ValueError(f"s must be finite, got {s!r}")
    rt = rates(params, dim)
    n = np.arange(dim - 1, dtype=float)
    sub = math.exp(s) * rt.counted[:-1] + params.nu * (n + 1.0)
    sup = (params.nu + 1.0) * (n + 1.0)
    diag = -(rt.birth + rt.death)
    sym_off = np.sqrt(sub * sup)
    with np.errstate(divide="ignore", over="ignore"):
        log_scale = np.concatenate([[0.0], 0.5 * np.cumsum(np.log(sup) - np.log(sub))])
        scale = np.exp(log_scale)
    for a in (sub, sup, diag, sym_off, scale, log_scale):
        a.flags.writeable = False
    return TiltedGenerator(
        s=s, dim=dim, sub=sub, sup=sup, diag=diag,
        sym_off=sym_off, scale=scale, log_scale=log_scale, params=params,
    )


def symmetrize(gen: TiltedGenerator):
    """Symmetric tridiagonal similar to the generator.

    Returns (sym_diag, sym_off, scale): S = G M G^{-1} has the same
    diagonal as M and off-diagonals sqrt(sub*sup).  A symmetric
    eigenvector v maps back to the right eigenvector G^{-1} v and the
    left eigenvector G v of M.
    """
    if np.any(gen.sub <= 0) or np.any(gen.sup <= 0):
        raise ValueError(
            "symmetrization undefined: generator has a non-positive off-diagonal "
            "(occurs only at nu = 0 with a vanishing coupling)"
        )
    return gen.diag, gen.sym_off, gen.scale


@dataclass(frozen=True)
class DiscreteTiltedTransfer:
    """One-kick transfer bands on levels 0..dim-1.

    up[n]   = e^s * sin^2(phi*sqrt(n+1))   counted detection, n -> n+1
    stay[n] = 1 - sin^2(phi*sqrt(n+1))     uncounted detection, n -> n

    At s = 0 the two branches sum to one exactly.
    """

    s: float
    dim: int
    up: np.ndarray
    stay: np.ndarray


def build_discrete(params: MaserParams, s: float, dim: int) -> DiscreteTiltedTransfer:
    """Tilted one-kick transfer truncated to `dim` levels."""
    if dim < 2:
        raise ValueError(f"dim must be >= 2, got {dim}")
    n = np.arange(dim, dtype=float)
    sin2 = np.sin(params.phi * np.sqrt(n + 1.0)) ** 2
    up = math.exp(s) * sin2
    stay = 1.0 - sin2
    up.flags.writeable = False
    stay.flags.writeable = False
    return DiscreteTiltedTransfer(s=s, dim=dim, up=up, stay=stay)


def discrete_mgf(transfer: DiscreteTiltedTransfer, n_steps: int, initial: int = 0) -> float:
    """n-step moment generating function E(e^{s*counts}) from level `initial`.

    Applies the tilted transfer n times to the indicator vector and sums;
    weight crossing the truncation boundary is dropped.
    """
    if not 0 <= initial < transfer.dim:
        raise ValueError("initial level outside truncation")
    if n_steps < 0:
        raise ValueError("n_steps must be >= 0")
    p = np.zeros(transfer.dim)
    p[initial] = 1.0
    for _ in range(n_steps):
        q = transfer.stay * p
        q[1:] += transfer.up[:-1] * p[:-1]
        p = q
    return float(p.sum())
