import math

import numpy as np
import pytest
from scipy.linalg import eigh_tridiagonal, solve_banded

from maser_ldp.model import MaserParams, rates, stationary
from maser_ldp.generator import (build_discrete, build_tilted, discrete_mgf,
                                 symmetrize)

NU = 0.15


def test_rejects_bad_dim_and_s():
    p = MaserParams.from_alpha(10.0, 2.0, NU)
    with pytest.raises(ValueError):
        build_tilted(p, 0.0, 1)
    with pytest.raises(ValueError):
        build_tilted(p, math.inf, 8)
    with pytest.raises(ValueError):
        build_discrete(p, 0.0, 1)


def test_untilted_generator_conserves_probability():
    gen = build_tilted(MaserParams.from_alpha(150.0, 6.6, NU), 0.0, 60)
    col_sums = gen.dense().T @ np.ones(60)
    assert np.max(np.abs(col_sums[:-1])) < 1e-12
    assert col_sums[-1] == pytest.approx(-gen.params.nex * math.sin(
        gen.params.phi * math.sqrt(60.0)) ** 2 - NU * 60.0, rel=1e-12)


def test_no_pumping_means_no_tilt_dependence():
    p = MaserParams(nex=0.0, phi=0.9, nu=NU)
    g0 = build_tilted(p, 0.0, 30)
    g1 = build_tilted(p, 0.7, 30)
    assert np.array_equal(g0.sub, NU * np.arange(1.0, 30.0))
    assert np.array_equal(g0.sub, g1.sub)
    assert np.array_equal(g0.diag, g1.diag)


def test_tilted_bands_match_direct_formulas():
    p = MaserParams.from_alpha(150.0, 6.6, NU)
    s = 0.1
    gen = build_tilted(p, s, 40)
    for n in range(39):
        c = 150.0 * math.sin(p.phi * math.sqrt(n + 1)) ** 2
        assert gen.sub[n] == pytest.approx(math.exp(s) * c + NU * (n + 1), rel=1e-14)
        assert gen.sup[n] == pytest.approx((NU + 1) * (n + 1), rel=1e-15)
        b = c + NU * (n + 1)
        d = (NU + 1) * n
        assert gen.diag[n] == pytest.approx(-(b + d), rel=1e-14)
    assert np.allclose(gen.sym_off**2, gen.sub * gen.sup, rtol=5e-16)


def test_symmetrize_scale_is_detailed_balance_at_s0():
    p = MaserParams.from_alpha(50.0, 3.0, NU)
    ss = stationary(p, 1e-10)
    gen = build_tilted(p, 0.0, ss.dim)
    _, _, scale = symmetrize(gen)
    g2pi = scale**2 * ss.probs
    rel = np.abs(g2pi / g2pi[0] - 1.0)
    assert rel.max() < 1e-8


def test_symmetrize_requires_positive_offdiagonals():
    gen = build_tilted(MaserParams(nex=5.0, phi=0.0, nu=0.0), 0.0, 6)
    with pytest.raises(ValueError):
        symmetrize(gen)


def test_two_by_two_closed_form_eigenvalues():
    p = MaserParams.from_alpha(10.0, 2.0, NU)
    gen = build_tilted(p, 0.4, 2)
    m = gen.dense()
    tr, det = m[0, 0] + m[1, 1], m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    disc = math.sqrt(tr**2 - 4 * det)
    expected = sorted([(tr - disc) / 2, (tr + disc) / 2])
    got = np.sort(eigh_tridiagonal(gen.diag, gen.sym_off, eigvals_only=True))
    assert got == pytest.approx(expected, rel=1e-12)


def test_similarity_preserves_characteristic_polynomial_dim4():
    import sympy

    gen = build_tilted(MaserParams.from_alpha(10.0, 2.0, NU), 0.25, 4)
    x = sympy.Symbol("x")
    m_sym = sympy.Matrix(4, 4, lambda i, j: sympy.Float(gen.dense()[i, j], 30))
    s_dense = np.diag(gen.diag) + np.diag(gen.sym_off, 1) + np.diag(gen.sym_off, -1)
    s_sym = sympy.Matrix(4, 4, lambda i, j: sympy.Float(s_dense[i, j], 30))
    cm = sympy.Poly(m_sym.charpoly(x).as_expr(), x).all_coeffs()
    cs = sympy.Poly(s_sym.charpoly(x).as_expr(), x).all_coeffs()
    for a, b in zip(cm, cs):
        scale = max(1.0, abs(float(a)))
        assert abs(float(a) - float(b)) / scale < 1e-10


def test_top_eigenvalue_matches_power_iteration():
    # Two-sided power iteration on the shifted unsymmetrized generator is
    # the oracle; the bi-orthogonal Rayleigh quotient is second-order
    # accurate in the remaining contamination.
    p = MaserParams.from_alpha(50.0, 3.0, NU)
    dim = 200
    gen = build_tilted(p, 0.1, dim)
    shift = float(np.max(-gen.diag)) + 1.0
    diag = gen.diag + shift

    def apply(mat_sub, mat_sup, x):
        y = diag * x
        y[1:] += mat_sub * x[:-1]
        y[:-1] += mat_sup * x[1:]
        return y

    v = np.ones(dim)
    u = np.ones(dim)
    for _ in range(20000):
        v = apply(gen.sub, gen.sup, v)
        v /= np.linalg.norm(v)
        u = apply(gen.sup, gen.sub, u)  # transpose swaps the bands
        u /= np.linalg.norm(u)
    lam_power = float(u @ apply(gen.sub, gen.sup, v)) / float(u @ v) - shift
    lam_sym = eigh_tridiagonal(gen.diag, gen.sym_off, eigvals_only=True,
                               select="i", select_range=(dim - 1, dim - 1))[0]
    assert lam_sym == pytest.approx(lam_power, abs=1e-9)


def test_matches_hilbert_space_representation_spectra():
    # The L2-picture operator built from birth/death amplitudes must be
    # isospectral to the probability-picture bands: symmetric at s=0 and
    # carrying the amplitude-ratio factor on the upper band when tilted.
    p = MaserParams.from_alpha(10.0, 2.0, NU)
    lv = np.arange(50, dtype=float)
    c = p.nex * np.sin(p.phi * np.sqrt(lv + 1)) ** 2
    b = c + NU * (lv + 1)
    d = (NU + 1) * lv
    amp_b, amp_d = np.sqrt(b), np.sqrt(d)

    gen0 = build_tilted(p, 0.0, 50)
    sym = eigh_tridiagonal(-(b + d), amp_b[:-1] * amp_d[1:], eigvals_only=True)
    mine = eigh_tridiagonal(gen0.diag, gen0.sym_off, eigvals_only=True)
    assert np.max(np.abs(np.sort(sym) - np.sort(mine))) < 1e-9

    s = 0.35
    t = np.diag(-(b[:40] + d[:40]))
    for j in range(39):
        t[j + 1, j] = amp_b[j] * amp_d[j + 1]
        t[j, j + 1] = amp_b[j] * amp_d[j + 1] + (math.exp(s) - 1) * c[j] * amp_d[j + 1] / amp_b[j]
    gen_s = build_tilted(p, s, 40)
    ev_ref = np.sort(np.linalg.eigvals(t).real)
    ev_mine = np.sort(np.linalg.eigvals(gen_s.dense()).real)
    assert np.max(np.abs(ev_ref - ev_mine)) < 1e-8


def test_null_vector_from_banded_solve_unimodal():
    # Linear-algebra route to the stationary law at a unimodal setting.
    p = MaserParams.from_alpha(150.0, 3.0, NU)
    ss = stationary(p, 1e-12)
    gen = build_tilted(p, 0.0, ss.dim)
    n = ss.dim
    ab = np.zeros((3, n))
    ab[0, 1:] = gen.sup
    ab[1, :] = gen.diag
    ab[2, :-1] = gen.sub
    pin = int(np.argmax(ss.probs))
    ab[1, pin] = 1.0
    ab[0, pin + 1] = 0.0
    ab[2, pin - 1] = 0.0
    rhs = np.zeros(n)
    rhs[pin] = 1.0
    sol = solve_banded((1, 1), ab, rhs)
    sol /= sol.sum()
    assert np.max(np.abs(sol - ss.probs)) < 1e-12
    bulk = ss.probs > 1e-8
    assert np.max(np.abs(sol[bulk] - ss.probs[bulk]) / ss.probs[bulk]) < 1e-8


def test_discrete_transfer_is_stochastic_at_s0():
    p = MaserParams.from_alpha(10.0, 2.0, NU)
    tr = build_discrete(p, 0.0, 30)
    assert np.all(tr.up + tr.stay == 1.0)
    assert np.all(tr.up >= 0) and np.all(tr.stay >= 0)


def test_discrete_transfer_resonant_level():
    # phi*sqrt(1) = pi/2 makes the lowest level a certain detection.
    p = MaserParams(nex=10.0, phi=math.pi / 2, nu=NU)
    tr = build_discrete(p, 0.3, 5)
    assert tr.up[0] == pytest.approx(math.exp(0.3), rel=1e-15)
    assert tr.stay[0] == pytest.approx(0.0, abs=1e-30)


def test_discrete_mgf_matches_exhaustive_enumeration():
    from itertools import product

    p = MaserParams.from_alpha(10.0, 2.0, NU)
    s = 0.7
    tr = build_discrete(p, s, 5)
    total = 0.0
    for word in product((1, 2), repeat=3):
        level, prob, counted = 0, 1.0, 0
        for outcome in word:
            p_up = math.sin(p.phi * math.sqrt(level + 1)) ** 2
            if outcome == 1:
                prob *= p_up
                level += 1
                counted += 1
            else:
                prob *= 1 - p_up
        total += math.exp(s * counted) * prob
    assert discrete_mgf(tr, 3, 0) == pytest.approx(total, abs=1e-12)
    assert discrete_mgf(tr, 0, 0) == 1.0
    with pytest.raises(ValueError):
        discrete_mgf(tr, 3, 7)
