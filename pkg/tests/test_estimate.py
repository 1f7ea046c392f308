"""Headline estimate, composition estimate, classical bound, scaling scan."""

import math

import numpy as np
import pytest
import sympy

from bieberbach_lab import estimate, geometry
from bieberbach_lab.errors import NotConformal, ZeroDerivative
from bieberbach_lab.estimate import (HolomorphicGerm, classical_bieberbach,
                                     evaluate_theorem, helicoid_scan,
                                     lemma22_check, lemma24_battery,
                                     theorem_battery)
from bieberbach_lab.geometry import build_surface, dilated, mobius_recentered
from bieberbach_lab.jets import complex_z_derivatives

SQRT2 = math.sqrt(2.0)


def koebe_taylor_oracle(c, order=4):
    """Symbolic Taylor coefficients of z / (1 - c z)^2 at the origin."""
    z = sympy.symbols("z")
    k = z / (1 - c * z) ** 2
    poly = sympy.series(k, z, 0, order).removeO()
    return [complex(poly.coeff(z, j)) for j in range(order)]


# -- headline evaluation ----------------------------------------------------------

def test_plane_recovers_classical_form(plane_patch):
    rep = evaluate_theorem(plane_patch)
    assert rep.lhs <= 1e-12
    assert rep.rhs == pytest.approx(2.0 * SQRT2, abs=1e-12)
    assert rep.sigma_zz.norm() <= 1e-12 and rep.hess_zz.norm() <= 1e-12


def test_koebe_plane_is_equality_case():
    rep = evaluate_theorem(build_surface("koebe_plane", c=1.0))
    assert abs(rep.lhs - rep.rhs) <= 1e-9
    assert rep.lhs == pytest.approx(2.0 * SQRT2, abs=1e-9)
    # second coefficient confirmed symbolically
    a1, a2 = koebe_taylor_oracle(1)[1:3]
    assert a1 == pytest.approx(1.0) and a2 == pytest.approx(2.0)
    # ||f_zz(0)|| for the planar embedding is |k''(0)| / sqrt 2 = sqrt 2 |a2|
    assert rep.fzz0.norm() == pytest.approx(SQRT2 * abs(a2), abs=1e-12)


def test_helicoid_patch_report(helicoid_half):
    S = geometry.helicoid(r=0.3)
    rep = evaluate_theorem(S)
    assert rep.slack > 0.0
    for term in (rep.fz0, rep.fzz0, rep.sigma_zz, rep.hess_zz):
        assert np.all(np.isfinite(term.re)) and np.all(np.isfinite(term.im))
    assert rep.attractor_kind == "conformal_pushforward"


def test_theorem_requires_conformal_surface():
    with pytest.raises(NotConformal):
        evaluate_theorem(build_surface("graph"))


def test_rotation_invariance(helicoid_half):
    base = evaluate_theorem(mobius_recentered(helicoid_half, 0.3 + 0.2j))
    for theta in (0.7, 2.1):
        rot = evaluate_theorem(
            mobius_recentered(helicoid_half, 0.3 + 0.2j, theta=0.0)
            if theta is None else
            mobius_recentered(mobius_recentered(helicoid_half, 0.3 + 0.2j), 0.0, theta=theta))
        assert rot.lhs == pytest.approx(base.lhs, abs=1e-10)
        assert rot.rhs == pytest.approx(base.rhs, abs=1e-10)


def test_dilation_consistency(helicoid_half):
    # under z -> e^{-t} z the first derivative scales by e^{-t} and every
    # second-order term by e^{-2t}
    S = mobius_recentered(helicoid_half, 0.25)
    base = evaluate_theorem(S)
    for t in (0.5, 1.0):
        s = math.exp(-t)
        rep = evaluate_theorem(dilated(S, s))
        assert rep.rhs == pytest.approx(s * base.rhs, rel=1e-8)
        assert rep.fzz0.norm() == pytest.approx(s * s * base.fzz0.norm(), rel=1e-8)
        assert rep.sigma_zz.norm() == pytest.approx(s * s * base.sigma_zz.norm(), rel=1e-8)
        assert rep.hess_zz.norm() == pytest.approx(s * s * base.hess_zz.norm(), rel=1e-7)


def test_theorem_battery_slack(helicoid_half):
    cases = theorem_battery(count=108, seed=0)
    assert len(cases) == 108
    assert all(c.report.slack >= -1e-9 for c in cases)


# -- master identity -----------------------------------------------------------

def test_lemma24_battery_all_pass():
    cases = lemma24_battery(seed=0, pairs=10)
    assert len(cases) == 50
    kinds = {c.attractor_kind for c in cases}
    assert "tangential_projection" in kinds
    assert all(c.residual_scaled <= 1e-5 for c in cases)


# -- classical coefficient bound --------------------------------------------------

def test_classical_koebe_saturates():
    germ = HolomorphicGerm(koebe_taylor_oracle(1)[1:])
    ratio, ok = classical_bieberbach(germ)
    assert ratio == pytest.approx(4.0, abs=1e-12) and ok


def test_classical_identity():
    ratio, ok = classical_bieberbach(HolomorphicGerm((1.0,)))
    assert ratio == 0.0 and ok


def test_classical_family_monotone():
    prev = -1.0
    for c in np.linspace(0.1, 1.0, 10):
        germ = HolomorphicGerm(koebe_taylor_oracle(float(c))[1:])
        ratio, ok = classical_bieberbach(germ)
        assert ok
        assert ratio == pytest.approx(4.0 * c, abs=1e-10)
        assert ratio > prev
        prev = ratio
    assert prev == pytest.approx(4.0, abs=1e-10)


def test_classical_rejects_zero_derivative():
    with pytest.raises(ZeroDerivative):
        classical_bieberbach(HolomorphicGerm((0.0, 1.0)))


# -- composition estimate ----------------------------------------------------------

def test_lemma22_plane_half(plane_patch):
    rep = lemma22_check(plane_patch, HolomorphicGerm((0.5,)))
    # g_z(0) = (1/2) (1/sqrt 2), so the right side is 8 sqrt 2
    assert rep.lhs <= 1e-12
    assert rep.rhs == pytest.approx(8.0 * SQRT2, abs=1e-12)
    assert rep.margin > 0.0


def test_lemma22_koebe_half_against_series_oracle():
    S = build_surface("koebe_plane", c=1.0)
    rep = lemma22_check(S, HolomorphicGerm((0.5,)), grid_check=True)
    assert rep.margin > 0.0
    assert rep.grid_gap <= 1e-6
    # symbolic oracle for g = k(z/2)
    z = sympy.symbols("z")
    g = (z / 2) / (1 - z / 2) ** 2
    gs = sympy.series(g, z, 0, 3).removeO()
    g1 = complex(gs.coeff(z, 1))
    g2 = complex(gs.coeff(z, 2))
    # Hermitian norms of the planar embedding divide scalar moduli by sqrt 2
    gz = abs(g1) / SQRT2
    gzz = 2.0 * abs(g2) / SQRT2
    fz = 1.0 / SQRT2
    fzz = 4.0 / SQRT2
    lhs_oracle = abs(gzz / gz ** 2 - fzz / fz ** 2) / 1.0
    assert rep.lhs == pytest.approx(lhs_oracle, abs=1e-10)
    assert rep.rhs == pytest.approx(4.0 / gz, abs=1e-12)


def test_lemma22_recentred_helicoid(helicoid_half):
    rep = lemma22_check(helicoid_half, HolomorphicGerm((1.0,)), center=0.3,
                        grid_check=True)
    assert rep.margin > 0.0
    assert rep.grid_gap <= 1e-6


def test_lemma22_nontrivial_composition(helicoid_half):
    # with a nonzero second germ coefficient the analytic unimodular factor
    # is the lemma's factor, not the norm minimizer, so only the bound holds
    rep = lemma22_check(helicoid_half, HolomorphicGerm((0.6, 0.15)), center=0.2,
                        grid_check=True)
    assert rep.margin > 0.0
    assert rep.grid_gap >= -1e-12


def test_lemma22_zeta_is_unimodular(helicoid_half):
    rep = lemma22_check(helicoid_half, HolomorphicGerm((0.3 + 0.4j,)))
    assert abs(abs(rep.zeta) - 1.0) <= 1e-12


# -- helicoid scan ------------------------------------------------------------------

def test_scan_naive_ratio_doubles():
    rows = helicoid_scan([1.0, 2.0, 4.0, 8.0])
    for a, b in zip(rows, rows[1:]):
        assert b.naive_ratio == pytest.approx(2.0 * a.naive_ratio, rel=1e-12)
    assert rows[0].naive_ratio == pytest.approx(1.0 / SQRT2, abs=1e-12)


def test_scan_axis_basepoint_geometric_term_vanishes():
    rows = helicoid_scan([1.0])
    assert abs(rows[0].geometric_ratio) <= 1e-10
    assert rows[0].slack >= 0.0


def test_scan_recentred_geometric_term_is_essential():
    rows = helicoid_scan([1.0, 2.0], basepoint_x=0.5)
    for row in rows:
        assert row.geometric_ratio > 1e-3
        assert row.slack >= -1e-9
    # the corrected ratio still grows linearly with the scale
    assert rows[1].geometric_ratio == pytest.approx(2 * rows[0].geometric_ratio, rel=1e-10)
    assert rows[0].geometric_ratio == pytest.approx(math.tanh(0.5), abs=1e-12)


def test_scan_rejects_bad_scales():
    with pytest.raises(ValueError):
        helicoid_scan([1.0, -2.0])


# -- corroboration against the finite-difference pipeline ---------------------------

def test_helicoid_report_against_fd_pipeline():
    from oracles import fd_sigma_complex, fd_z_derivatives
    S = geometry.helicoid(r=0.3)
    rep = evaluate_theorem(S)
    fz_fd, fzz_fd = fd_z_derivatives(S, 0.0, 0.0)
    sig_fd = fd_sigma_complex(S, 0.0, 0.0)
    assert abs(rep.fz0.norm() - fz_fd.norm()) <= 1e-6
    assert abs(rep.fzz0.norm() - fzz_fd.norm()) <= 1e-6
    assert (rep.sigma_zz - sig_fd).norm() <= 1e-6
