"""Jet arithmetic: chain-rule exactness, spec examples, soundness vs differences."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bieberbach_lab import jets
from bieberbach_lab.errors import DomainError
from bieberbach_lab.jets import (ComplexJet, Jet2Scalar, Jet2Vector,
                                 complex_z_derivatives, lift_chart)

from oracles import fd_hessian_pack, fd_jacobian


def test_lift_chart_origin():
    xj, yj = lift_chart(0.0, 0.0)
    assert (xj.val, xj.dx, xj.dy) == (0.0, 1.0, 0.0)
    assert (yj.val, yj.dx, yj.dy) == (0.0, 0.0, 1.0)
    assert np.all(xj.d2 == 0.0) and np.all(yj.d2 == 0.0)


def test_lift_chart_point():
    xj, yj = lift_chart(1.0, 2.0)
    assert xj.val == 1.0 and tuple(xj.d) == (1.0, 0.0)
    assert yj.val == 2.0 and tuple(yj.d) == (0.0, 1.0)


def test_polynomial_composition_hand_check():
    # f(x, y) = (x^2, x y, y) at (1, 2)
    xj, yj = lift_chart(1.0, 2.0)
    f0 = xj * xj
    f1 = xj * yj
    assert f0.val == 1.0 and tuple(f0.d) == (2.0, 0.0) and tuple(f0.d2) == (2.0, 0.0, 0.0)
    assert f1.val == 2.0 and tuple(f1.d) == (2.0, 1.0) and tuple(f1.d2) == (0.0, 1.0, 0.0)


def test_sinh_at_zero():
    xj, _ = lift_chart(0.0, 0.0)
    s = jets.sinh(xj)
    assert s.val == 0.0 and s.dx == 1.0 and s.dxx == 0.0


def test_product_sinh_cos():
    # d/dx(sinh x cos y) = cosh x cos y -> 1 at origin, all second partials 0
    xj, yj = lift_chart(0.0, 0.0)
    p = jets.sinh(xj) * jets.cos(yj)
    assert p.val == 0.0
    assert tuple(p.d) == (1.0, 0.0)
    assert tuple(p.d2) == (0.0, 0.0, 0.0)


def test_exp_sum():
    xj, yj = lift_chart(0.0, 0.0)
    e = jets.exp(xj + yj)
    assert e.val == 1.0
    assert tuple(e.d) == (1.0, 1.0)
    assert tuple(e.d2) == (1.0, 1.0, 1.0)


def test_division_and_sqrt_domain_errors():
    xj, _ = lift_chart(0.0, 0.0)
    with pytest.raises(DomainError):
        (1.0 + xj) / xj
    with pytest.raises(DomainError):
        jets.sqrt(xj)
    with pytest.raises(DomainError):
        jets.sqrt(xj - 1.0)


def test_division_chain_rule():
    xj, yj = lift_chart(0.5, -0.25)
    q = (xj * xj) / (1.0 + yj * yj)
    x, y = 0.5, -0.25
    den = 1.0 + y * y
    assert q.val == pytest.approx(x * x / den, abs=1e-15)
    assert q.dx == pytest.approx(2 * x / den, abs=1e-14)
    assert q.dy == pytest.approx(-2 * y * x * x / den ** 2, abs=1e-14)
    assert q.dxx == pytest.approx(2 / den, abs=1e-14)
    assert q.dxy == pytest.approx(-4 * x * y / den ** 2, abs=1e-14)
    assert q.dyy == pytest.approx(x * x * (8 * y * y / den ** 3 - 2 / den ** 2), abs=1e-14)


coeff = st.integers(min_value=-8, max_value=8)


@given(coeff, coeff, coeff, coeff, coeff, coeff,
       st.integers(min_value=-3, max_value=3), st.integers(min_value=-3, max_value=3))
@settings(max_examples=200)
def test_quadratic_polynomials_are_exact(c0, c1, c2, c3, c4, c5, x, y):
    # integer data keeps every float operation exact, so residuals must be zero
    xj, yj = lift_chart(float(x), float(y))
    p = c0 + c1 * xj + c2 * yj + c3 * xj * xj + c4 * xj * yj + c5 * yj * yj
    assert p.val == c0 + c1 * x + c2 * y + c3 * x * x + c4 * x * y + c5 * y * y
    assert p.dx == c1 + 2 * c3 * x + c4 * y
    assert p.dy == c2 + c4 * x + 2 * c5 * y
    assert (p.dxx, p.dxy, p.dyy) == (2 * c3, c4, 2 * c5)


@given(st.floats(-0.8, 0.8), st.floats(-0.8, 0.8))
@settings(max_examples=60)
def test_conjugation_symmetry(x, y):
    # negating the chart y-variable conjugates fz and fzz
    def immersion(xj, yj):
        return (jets.sinh(xj) * jets.cos(yj), jets.sinh(xj) * jets.sin(yj), yj)

    def mirrored(xj, yj):
        return immersion(xj, -yj)

    jv = Jet2Vector(immersion(*lift_chart(x, -y)))
    jm = Jet2Vector(mirrored(*lift_chart(x, y)))
    fz, fzz = complex_z_derivatives(jv)
    gz, gzz = complex_z_derivatives(jm)
    assert np.allclose(gz.to_complex(), np.conj(fz.to_complex()), atol=1e-14)
    assert np.allclose(gzz.to_complex(), np.conj(fzz.to_complex()), atol=1e-14)


@given(st.floats(-2, 2), st.floats(-2, 2))
@settings(max_examples=40)
def test_complex_z_derivatives_real_linearity(alpha, beta):
    xj, yj = lift_chart(0.3, -0.4)
    a = (jets.sinh(xj) * jets.cos(yj), jets.exp(xj * yj), yj)
    b = (xj * xj, jets.cos(xj + yj), jets.sinh(yj))
    combo = Jet2Vector([alpha * u + beta * v for u, v in zip(a, b)])
    fz_c, fzz_c = complex_z_derivatives(combo)
    fz_a, fzz_a = complex_z_derivatives(Jet2Vector(a))
    fz_b, fzz_b = complex_z_derivatives(Jet2Vector(b))
    assert np.allclose(fz_c.to_complex(),
                       alpha * fz_a.to_complex() + beta * fz_b.to_complex(), atol=1e-12)
    assert np.allclose(fzz_c.to_complex(),
                       alpha * fzz_a.to_complex() + beta * fzz_b.to_complex(), atol=1e-12)


def test_helicoid_z_derivatives_hand_values(helicoid_unit):
    fz, fzz = complex_z_derivatives(helicoid_unit.jet(0.0, 0.0))
    assert np.allclose(fz.to_complex(), [0.5, 0.0, -0.5j], atol=1e-15)
    assert fz.norm() == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-15)
    assert np.allclose(fzz.to_complex(), [0.0, -0.5j, 0.0], atol=1e-15)


def test_planar_identity_z_derivatives(plane_patch):
    fz, fzz = complex_z_derivatives(plane_patch.jet(0.0, 0.0))
    assert np.allclose(fz.to_complex(), [0.5, -0.5j, 0.0], atol=1e-16)
    assert fzz.norm() == 0.0


def test_jet_partials_match_finite_differences(registered_surfaces):
    # first partials: step 1e-5 at 1e-6; second partials: step 1e-3 at 1e-5
    for S in registered_surfaces.values():
        for (x, y) in S.sample_grid():
            jv = S.jet(x, y)
            jac_fd = fd_jacobian(S, x, y, h=1e-5)
            hess_fd = fd_hessian_pack(S, x, y, h=1e-3)
            assert np.all(np.abs(jv.jac - jac_fd)
                          <= 1e-6 * np.maximum(1.0, np.abs(jv.jac))), (S.name, x, y)
            assert np.all(np.abs(jv.hess - hess_fd)
                          <= 1e-5 * np.maximum(1.0, np.abs(jv.hess))), (S.name, x, y)


def test_complex_jet_matches_complex_arithmetic():
    z0 = 0.3 - 0.2j
    z = ComplexJet.variable(z0.real, z0.imag)
    w = (z * z + (1.5 - 0.5j)) / (1.0 - 0.25 * z)
    expect = (z0 * z0 + (1.5 - 0.5j)) / (1.0 - 0.25 * z0)
    assert complex(w.re.val, w.im.val) == pytest.approx(expect, abs=1e-15)
    # holomorphic: Cauchy-Riemann on the jet gradients
    assert w.re.dx == pytest.approx(w.im.dy, abs=1e-14)
    assert w.re.dy == pytest.approx(-w.im.dx, abs=1e-14)
