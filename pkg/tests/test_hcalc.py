import random
from fractions import Fraction

import pytest

from carnot_acf.errors import DimensionMismatch, IndexOutOfRange
from carnot_acf.hcalc import (
    apply_field,
    check_G1,
    horizontal_divergence,
    horizontal_gradient,
    horizontal_inner,
    is_harmonic,
    sublaplacian,
)
from carnot_acf.ratpoly import Polynomial, parse_poly

from util import random_polynomial

# Engel fixtures frozen from independent hand differentiation (see tests below
# that re-derive them through the public operations).
ENGEL_P3 = "-1/2*x1^2*x2 + 1/6*x2^3 + 1/2*x1*y"
ENGEL_U = "x2 + 1/2*x1^2*x2 - 1/6*x2^3 - 1/2*x1*y"
ENGEL_P5 = "x1*y^2 - 2*y*x1^2*x2 + 2*t*x1*x2 + 1/2*x1^3*x2^2 + x1^2*x2^3"
ENGEL_DELTA_P5 = "x1^3 + 6*x1^2*x2 + 3*x1*x2^2 + 2*x2^3 - 4*x2*y"
ENGEL_X2_P5 = "2*t*x1 + 3*x1^2*x2^2"


class TestApplyField:
    def test_engel_x2_on_x1y(self, engel):
        w = engel.weights
        p = parse_poly("x1*y", w)
        assert apply_field(engel, 2, p) == parse_poly("x1^2", w)

    def test_engel_x1_on_p3(self, engel):
        w = engel.weights
        p3 = parse_poly(ENGEL_P3, w)
        assert apply_field(engel, 1, p3) == parse_poly("-x1*x2 + 1/2*y", w)

    def test_constants_killed(self, engel, heis1, eucl3):
        for g in (engel, heis1, eucl3):
            one = Polynomial.constant(g.n, 1)
            for j in range(1, g.m1 + 1):
                assert apply_field(g, j, one).is_zero()

    def test_index_out_of_range(self, engel):
        with pytest.raises(IndexOutOfRange):
            apply_field(engel, 3, Polynomial.zero(4))


class TestGradient:
    def test_engel_p1(self, engel):
        w = engel.weights
        grad = horizontal_gradient(engel, parse_poly("x2", w))
        assert grad == (Polynomial.zero(4), Polynomial.constant(4, 1))

    def test_engel_p3(self, engel):
        w = engel.weights
        grad = horizontal_gradient(engel, parse_poly(ENGEL_P3, w))
        assert grad[0] == parse_poly("-x1*x2 + 1/2*y", w)
        assert grad[1] == parse_poly("1/2*x2^2", w)

    def test_euclidean(self, eucl3):
        w = eucl3.weights
        grad = horizontal_gradient(eucl3, parse_poly("x1^2 + x2^2", w))
        assert grad == (
            parse_poly("2*x1", w),
            parse_poly("2*x2", w),
            Polynomial.zero(3),
        )


class TestDivergence:
    def test_div_grad_is_laplacian(self, engel, heis1, eucl3):
        rng = random.Random(17)
        for g in (engel, heis1, eucl3):
            for _ in range(17):
                p = random_polynomial(rng, g.weights)
                assert horizontal_divergence(g, horizontal_gradient(g, p)) == sublaplacian(g, p)

    def test_rotational_section(self, engel):
        w = engel.weights
        phi = (parse_poly("x2", w), parse_poly("-x1", w))
        assert horizontal_divergence(engel, phi).is_zero()

    def test_constant_section(self, heis1):
        phi = (Polynomial.constant(3, 2), Polynomial.constant(3, -5))
        assert horizontal_divergence(heis1, phi).is_zero()

    def test_component_count(self, heis1):
        with pytest.raises(DimensionMismatch):
            horizontal_divergence(heis1, (Polynomial.zero(3),))


class TestSublaplacian:
    def test_engel_u_harmonic(self, engel):
        u = parse_poly(ENGEL_U, engel.weights)
        assert sublaplacian(engel, u).is_zero()

    def test_engel_p5_not_harmonic(self, engel):
        w = engel.weights
        p5 = parse_poly(ENGEL_P5, w)
        assert sublaplacian(engel, p5) == parse_poly(ENGEL_DELTA_P5, w)

    def test_x2_on_p5_fixture(self, engel):
        w = engel.weights
        p5 = parse_poly(ENGEL_P5, w)
        assert apply_field(engel, 2, p5) == parse_poly(ENGEL_X2_P5, w)

    def test_euclidean_harmonic_cubic(self, eucl3):
        p = parse_poly("x1^3 - 3*x1*x2^2", eucl3.weights)
        assert sublaplacian(eucl3, p).is_zero()

    def test_is_harmonic_residuals(self, engel, eucl3):
        ok, residual = is_harmonic(engel, parse_poly(ENGEL_U, engel.weights))
        assert ok and residual is None
        ok, residual = is_harmonic(eucl3, parse_poly("x1^2", eucl3.weights))
        assert not ok and residual == Polynomial.constant(3, 2)
        w = engel.weights
        ok, residual = is_harmonic(engel, parse_poly(f"x2 - ({ENGEL_P5})", w))
        assert not ok
        assert residual == -parse_poly(ENGEL_DELTA_P5, w)


class TestInner:
    def test_engel_inner(self, engel):
        w = engel.weights
        a = horizontal_gradient(engel, parse_poly("x2", w))
        b = horizontal_gradient(engel, parse_poly(ENGEL_P3, w))
        assert horizontal_inner(a, b) == parse_poly("1/2*x2^2", w)

    def test_self_inner(self, engel):
        w = engel.weights
        a = (parse_poly("x2", w), parse_poly("-x1", w))
        assert horizontal_inner(a, a) == parse_poly("x1^2 + x2^2", w)

    def test_zero_section(self, heis1):
        a = (Polynomial.zero(3), Polynomial.zero(3))
        b = horizontal_gradient(heis1, parse_poly("x1*y", heis1.weights))
        assert horizontal_inner(a, b).is_zero()


class TestScalingLaws:
    def test_G1_on_engel_u(self, engel):
        u = parse_poly(ENGEL_U, engel.weights)
        assert check_G1(engel, u, 2)
        assert check_G1(engel, u, 1)

    def test_G1_randomized(self, engel, heis1, eucl3):
        rng = random.Random(23)
        for g in (engel, heis1, eucl3):
            for _ in range(10):
                p = random_polynomial(rng, g.weights)
                lam = Fraction(rng.randint(1, 9), rng.randint(1, 5))
                assert check_G1(g, p, lam)

    def test_G2_harmonicity_survives_dilation(self, engel, heis1):
        cases = [
            (engel, parse_poly(ENGEL_U, engel.weights)),
            (heis1, parse_poly("x2 + 1/4*x1^2*x2 - 1/6*x2^3 - 1/2*x1*y", heis1.weights)),
        ]
        for g, u in cases:
            assert sublaplacian(g, u).is_zero()
            for lam in (Fraction(2), Fraction(-3, 2), Fraction(5, 7)):
                assert sublaplacian(g, u.dilate(g.weights, lam)).is_zero()

    def test_homogeneous_gradient_scaling(self, engel):
        w = engel.weights
        rng = random.Random(29)
        for _ in range(15):
            p = random_polynomial(rng, w, max_gdeg=4)
            for m, comp in p.g_components(w).items():
                lam = Fraction(rng.randint(1, 7), rng.randint(1, 4))
                for gcomp in horizontal_gradient(engel, comp):
                    assert gcomp.dilate(w, lam) == lam ** (m - 1) * gcomp

    def test_sublaplacian_lowers_degree_by_two(self, engel, heis1):
        rng = random.Random(31)
        for g in (engel, heis1):
            w = g.weights
            for _ in range(20):
                p = random_polynomial(rng, w, max_gdeg=5)
                for m, comp in p.g_components(w).items():
                    lap = sublaplacian(g, comp)
                    if not lap.is_zero():
                        assert lap.is_g_homogeneous(w, m - 2)


class TestLeibniz:
    def test_leibniz_randomized(self, engel, heis1):
        rng = random.Random(37)
        for g in (engel, heis1):
            for _ in range(15):
                p = random_polynomial(rng, g.weights, max_gdeg=3, terms=3)
                q = random_polynomial(rng, g.weights, max_gdeg=3, terms=3)
                for j in range(1, g.m1 + 1):
                    lhs = apply_field(g, j, p * q)
                    rhs = p * apply_field(g, j, q) + q * apply_field(g, j, p)
                    assert lhs == rhs
