import random
from fractions import Fraction

import pytest

from carnot_acf.counterexample import (
    assemble_system,
    build_ansatz,
    certificate_from_text,
    certificate_to_text,
    closed_form_coefficients,
    construct,
    det_closed_form,
    intrinsic_odd_check,
    s_reflect,
    select_pair,
    synthetic_alpha_group,
)
from carnot_acf.errors import (
    InvalidParams,
    NoNoncommutingPair,
    SingularSystem,
    ZeroB,
)
from carnot_acf.group import extract_alpha, make_step2, polarized_to_canonical
from carnot_acf.hcalc import sublaplacian
from carnot_acf.linsolve import det_exact, solve_exact
from carnot_acf.ratpoly import Polynomial, parse_poly

from util import random_bpq, random_step2_group


class TestSelectPair:
    def test_engel(self, engel):
        pair = select_pair(engel)
        assert (pair.i, pair.s, pair.j) == (1, 2, 1)
        assert pair.alpha_gap == 1

    def test_heisenberg(self, heis1):
        pair = select_pair(heis1)
        assert (pair.i, pair.s, pair.j) == (1, 2, 1)
        assert pair.alpha_gap == 1

    def test_heisenberg2_skips_commuting_pair(self, heis2):
        pair = select_pair(heis2)
        assert (pair.i, pair.s, pair.j) == (1, 3, 1)

    def test_euclidean(self, eucl3):
        with pytest.raises(NoNoncommutingPair):
            select_pair(eucl3)


class TestAnsatz:
    def test_engel_template(self, engel):
        pair = select_pair(engel)
        t = build_ansatz(engel, pair, 1)
        w = engel.weights
        assert t.p1 == parse_poly("x2", w)
        assert t.basis[4] == parse_poly("x1*y", w)  # m1 = 2: no correction sum

    def test_zero_b(self, engel):
        with pytest.raises(ZeroB):
            build_ansatz(engel, select_pair(engel), 0)

    def test_correction_term_present_for_m1_3(self):
        # skew table with alpha[3][1][1] = 1 forces alpha[1][3][1] = -1, so the
        # template corrects g5 by +x1^2*x3 (and the certificate then passes).
        b = [[0, -1, -2], [1, 0, 0], [2, 0, 0]]
        g = make_step2([b])
        alpha = extract_alpha(g)
        assert alpha.get(3, 1, 1) == 1
        pair = select_pair(g)
        assert (pair.i, pair.s) == (1, 2)
        t = build_ansatz(g, pair, 1)
        w = g.weights
        assert t.basis[4] == parse_poly("x1*y + x1^2*x3", w)
        construct(g, 1, 1, 1)  # certificate must hold


class TestSystem:
    def test_engel_matrix_matches_alpha_pattern(self, engel):
        pair = select_pair(engel)
        t = build_ansatz(engel, pair, 1)
        matrix, rhs = assemble_system(engel, t, 0, Fraction(1, 2))
        expected = (
            (6, 0, 2, 0, 0),
            (0, 2, 0, 6, 0),
            (0, 0, 2, 0, 0),
            (0, 1, 0, 0, 1),
            (0, 0, 0, 3, 0),
        )
        assert matrix == tuple(tuple(Fraction(x) for x in row) for row in expected)
        assert rhs == (0, 0, 0, 0, Fraction(1, 2))

    def test_determinant_closed_form_randomized(self):
        rng = random.Random(41)
        for _ in range(60):
            a = [Fraction(rng.randint(-8, 8), rng.randint(1, 4)) for _ in range(4)]
            b = Fraction(rng.randint(1, 9), rng.randint(1, 4)) * rng.choice([1, -1])
            g = synthetic_alpha_group(*a)
            gap = a[2] - a[1]
            if gap == 0:
                with pytest.raises((NoNoncommutingPair, SingularSystem)):
                    construct(g, b, 1, 1)
                continue
            pair = select_pair(g)
            t = build_ansatz(g, pair, b)
            matrix, _ = assemble_system(g, t, 1, 1)
            det = det_exact([list(r) for r in matrix])
            assert det == det_closed_form(b, pair.alpha_gap)

    def test_singular_when_gap_zero(self):
        g = synthetic_alpha_group(1, 2, 2, 1)  # a21 == a12
        with pytest.raises(NoNoncommutingPair):
            select_pair(g)


class TestSolve:
    def test_engel_coefficients(self, engel):
        r = construct(engel, 1, 0, Fraction(1, 2))
        assert r.coefficients == (0, Fraction(-1, 2), 0, Fraction(1, 6), Fraction(1, 2))

    def test_heisenberg_coefficients(self, heis1):
        r = construct(heis1, 1, 0, Fraction(1, 2))
        assert r.coefficients == (0, Fraction(-1, 4), 0, Fraction(1, 6), Fraction(1, 2))
        w = heis1.weights
        assert r.u == parse_poly("x2 + 1/4*x1^2*x2 - 1/6*x2^3 - 1/2*x1*y", w)

    def test_closed_form_cross_check_randomized(self):
        rng = random.Random(43)
        for _ in range(60):
            m1 = rng.choice([2, 3, 4])
            m2 = rng.randint(1, min(3, m1 * (m1 - 1) // 2))
            g = random_step2_group(rng, m1, m2)
            b, p, q = random_bpq(rng)
            try:
                r = construct(g, b, p, q)
            except NoNoncommutingPair:
                continue
            cf = closed_form_coefficients(extract_alpha(g), r.pair, b, p, q)
            assert r.coefficients == cf

    def test_plain_solver_on_random_systems(self):
        rng = random.Random(47)
        for _ in range(25):
            a = [[Fraction(rng.randint(-5, 5), rng.randint(1, 3)) for _ in range(4)] for _ in range(4)]
            x = [Fraction(rng.randint(-5, 5), rng.randint(1, 3)) for _ in range(4)]
            if det_exact(a) == 0:
                continue
            rhs = [sum(a[i][j] * x[j] for j in range(4)) for i in range(4)]
            assert solve_exact(a, rhs) == x


class TestConstruct:
    def test_engel_reproduction(self, engel):
        w = engel.weights
        r = construct(engel, 1, 0, Fraction(1, 2))
        assert r.u == parse_poly("x2 + 1/2*x1^2*x2 - 1/6*x2^3 - 1/2*x1*y", w)
        assert r.certificate.harmonic
        assert r.certificate.inner_product == parse_poly("1/2*x2^2", w)
        assert sublaplacian(engel, r.u).is_zero()

    def test_invalid_params(self, engel):
        with pytest.raises(InvalidParams):
            construct(engel, 1, 0, 0)
        with pytest.raises(InvalidParams):
            construct(engel, 0, 0, 1)
        with pytest.raises(InvalidParams):
            construct(engel, 1, -1, 1)

    def test_polarized_matches_canonical_through_transport(self, heis1, heis1_pol):
        r_pol = construct(heis1_pol, 1, 0, Fraction(1, 2))
        r_can = construct(heis1, 1, 0, Fraction(1, 2))
        assert polarized_to_canonical(r_pol.u) == r_can.u

    def test_non_skew_table_still_certifies(self):
        g = synthetic_alpha_group(Fraction(1, 2), Fraction(-1), Fraction(2), Fraction(1, 3))
        r = construct(g, Fraction(3, 2), Fraction(1, 4), Fraction(2))
        assert r.certificate.harmonic and r.certificate.inner_matches_pq

    def test_randomized_certificates(self):
        rng = random.Random(53)
        for _ in range(40):
            m1 = rng.choice([2, 3, 4])
            m2 = rng.randint(1, min(3, m1 * (m1 - 1) // 2))
            g = random_step2_group(rng, m1, m2)
            b, p, q = random_bpq(rng)
            try:
                r = construct(g, b, p, q)
            except NoNoncommutingPair:
                continue
            pair = r.pair
            xi2 = Polynomial.variable(g.n, pair.i) ** 2
            xs2 = Polynomial.variable(g.n, pair.s) ** 2
            assert r.certificate.inner_product == p * xi2 + q * xs2
            assert sublaplacian(g, r.u).is_zero()

    def test_reflection_flips_sign(self):
        rng = random.Random(59)
        for _ in range(15):
            m1 = rng.choice([2, 3])
            g = random_step2_group(rng, m1, 1)
            b, p, q = random_bpq(rng)
            try:
                r = construct(g, b, p, q)
            except NoNoncommutingPair:
                continue
            assert s_reflect(g, r.u) == -r.u

    def test_s_reflect_basics(self, engel):
        w = engel.weights
        assert s_reflect(engel, parse_poly("y", w)) == parse_poly("y", w)
        assert s_reflect(engel, parse_poly("x1*x2", w)) == parse_poly("x1*x2", w)
        assert s_reflect(engel, parse_poly("x1*y", w)) == parse_poly("-x1*y", w)


class TestIntrinsicOdd:
    def test_engel_p5(self, engel):
        w = engel.weights
        p5 = parse_poly(
            "x1*y^2 - 2*y*x1^2*x2 + 2*t*x1*x2 + 1/2*x1^3*x2^2 + x1^2*x2^3", w
        )
        assert intrinsic_odd_check(engel, p5)
        assert not sublaplacian(engel, p5).is_zero()

    def test_first_layer_coordinate(self, engel):
        assert intrinsic_odd_check(engel, parse_poly("x2", engel.weights))

    def test_y_is_not_intrinsic_odd(self, engel):
        assert not intrinsic_odd_check(engel, parse_poly("y", engel.weights))


class TestCertificateFormat:
    def test_round_trip(self, engel):
        w = engel.weights
        r = construct(engel, 1, 0, Fraction(1, 2))
        text = certificate_to_text(r, w)
        data = certificate_from_text(text, w)
        assert data["b"] == 1 and data["q"] == Fraction(1, 2)
        assert data["u"] == r.u
        assert data["harmonic"] is True
        assert data["inner_matches_pq"] is True
        assert data["c2"] == Fraction(-1, 2)

    def test_deterministic_output(self, engel):
        w = engel.weights
        r = construct(engel, 1, 0, Fraction(1, 2))
        assert certificate_to_text(r, w) == certificate_to_text(r, w)
