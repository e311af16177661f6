"""Shared randomized generators for the test suite (seeded, exact)."""

import random
from fractions import Fraction

from carnot_acf.group import CarnotGroup, make_step2
from carnot_acf.linsolve import rank_exact
from carnot_acf.ratpoly import Polynomial, StratifiedWeights


def random_fraction(rng: random.Random, lo: int = -3, hi: int = 3, max_den: int = 4) -> Fraction:
    den = rng.randint(1, max_den)
    num = rng.randint(lo * den, hi * den)
    return Fraction(num, den)


def random_polynomial(
    rng: random.Random,
    w: StratifiedWeights,
    max_gdeg: int = 4,
    terms: int = 5,
) -> Polynomial:
    """Random exact polynomial with weighted degree at most max_gdeg."""
    acc = {}
    for _ in range(terms):
        beta = [0] * w.n
        budget = rng.randint(0, max_gdeg)
        while budget > 0:
            j = rng.randrange(w.n)
            d = w.weights[j]
            if d > budget:
                budget -= 1  # give up some budget so low-weight picks still land
                continue
            beta[j] += 1
            budget -= d
        c = random_fraction(rng)
        if c:
            acc[tuple(beta)] = acc.get(tuple(beta), Fraction(0)) + c
    return Polynomial(w.n, acc)


def random_skew_matrix(rng: random.Random, m1: int, lo: int = -3, hi: int = 3):
    mat = [[Fraction(0)] * m1 for _ in range(m1)]
    for a in range(m1):
        for b in range(a + 1, m1):
            v = random_fraction(rng, lo, hi)
            mat[a][b] = v
            mat[b][a] = -v
    return mat


def random_step2_group(rng: random.Random, m1: int, m2: int) -> CarnotGroup:
    """Random canonical step-2 group: m2 independent skew m1 x m1 matrices.

    Requires m2 <= m1*(m1-1)/2 and resamples until independence holds and the
    group is genuinely noncommutative.
    """
    assert m2 <= m1 * (m1 - 1) // 2
    while True:
        mats = [random_skew_matrix(rng, m1) for _ in range(m2)]
        flat = [[mat[a][b] for a in range(m1) for b in range(m1)] for mat in mats]
        if rank_exact(flat) != m2:
            continue
        if all(all(v == 0 for row in mat for v in row) for mat in mats):
            continue
        return make_step2(mats)


def random_bpq(rng: random.Random):
    b = Fraction(0)
    while b == 0:
        b = random_fraction(rng, -3, 3)
    while True:
        p = abs(random_fraction(rng, 0, 3))
        q = abs(random_fraction(rng, 0, 3))
        if p or q:
            return b, p, q
