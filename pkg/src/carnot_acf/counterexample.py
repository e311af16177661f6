"""Construction of degree-1/degree-3 harmonic pairs with positive gradient coupling.

Pipeline: pick the first noncommuting pair of horizontal fields, set up the
cubic ansatz whose unknowns are five rational coefficients, impose
harmonicity and the prescribed shape of the gradient inner product as a 5x5
rational linear system, solve it exactly, and re-verify the result
symbolically before returning it.  A result whose certificate fails is never
returned silently.

The system rows are always generated by symbolic differentiation of the
ansatz basis; no closed-form row is ever transcribed.  The closed-form
coefficient formulas kept here serve purely as an independent cross-check of
the exact solver.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .errors import (
    CertificateFailure,
    InputSyntaxError,
    InvalidParams,
    NoGroupLaw,
    NoNoncommutingPair,
    SingularSystem,
    ZeroB,
)
from .group import CarnotGroup, Step2Alpha, VectorField, extract_alpha, group_inverse_apply
from .hcalc import horizontal_gradient, horizontal_inner, sublaplacian
from .linsolve import solve_exact
from .ratpoly import Polynomial, StratifiedWeights, format_poly, parse_poly, parse_rational

Scalar = Union[int, Fraction]


@dataclass(frozen=True)
class PairChoice:
    """Noncommuting pair (i, s) witnessed on second-layer coordinate j (all 1-based)."""

    i: int
    s: int
    j: int
    alpha_gap: Fraction


@dataclass(frozen=True)
class AnsatzTemplate:
    """P1 plus the five basis polynomials g_1..g_5 with P3 = sum c_k g_k."""

    p1: Polynomial
    basis: tuple
    pair: PairChoice
    b: Fraction


@dataclass(frozen=True)
class Certificate:
    harmonic: bool
    inner_product: Polynomial
    inner_matches_pq: bool


@dataclass(frozen=True)
class CounterexampleResult:
    group_name: str
    b: Fraction
    p: Fraction
    q: Fraction
    pair: PairChoice
    coefficients: tuple  # (c1, ..., c5)
    p1: Polynomial
    p3: Polynomial
    u: Polynomial
    system_matrix: tuple  # 5x5 Fractions
    rhs: tuple
    certificate: Certificate


def select_pair(g: CarnotGroup) -> PairChoice:
    """Lexicographically first (i, s, j) with a nonzero bracket coefficient."""
    if g.weights.step < 2:
        raise NoNoncommutingPair(f"group {g.name!r} is abelian (step 1)")
    alpha = extract_alpha(g)
    for i in range(1, alpha.m1 + 1):
        for s in range(1, alpha.m1 + 1):
            for j in range(1, alpha.m2 + 1):
                gap = alpha.gap(i, s, j)
                if gap != 0:
                    return PairChoice(i, s, j, gap)
    raise NoNoncommutingPair(
        f"group {g.name!r} has no noncommuting horizontal pair in the second layer"
    )


def build_ansatz(g: CarnotGroup, pair: PairChoice, b: Scalar) -> AnsatzTemplate:
    """P1 = b*x_s and the cubic template in x_i, x_s, y_j.

    The fifth basis polynomial carries the correction terms that keep the
    sub-Laplacian of the template inside span{x_i, x_s} and the inner product
    free of x_i*x_other terms for every second-layer coefficient table:

        g5 = x_i*y_j - sum_{l not in {i,s}} (alpha[i][l][j]*x_i^2*x_l
                                             + alpha[s][l][j]*x_i*x_s*x_l)
    """
    b = Fraction(b)
    if b == 0:
        raise ZeroB("ansatz needs b != 0")
    w = g.weights
    n = g.n
    alpha = extract_alpha(g)
    i, s, j = pair.i, pair.s, pair.j
    xi = Polynomial.variable(n, i)
    xs = Polynomial.variable(n, s)
    yj = Polynomial.variable(n, w.offsets[1] + j)
    correction = Polynomial.zero(n)
    for l in range(1, g.m1 + 1):
        if l in (i, s):
            continue
        xl = Polynomial.variable(n, l)
        a_il = alpha.get(i, l, j)
        a_sl = alpha.get(s, l, j)
        if a_il:
            correction = correction + a_il * xi * xi * xl
        if a_sl:
            correction = correction + a_sl * xi * xs * xl
    basis = (
        xi * xi * xi,
        xi * xi * xs,
        xi * xs * xs,
        xs * xs * xs,
        xi * yj - correction,
    )
    return AnsatzTemplate(b * xs, basis, pair, b)


def assemble_system(g: CarnotGroup, template: AnsatzTemplate, p: Scalar, q: Scalar):
    """Rows from symbolic sub-Laplacians and inner products of the basis.

    Row 1/2: coefficients of x_i and x_s in Delta(g_k), set to zero.
    Row 3: coefficient of x_i*x_s in <grad P1, grad g_k>, set to zero.
    Row 4/5: coefficients of x_i^2 and x_s^2, set to p and q.
    """
    n = g.n
    pair = template.pair
    i, s = pair.i, pair.s
    e_i = [0] * n
    e_i[i - 1] = 1
    e_s = [0] * n
    e_s[s - 1] = 1
    mono_xi = tuple(e_i)
    mono_xs = tuple(e_s)
    mono_xi2 = tuple(2 * e for e in e_i)
    mono_xs2 = tuple(2 * e for e in e_s)
    mono_xixs = tuple(a + b for a, b in zip(e_i, e_s))

    grad_p1 = horizontal_gradient(g, template.p1)
    rows = [[Fraction(0)] * 5 for _ in range(5)]
    for k, basis_poly in enumerate(template.basis):
        lap = sublaplacian(g, basis_poly)
        rows[0][k] = lap.coefficient(mono_xi)
        rows[1][k] = lap.coefficient(mono_xs)
        inner = horizontal_inner(grad_p1, horizontal_gradient(g, basis_poly))
        rows[2][k] = inner.coefficient(mono_xixs)
        rows[3][k] = inner.coefficient(mono_xi2)
        rows[4][k] = inner.coefficient(mono_xs2)
    rhs = (Fraction(0), Fraction(0), Fraction(0), Fraction(p), Fraction(q))
    return tuple(tuple(r) for r in rows), rhs


def det_closed_form(b: Scalar, alpha_gap: Scalar) -> Fraction:
    """Determinant of the assembled system: -72 b^3 (alpha_1^2 - alpha_2^1)."""
    return Fraction(-72) * Fraction(b) ** 3 * Fraction(alpha_gap)


def closed_form_coefficients(
    alpha: Step2Alpha, pair: PairChoice, b: Scalar, p: Scalar, q: Scalar
) -> tuple:
    """Closed-form solution for canonical skew tables; solver cross-check only.

    Valid whenever the off-pair diagonal entries alpha[l][l][j] (l outside the
    pair) vanish, which holds for every skew presentation.
    """
    b, p, q = Fraction(b), Fraction(p), Fraction(q)
    i, s, j = pair.i, pair.s, pair.j
    a11 = alpha.get(i, i, j)
    a21 = alpha.get(i, s, j)
    a12 = alpha.get(s, i, j)
    a22 = alpha.get(s, s, j)
    gap = a12 - a21
    if gap == 0:
        raise SingularSystem("alpha gap vanishes; no closed-form solution")
    return (
        a11 * (p + q) / (2 * b * (a21 - a12)),
        (a12 * q + a21 * p) / (b * (a21 - a12)),
        a22 * (p + q) / (2 * b * (a21 - a12)),
        q / (3 * b),
        (p + q) / (b * gap),
    )


def construct(g: CarnotGroup, b: Scalar, p: Scalar, q: Scalar) -> CounterexampleResult:
    """Full pipeline with exact re-verification of the result.

    Raises InvalidParams unless b != 0, p >= 0, q >= 0 and (p, q) != (0, 0);
    propagates NoNoncommutingPair / SingularSystem; raises CertificateFailure
    (carrying the residual) if the solved candidate fails either exact check.
    """
    b, p, q = Fraction(b), Fraction(p), Fraction(q)
    if b == 0:
        raise InvalidParams("b must be nonzero")
    if p < 0 or q < 0 or (p == 0 and q == 0):
        raise InvalidParams("(p, q) must lie in the closed quadrant minus the origin")
    pair = select_pair(g)
    template = build_ansatz(g, pair, b)
    matrix, rhs = assemble_system(g, template, p, q)
    coeffs = tuple(solve_exact([list(r) for r in matrix], list(rhs)))
    p3 = Polynomial.zero(g.n)
    for c, basis_poly in zip(coeffs, template.basis):
        p3 = p3 + c * basis_poly
    u = template.p1 - p3
    residual = sublaplacian(g, u)
    harmonic = residual.is_zero()
    inner = horizontal_inner(
        horizontal_gradient(g, template.p1), horizontal_gradient(g, p3)
    )
    xi2 = Polynomial.variable(g.n, pair.i) ** 2
    xs2 = Polynomial.variable(g.n, pair.s) ** 2
    expected = p * xi2 + q * xs2
    inner_ok = inner == expected
    if not harmonic:
        raise CertificateFailure(
            "candidate is not harmonic; sub-Laplacian residual is nonzero",
            residual=residual,
        )
    if not inner_ok:
        raise CertificateFailure(
            "gradient inner product differs from p*x_i^2 + q*x_s^2",
            residual=inner - expected,
        )
    return CounterexampleResult(
        group_name=g.name,
        b=b,
        p=p,
        q=q,
        pair=pair,
        coefficients=coeffs,
        p1=template.p1,
        p3=p3,
        u=u,
        system_matrix=matrix,
        rhs=rhs,
        certificate=Certificate(harmonic, inner, inner_ok),
    )


def s_reflect(g: CarnotGroup, p: Polynomial) -> Polynomial:
    """Flip the sign of every first-layer variable, fixing the others."""
    images = []
    for j in range(1, g.n + 1):
        v = Polynomial.variable(g.n, j)
        images.append(-v if g.weights.weight(j) == 1 else v)
    return p.substitute(images)


def intrinsic_odd_check(g: CarnotGroup, p: Polynomial) -> bool:
    """True iff p composed with the group inverse equals -p exactly."""
    if g.law is None:
        raise NoGroupLaw(f"group {g.name!r} carries no law")
    return group_inverse_apply(g, p) == -p


def synthetic_alpha_group(
    a11: Scalar, a21: Scalar, a12: Scalar, a22: Scalar
) -> CarnotGroup:
    """Two-field step-2 group with a prescribed (possibly non-skew) alpha table.

    X_1 = d/dx_1 + (a11 x_1 + a21 x_2) d/dy, X_2 = d/dx_2 + (a12 x_1 + a22 x_2) d/dy.
    Used to probe the assembled system for arbitrary coefficient tables.
    """
    w = StratifiedWeights((2, 1))
    n = 3
    x1 = Polynomial.variable(n, 1)
    x2 = Polynomial.variable(n, 2)
    c1 = Fraction(a11) * x1 + Fraction(a21) * x2
    c2 = Fraction(a12) * x1 + Fraction(a22) * x2
    fields = (
        VectorField(1, {} if c1.is_zero() else {3: c1}),
        VectorField(2, {} if c2.is_zero() else {3: c2}),
    )
    return CarnotGroup("synthetic-step2", w, fields)


# -- certificate text format ---------------------------------------------------

_CERT_KEYS = (
    "group", "b", "p", "q", "pair_i", "pair_s", "pair_j", "alpha_gap",
    "c1", "c2", "c3", "c4", "c5", "P1", "P3", "u",
    "harmonic", "inner_product", "inner_matches_pq",
)


def certificate_to_text(result: CounterexampleResult, w: StratifiedWeights) -> str:
    """Stable key = value serialization of a verified construction."""
    c = result.coefficients
    values = {
        "group": result.group_name,
        "b": str(result.b),
        "p": str(result.p),
        "q": str(result.q),
        "pair_i": str(result.pair.i),
        "pair_s": str(result.pair.s),
        "pair_j": str(result.pair.j),
        "alpha_gap": str(result.pair.alpha_gap),
        "c1": str(c[0]),
        "c2": str(c[1]),
        "c3": str(c[2]),
        "c4": str(c[3]),
        "c5": str(c[4]),
        "P1": format_poly(result.p1, w),
        "P3": format_poly(result.p3, w),
        "u": format_poly(result.u, w),
        "harmonic": "true" if result.certificate.harmonic else "false",
        "inner_product": format_poly(result.certificate.inner_product, w),
        "inner_matches_pq": "true" if result.certificate.inner_matches_pq else "false",
    }
    return "\n".join(f"{k} = {values[k]}" for k in _CERT_KEYS) + "\n"


def certificate_from_text(text: str, w: StratifiedWeights) -> dict:
    """Parse a certificate back into typed values (rationals and polynomials)."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise InputSyntaxError(f"certificate line {lineno} is not 'key = value'")
        key, _, value = line.partition("=")
        raw[key.strip()] = value.strip()
    missing = [k for k in _CERT_KEYS if k not in raw]
    if missing:
        raise InputSyntaxError(f"certificate is missing keys: {', '.join(missing)}")
    out = dict(raw)
    for k in ("b", "p", "q", "alpha_gap", "c1", "c2", "c3", "c4", "c5"):
        out[k] = parse_rational(raw[k])
    for k in ("pair_i", "pair_s", "pair_j"):
        out[k] = int(raw[k])
    for k in ("P1", "P3", "u", "inner_product"):
        out[k] = parse_poly(raw[k], w)
    for k in ("harmonic", "inner_matches_pq"):
        out[k] = raw[k] == "true"
    return out
