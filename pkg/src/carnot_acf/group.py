"""Carnot group models: stratified weights plus polynomial-coefficient frames.

A group is described by its first-layer vector fields

    X_j = d/dx_j + sum_{k: weight(k) > 1} p_{j,k}(x) d/dx_k

where each p_{j,k} is weighted-homogeneous of degree weight(k) - 1.  Presets
cover Euclidean space, Heisenberg groups (canonical and polarized), arbitrary
step-2 groups in the skew-matrix normal form, and the Engel group.  Where a
group law is available it is stored as componentwise polynomial maps and all
group axioms are checkable as exact polynomial identities.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .errors import (
    BadDimension,
    DependentMatrices,
    DimensionMismatch,
    IndexOutOfRange,
    InputSyntaxError,
    MalformedCoefficients,
    NoGroupLaw,
    NotSkew,
    UnsupportedGroup,
)
from .linsolve import rank_exact
from .ratpoly import (
    Polynomial,
    StratifiedWeights,
    parse_poly,
    parse_poly_names,
    parse_rational,
)


@dataclass(frozen=True)
class VectorField:
    """First-layer field: identity action on x_{base_index} plus higher coefficients.

    ``coeffs`` maps a coordinate index k (1-based, weight > 1) to the
    polynomial p_{base_index,k}.
    """

    base_index: int
    coeffs: dict

    def coefficient(self, k: int, n: int) -> Polynomial:
        """Coefficient of d/dx_k, including the implicit 1 at the base index."""
        if k == self.base_index:
            return Polynomial.constant(n, 1)
        return self.coeffs.get(k, Polynomial.zero(n))


@dataclass(frozen=True)
class GroupLaw:
    """Componentwise product map (2n variables) and inverse map (n variables)."""

    product: tuple
    inverse: tuple


@dataclass(frozen=True)
class CarnotGroup:
    name: str
    weights: StratifiedWeights
    fields: tuple
    law: Optional[GroupLaw] = None
    step2_skew: Optional[tuple] = None

    @property
    def n(self) -> int:
        return self.weights.n

    @property
    def m1(self) -> int:
        return self.weights.m1

    @property
    def step(self) -> int:
        return self.weights.step

    def field(self, j: int) -> VectorField:
        if not 1 <= j <= self.m1:
            raise IndexOutOfRange(f"field index {j} outside 1..{self.m1}")
        return self.fields[j - 1]


@dataclass(frozen=True)
class Step2Alpha:
    """Table alpha[i][k][j]: coefficient of x_k d/dy_j inside X_i (all 1-based)."""

    m1: int
    m2: int
    entries: tuple  # entries[i-1][k-1][j-1]

    def get(self, i: int, k: int, j: int) -> Fraction:
        return self.entries[i - 1][k - 1][j - 1]

    def gap(self, i: int, s: int, j: int) -> Fraction:
        """Coefficient of d/dy_j in [X_i, X_s]."""
        return self.get(s, i, j) - self.get(i, s, j)


# -- presets ---------------------------------------------------------------


def make_euclidean(n: int) -> CarnotGroup:
    """Abelian R^n, n >= 3 (|x|^(2-n) needs n >= 3 to decay)."""
    if n < 3:
        raise BadDimension(f"euclidean preset needs n >= 3, got {n}")
    w = StratifiedWeights((n,))
    fields = tuple(VectorField(j, {}) for j in range(1, n + 1))
    v = [Polynomial.variable(2 * n, j) for j in range(1, 2 * n + 1)]
    product = tuple(v[j] + v[n + j] for j in range(n))
    inverse = tuple(-Polynomial.variable(n, j) for j in range(1, n + 1))
    return CarnotGroup(f"euclidean:{n}", w, fields, GroupLaw(product, inverse))


def make_step2(matrices: Sequence[Sequence[Sequence]], name: str = "") -> CarnotGroup:
    """Step-2 group in skew normal form.

    Fields X_i = d/dx_i + (1/2) sum_j (B^(j) x)_i d/dy_j; law adds
    (1/2) <B^(j) x, x'> to y_j; inverse is plain negation.  The matrices must
    be skew-symmetric and linearly independent (so the brackets span the
    whole second layer).
    """
    mats = tuple(
        tuple(tuple(Fraction(v) for v in row) for row in mat) for mat in matrices
    )
    if not mats:
        raise DependentMatrices("need at least one matrix")
    m1 = len(mats[0])
    for mat in mats:
        if len(mat) != m1 or any(len(row) != m1 for row in mat):
            raise DimensionMismatch("matrices must be square and equally sized")
        for a in range(m1):
            for b in range(m1):
                if mat[a][b] != -mat[b][a]:
                    raise NotSkew(f"matrix entry ({a + 1},{b + 1}) breaks skew-symmetry")
    m2 = len(mats)
    flat = [[mat[a][b] for a in range(m1) for b in range(m1)] for mat in mats]
    if rank_exact(flat) != m2:
        raise DependentMatrices("skew matrices are linearly dependent")

    w = StratifiedWeights((m1, m2))
    n = m1 + m2
    half = Fraction(1, 2)
    fields = []
    for i in range(1, m1 + 1):
        coeffs = {}
        for j in range(1, m2 + 1):
            poly = Polynomial.zero(n)
            for k in range(1, m1 + 1):
                if mats[j - 1][i - 1][k - 1]:
                    poly = poly + half * mats[j - 1][i - 1][k - 1] * Polynomial.variable(n, k)
            if not poly.is_zero():
                coeffs[m1 + j] = poly
        fields.append(VectorField(i, coeffs))

    v = [Polynomial.variable(2 * n, j) for j in range(1, 2 * n + 1)]
    product = [v[i] + v[n + i] for i in range(m1)]
    for j in range(m2):
        cross = Polynomial.zero(2 * n)
        for a in range(m1):
            for k in range(m1):
                if mats[j][a][k]:
                    cross = cross + half * mats[j][a][k] * v[k] * v[n + a]
        product.append(v[m1 + j] + v[n + m1 + j] + cross)
    inverse = tuple(-Polynomial.variable(n, j) for j in range(1, n + 1))
    return CarnotGroup(
        name or f"step2[{m1}+{m2}]", w, tuple(fields), GroupLaw(tuple(product), inverse),
        step2_skew=mats,
    )


def _heisenberg_matrix(n: int) -> list:
    b = [[Fraction(0)] * (2 * n) for _ in range(2 * n)]
    for i in range(n):
        b[i][n + i] = Fraction(-1)
        b[n + i][i] = Fraction(1)
    return b


def make_heisenberg(n: int, presentation: str = "canonical") -> CarnotGroup:
    """Heisenberg group H^n with strata (2n, 1).

    canonical: X_i = d/dx_i - (x_{n+i}/2) d/dy, X_{n+i} = d/dx_{n+i} + (x_i/2) d/dy.
    polarized (n = 1 only): X_1 = d/dx_1, X_2 = d/dx_2 + x_1 d/dy.
    """
    if n < 1:
        raise BadDimension(f"heisenberg preset needs n >= 1, got {n}")
    if presentation == "canonical":
        g = make_step2([_heisenberg_matrix(n)], name=f"heisenberg:{n}")
        return g
    if presentation == "polarized":
        if n > 1:
            raise UnsupportedGroup("polarized presentation is shipped for n = 1 only")
        w = StratifiedWeights((2, 1))
        x1 = Polynomial.variable(3, 1)
        fields = (VectorField(1, {}), VectorField(2, {3: x1}))
        v = [Polynomial.variable(6, j) for j in range(1, 7)]
        product = (v[0] + v[3], v[1] + v[4], v[2] + v[5] + v[0] * v[4])
        inverse = (
            -Polynomial.variable(3, 1),
            -Polynomial.variable(3, 2),
            -Polynomial.variable(3, 3) + Polynomial.variable(3, 1) * Polynomial.variable(3, 2),
        )
        return CarnotGroup("heisenberg:1:polarized", w, fields, GroupLaw(product, inverse))
    raise UnsupportedGroup(f"unknown Heisenberg presentation {presentation!r}")


def make_engel() -> CarnotGroup:
    """The step-3 Engel group on R^4 with strata (2, 1, 1)."""
    w = StratifiedWeights((2, 1, 1))
    x1 = Polynomial.variable(4, 1)
    half = Fraction(1, 2)
    fields = (
        VectorField(1, {}),
        VectorField(2, {3: x1, 4: half * x1 * x1}),
    )
    v = [Polynomial.variable(8, j) for j in range(1, 9)]
    product = (
        v[0] + v[4],
        v[1] + v[5],
        v[2] + v[6] + v[0] * v[5],
        v[3] + v[7] + v[0] * v[6] + half * v[0] * v[0] * v[5],
    )
    p = [Polynomial.variable(4, j) for j in range(1, 5)]
    # Unique two-sided inverse for the law above (solves P o P^{-1} = e exactly).
    inverse = (
        -p[0],
        -p[1],
        -p[2] + p[0] * p[1],
        -p[3] + p[0] * p[2] - half * p[0] * p[0] * p[1],
    )
    return CarnotGroup("engel", w, fields, GroupLaw(product, inverse))


def polarized_to_canonical_map() -> tuple:
    """Coordinate change carrying polarized H^1 onto the canonical presentation."""
    x1 = Polynomial.variable(3, 1)
    x2 = Polynomial.variable(3, 2)
    y = Polynomial.variable(3, 3)
    return (x1, x2, y - Fraction(1, 2) * x1 * x2)


def polarized_to_canonical(p: Polynomial) -> Polynomial:
    """Transport a function on polarized H^1 to canonical coordinates.

    The isomorphism phi(x1,x2,y) = (x1,x2,y - x1*x2/2) pushes functions
    forward via composition with its inverse, so u_can = u_pol(x1, x2, y + x1*x2/2).
    """
    x1 = Polynomial.variable(3, 1)
    x2 = Polynomial.variable(3, 2)
    y = Polynomial.variable(3, 3)
    return p.substitute([x1, x2, y + Fraction(1, 2) * x1 * x2])


# -- operations --------------------------------------------------------------


@dataclass(frozen=True)
class Derivation:
    """First-order operator sum_k coeffs[k] d/dx_k with polynomial coefficients."""

    n: int
    coeffs: dict  # coordinate index (1-based) -> Polynomial

    def apply(self, p: Polynomial) -> Polynomial:
        if p.n != self.n:
            raise DimensionMismatch("derivation and polynomial variable counts differ")
        total = Polynomial.zero(self.n)
        for k, c in self.coeffs.items():
            total = total + c * p.diff(k)
        return total

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs.values())


def field_as_derivation(g: CarnotGroup, j: int) -> Derivation:
    f = g.field(j)
    coeffs = {f.base_index: Polynomial.constant(g.n, 1)}
    for k, p in f.coeffs.items():
        coeffs[k] = p
    return Derivation(g.n, coeffs)


def bracket(a: Derivation, b: Derivation) -> Derivation:
    """[a, b] as a first-order derivation: a(b_k) - b(a_k) per coordinate."""
    if a.n != b.n:
        raise DimensionMismatch("derivations live in different spaces")
    keys = set(a.coeffs) | set(b.coeffs)
    out = {}
    for k in keys:
        ak = a.coeffs.get(k, Polynomial.zero(a.n))
        bk = b.coeffs.get(k, Polynomial.zero(a.n))
        c = a.apply(bk) - b.apply(ak)
        if not c.is_zero():
            out[k] = c
    return Derivation(a.n, out)


def commutator(g: CarnotGroup, i: int, l: int) -> Derivation:
    """[X_i, X_l] computed by applying each field to the other's coefficients."""
    return bracket(field_as_derivation(g, i), field_as_derivation(g, l))


def group_inverse_apply(g: CarnotGroup, p: Polynomial) -> Polynomial:
    """p composed with the group inverse map."""
    if g.law is None:
        raise NoGroupLaw(f"group {g.name!r} carries no law")
    return p.substitute(list(g.law.inverse))


def extract_alpha(g: CarnotGroup) -> Step2Alpha:
    """Read the second-layer coefficient table off the horizontal fields.

    Coefficients attached to coordinates of weight >= 3 are ignored: they
    never act on polynomials free of those variables.
    """
    w = g.weights
    m1, m2 = w.m1, (w.strata[1] if w.step >= 2 else 0)
    h1 = w.offsets[1]
    entries = [[[Fraction(0)] * m2 for _ in range(m1)] for _ in range(m1)]
    for i in range(1, m1 + 1):
        f = g.field(i)
        for k, poly in f.coeffs.items():
            if w.weight(k) != 2:
                continue
            j = k - h1
            for beta, c in poly.terms():
                nonzero = [idx for idx, e in enumerate(beta) if e]
                if (
                    len(nonzero) != 1
                    or beta[nonzero[0]] != 1
                    or w.weights[nonzero[0]] != 1
                ):
                    raise MalformedCoefficients(
                        f"X_{i} coefficient for coordinate {k} is not linear in the first layer"
                    )
                entries[i - 1][nonzero[0]][j - 1] = c
    return Step2Alpha(m1, m2, tuple(tuple(tuple(row) for row in plane) for plane in entries))


# -- validation ---------------------------------------------------------------


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def summary(self) -> str:
        lines = []
        for c in self.checks:
            mark = "pass" if c.passed else "FAIL"
            lines.append(f"[{mark}] {c.name}" + (f": {c.detail}" if c.detail else ""))
        return "\n".join(lines)


def _embed(p: Polynomial, total: int, offset: int) -> Polynomial:
    """View an n-variable polynomial inside a larger space, shifting variables."""
    images = [Polynomial.variable(total, offset + j) for j in range(1, p.n + 1)]
    return p.substitute(images)


def validate_group(g: CarnotGroup) -> ValidationReport:
    """Check every structural invariant; failures become report entries."""
    checks = []
    w = g.weights
    n = g.n

    ok = len(g.fields) == w.m1 and all(
        g.fields[j].base_index == j + 1 for j in range(len(g.fields))
    )
    checks.append(CheckResult("field count and base indexes", ok))

    for f in g.fields:
        for k, p in f.coeffs.items():
            dk = w.weight(k)
            if dk < 2:
                checks.append(
                    CheckResult(
                        f"X_{f.base_index} coefficient target weight", False,
                        f"coordinate {k} has weight 1",
                    )
                )
                continue
            homog = (not p.is_zero()) and p.is_g_homogeneous(w, dk - 1)
            detail = "" if homog else f"p_{f.base_index},{k} not homogeneous of degree {dk - 1}"
            checks.append(
                CheckResult(f"coefficient homogeneity X_{f.base_index} -> {k}", homog or p.is_zero(), detail)
            )
            uses_light_vars = all(
                all(e == 0 or w.weights[idx] < dk for idx, e in enumerate(beta))
                for beta, _ in p.terms()
            )
            checks.append(
                CheckResult(
                    f"coefficient variables X_{f.base_index} -> {k}", uses_light_vars,
                    "" if uses_light_vars else "uses variables of weight >= target",
                )
            )

    if g.step2_skew is not None:
        mats = g.step2_skew
        skew = all(
            mat[a][b] == -mat[b][a]
            for mat in mats
            for a in range(len(mat))
            for b in range(len(mat))
        )
        checks.append(CheckResult("skew-symmetry of step-2 matrices", skew))
        m1 = len(mats[0])
        flat = [[mat[a][b] for a in range(m1) for b in range(m1)] for mat in mats]
        checks.append(
            CheckResult("independence of step-2 matrices", rank_exact(flat) == len(mats))
        )

    if g.law is not None:
        law = g.law
        vars_n = [Polynomial.variable(n, j) for j in range(1, n + 1)]
        zeros = [Polynomial.zero(n)] * n
        right_id = all(
            law.product[j].substitute(vars_n + zeros) == vars_n[j] for j in range(n)
        )
        left_id = all(
            law.product[j].substitute(zeros + vars_n) == vars_n[j] for j in range(n)
        )
        checks.append(CheckResult("identity axiom", right_id and left_id))

        inv = list(law.inverse)
        right_inv = all(
            law.product[j].substitute(vars_n + inv).is_zero() for j in range(n)
        )
        left_inv = all(
            law.product[j].substitute(inv + vars_n).is_zero() for j in range(n)
        )
        checks.append(CheckResult("inverse axiom", right_inv and left_inv))

        a = [Polynomial.variable(3 * n, j) for j in range(1, n + 1)]
        b = [Polynomial.variable(3 * n, n + j) for j in range(1, n + 1)]
        c = [Polynomial.variable(3 * n, 2 * n + j) for j in range(1, n + 1)]
        ab = [_embed(law.product[j], 3 * n, 0) for j in range(n)]
        bc = [law.product[j].substitute(b + c) for j in range(n)]
        ab_c = [law.product[j].substitute(ab + c) for j in range(n)]
        a_bc = [law.product[j].substitute(a + bc) for j in range(n)]
        checks.append(CheckResult("associativity", ab_c == a_bc))

        lam_ok = True
        for lam in (Fraction(2), Fraction(3, 2), Fraction(-1)):
            scaled_args = [
                lam ** w.weights[j % n] * Polynomial.variable(2 * n, j + 1)
                for j in range(2 * n)
            ]
            for j in range(n):
                lhs = law.product[j].substitute(scaled_args)
                rhs = lam ** w.weights[j] * law.product[j]
                if lhs != rhs:
                    lam_ok = False
        checks.append(CheckResult("dilation compatibility of the law", lam_ok))

    return ValidationReport(tuple(checks))


# -- group definition files and preset references ----------------------------


def load_group(path: str) -> CarnotGroup:
    """Read a group from a JSON definition file (see README for the schema)."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputSyntaxError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise InputSyntaxError(f"{path}: top level must be an object")
    name = str(data.get("name", path))
    if "step2_skew" in data:
        mats = [
            [[parse_rational(str(v)) for v in row] for row in mat]
            for mat in data["step2_skew"]
        ]
        return make_step2(mats, name=name)
    if "strata" not in data or "fields" not in data:
        raise InputSyntaxError(f"{path}: need 'strata' plus 'fields' or 'step2_skew'")
    w = StratifiedWeights(tuple(int(m) for m in data["strata"]))
    fields = []
    for entry in data["fields"]:
        base = int(entry["base_index"])
        coeffs = {}
        for key, text in entry.get("coeffs", {}).items():
            coeffs[int(key)] = parse_poly(str(text), w)
        fields.append(VectorField(base, coeffs))
    law = None
    if "law" in data:
        spec = data["law"]
        if not isinstance(spec, dict) or "product" not in spec or "inverse" not in spec:
            raise InputSyntaxError(f"{path}: law needs 'product' and 'inverse' lists")
        product = tuple(_parse_product_component(str(s), w) for s in spec["product"])
        inverse = tuple(parse_poly(str(s), w) for s in spec["inverse"])
        if len(product) != w.n or len(inverse) != w.n:
            raise InputSyntaxError(f"{path}: law maps need one component per coordinate")
        law = GroupLaw(product, inverse)
    return CarnotGroup(name, w, tuple(fields), law)


def _parse_product_component(text: str, w: StratifiedWeights) -> Polynomial:
    """Parse one product-map component in 2n variables.

    Second-point coordinates use the first-point names suffixed with ``_2``
    (e.g. ``y + y_2 + x1*x2_2``).
    """
    base = w.name_table()
    table = dict(base)
    table.update({f"{name}_2": idx + w.n for name, idx in base.items()})
    return parse_poly_names(text, 2 * w.n, table)


def parse_group_ref(ref: str) -> CarnotGroup:
    """Resolve a preset name (euclidean:<n>, heisenberg:<n>[:polarized], engel) or a file path."""
    parts = ref.split(":")
    if parts[0] == "euclidean" and len(parts) == 2 and parts[1].isdigit():
        return make_euclidean(int(parts[1]))
    if parts[0] == "heisenberg" and len(parts) in (2, 3) and parts[1].isdigit():
        presentation = parts[2] if len(parts) == 3 else "canonical"
        return make_heisenberg(int(parts[1]), presentation)
    if ref == "engel":
        return make_engel()
    return load_group(ref)
