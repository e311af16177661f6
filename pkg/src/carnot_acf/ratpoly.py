"""Exact sparse multivariate polynomials over the rationals, with stratified weights.

A polynomial is a map from exponent tuples to nonzero ``Fraction`` coefficients,
so identity tests, differentiation and composition are exact.  Stratified
weights attach an integer weight to each variable (weight i for variables of
the i-th layer) and induce the weighted degree

    ||beta||_w = d_1*beta_1 + ... + d_n*beta_n

used everywhere downstream for anisotropic dilations and homogeneity tests.

Canonical form: no zero coefficients are stored, and term iteration is
graded-lexicographic (total degree first, then exponent tuple), descending,
so printed output and equality checks are deterministic.

Grammar for text input/output (whitespace-insensitive)::

    expr     := ['+'|'-'] term (('+'|'-') term)*
    term     := factor ('*' factor)*
    factor   := rational | var ('^' posint)? | '(' expr ')'
    rational := int ('/' posint)?

Variable names by layer: ``x1..x{m1}``, ``y1..y{m2}`` (``y`` alone allowed
when m2 = 1), ``t1..`` (``t`` when m3 = 1), and ``w{L}_{k}`` for layers L >= 4.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Mapping, Sequence, Union

from .errors import (
    DimensionMismatch,
    IndexOutOfRange,
    InputSyntaxError,
    PolySyntaxError,
    UnknownVariable,
    ZeroLambda,
    ZeroPolynomial,
)

Exponent = tuple  # tuple[int, ...], one entry per variable
Scalar = Union[int, Fraction]


@dataclass(frozen=True)
class StratifiedWeights:
    """Layer sizes (m1, ..., ms) and everything derived from them.

    Coordinate j has weight i exactly when h_{i-1} < j <= h_i, where
    h_i = m1 + ... + mi; the homogeneous dimension is Q = sum(i * mi).
    """

    strata: tuple

    # derived, filled in __post_init__
    n: int = field(init=False, repr=False)
    step: int = field(init=False, repr=False)
    weights: tuple = field(init=False, repr=False)
    offsets: tuple = field(init=False, repr=False)
    homogeneous_dimension: int = field(init=False, repr=False)

    def __post_init__(self):
        strata = tuple(int(m) for m in self.strata)
        if not strata or any(m < 1 for m in strata):
            raise DimensionMismatch(f"strata must be positive integers, got {self.strata}")
        object.__setattr__(self, "strata", strata)
        object.__setattr__(self, "n", sum(strata))
        object.__setattr__(self, "step", len(strata))
        weights = tuple(i + 1 for i, m in enumerate(strata) for _ in range(m))
        object.__setattr__(self, "weights", weights)
        offsets = (0,) + tuple(sum(strata[: i + 1]) for i in range(len(strata)))
        object.__setattr__(self, "offsets", offsets)
        object.__setattr__(
            self, "homogeneous_dimension", sum((i + 1) * m for i, m in enumerate(strata))
        )

    @property
    def m1(self) -> int:
        return self.strata[0]

    def weight(self, j: int) -> int:
        """Weight of coordinate j (1-based)."""
        if not 1 <= j <= self.n:
            raise IndexOutOfRange(f"coordinate index {j} outside 1..{self.n}")
        return self.weights[j - 1]

    def g_deg(self, beta: Exponent) -> int:
        """Weighted degree ||beta||_w of an exponent tuple."""
        return sum(d * b for d, b in zip(self.weights, beta))

    def var_names(self) -> tuple:
        """Canonical display name of each coordinate, in order."""
        names = []
        prefixes = {1: "x", 2: "y", 3: "t"}
        for layer, m in enumerate(self.strata, start=1):
            for k in range(1, m + 1):
                if layer >= 4:
                    names.append(f"w{layer}_{k}")
                elif layer >= 2 and m == 1:
                    names.append(prefixes[layer])
                else:
                    names.append(f"{prefixes[layer]}{k}")
        return tuple(names)

    def name_table(self) -> dict:
        """Accepted variable names -> 1-based coordinate index (includes aliases)."""
        table = {}
        prefixes = {1: "x", 2: "y", 3: "t"}
        j = 0
        for layer, m in enumerate(self.strata, start=1):
            for k in range(1, m + 1):
                j += 1
                if layer >= 4:
                    table[f"w{layer}_{k}"] = j
                else:
                    table[f"{prefixes[layer]}{k}"] = j
                    if layer >= 2 and m == 1:
                        table[prefixes[layer]] = j
        return table


def _as_fraction(value: Scalar) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    raise TypeError(f"expected int or Fraction coefficient, got {type(value).__name__}")


def _term_sort_key(beta: Exponent):
    return (sum(beta), beta)


class Polynomial:
    """Immutable exact polynomial in ``n`` variables."""

    __slots__ = ("n", "_terms")

    def __init__(self, n: int, terms: Mapping[Exponent, Scalar] = ()):
        if n < 0:
            raise DimensionMismatch(f"variable count must be >= 0, got {n}")
        clean = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for beta, coeff in items:
            beta = tuple(int(e) for e in beta)
            if len(beta) != n or any(e < 0 for e in beta):
                raise DimensionMismatch(f"bad exponent tuple {beta} for n={n}")
            c = _as_fraction(coeff)
            if c:
                clean[beta] = clean.get(beta, Fraction(0)) + c
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "_terms", {b: c for b, c in clean.items() if c})

    def __setattr__(self, *_):
        raise AttributeError("Polynomial is immutable")

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, n: int) -> "Polynomial":
        return cls(n)

    @classmethod
    def constant(cls, n: int, value: Scalar) -> "Polynomial":
        return cls(n, {(0,) * n: value})

    @classmethod
    def variable(cls, n: int, j: int) -> "Polynomial":
        """The coordinate polynomial x_j (1-based)."""
        if not 1 <= j <= n:
            raise IndexOutOfRange(f"variable index {j} outside 1..{n}")
        beta = [0] * n
        beta[j - 1] = 1
        return cls(n, {tuple(beta): 1})

    @classmethod
    def monomial(cls, n: int, beta: Exponent, coeff: Scalar = 1) -> "Polynomial":
        return cls(n, {tuple(beta): coeff})

    # -- inspection --------------------------------------------------------

    def is_zero(self) -> bool:
        return not self._terms

    def terms(self) -> Iterator:
        """Yield (beta, coefficient) in descending graded-lex order."""
        for beta in sorted(self._terms, key=_term_sort_key, reverse=True):
            yield beta, self._terms[beta]

    def coefficient(self, beta: Exponent) -> Fraction:
        return self._terms.get(tuple(beta), Fraction(0))

    def total_degree(self) -> int:
        if not self._terms:
            raise ZeroPolynomial("total degree of the zero polynomial is undefined")
        return max(sum(b) for b in self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.n == other.n and self._terms == other._terms

    __hash__ = None  # mutable-dict backed; not intended as a dict key

    def __repr__(self) -> str:
        inner = " + ".join(f"{c}*{b}" for b, c in self.terms()) or "0"
        return f"Polynomial({self.n}: {inner})"

    # -- ring operations ---------------------------------------------------

    def _check_same_space(self, other: "Polynomial"):
        if self.n != other.n:
            raise DimensionMismatch(
                f"polynomials live in different spaces ({self.n} vs {other.n} variables)"
            )

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(self.n, other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        self._check_same_space(other)
        out = dict(self._terms)
        for beta, c in other._terms.items():
            out[beta] = out.get(beta, Fraction(0)) + c
        return Polynomial(self.n, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.n, {b: -c for b, c in self._terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(self.n, other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            c = _as_fraction(other)
            return Polynomial(self.n, {b: c * v for b, v in self._terms.items()})
        if not isinstance(other, Polynomial):
            return NotImplemented
        self._check_same_space(other)
        out = {}
        for ba, ca in self._terms.items():
            for bb, cb in other._terms.items():
                key = tuple(ea + eb for ea, eb in zip(ba, bb))
                out[key] = out.get(key, Fraction(0)) + ca * cb
        return Polynomial(self.n, out)

    __rmul__ = __mul__

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError("polynomial powers must be nonnegative integers")
        result = Polynomial.constant(self.n, 1)
        base = self
        e = exponent
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    # -- calculus ----------------------------------------------------------

    def eval(self, point: Sequence[Scalar]) -> Fraction:
        """Exact evaluation at a rational point."""
        if len(point) != self.n:
            raise DimensionMismatch(f"point has {len(point)} entries, expected {self.n}")
        pt = [_as_fraction(v) for v in point]
        total = Fraction(0)
        for beta, c in self._terms.items():
            v = c
            for x, e in zip(pt, beta):
                if e:
                    v *= x**e
            total += v
        return total

    def diff(self, j: int) -> "Polynomial":
        """Exact partial derivative with respect to coordinate j (1-based)."""
        if not 1 <= j <= self.n:
            raise IndexOutOfRange(f"derivative index {j} outside 1..{self.n}")
        i = j - 1
        out = {}
        for beta, c in self._terms.items():
            e = beta[i]
            if e:
                nb = beta[:i] + (e - 1,) + beta[i + 1 :]
                out[nb] = out.get(nb, Fraction(0)) + c * e
        return Polynomial(self.n, out)

    def substitute(self, images: Sequence["Polynomial"]) -> "Polynomial":
        """Compose: replace coordinate j by images[j-1] (all in a common space)."""
        if len(images) != self.n:
            raise DimensionMismatch(f"{len(images)} images for {self.n} variables")
        if not images:
            return Polynomial(0, dict(self._terms))
        m = images[0].n
        for im in images:
            if im.n != m:
                raise DimensionMismatch("images live in different spaces")
        pow_cache = [{0: Polynomial.constant(m, 1)} for _ in range(self.n)]

        def power(j: int, e: int) -> Polynomial:
            cache = pow_cache[j]
            if e not in cache:
                cache[e] = power(j, e - 1) * images[j]
            return cache[e]

        total = Polynomial.zero(m)
        for beta, c in self._terms.items():
            term = Polynomial.constant(m, c)
            for j, e in enumerate(beta):
                if e:
                    term = term * power(j, e)
            total = total + term
        return total

    # -- stratified structure ----------------------------------------------

    def _check_weights(self, w: StratifiedWeights):
        if w.n != self.n:
            raise DimensionMismatch(
                f"weights are for {w.n} variables, polynomial has {self.n}"
            )

    def g_degree(self, w: StratifiedWeights) -> int:
        """Largest weighted degree among stored terms; undefined for zero."""
        self._check_weights(w)
        if not self._terms:
            raise ZeroPolynomial("weighted degree of the zero polynomial is undefined")
        return max(w.g_deg(beta) for beta in self._terms)

    def is_g_homogeneous(self, w: StratifiedWeights, m: int) -> bool:
        """True iff every stored term has weighted degree m (zero: true for all m)."""
        self._check_weights(w)
        return all(w.g_deg(beta) == m for beta in self._terms)

    def g_components(self, w: StratifiedWeights) -> dict:
        """Split into weighted-homogeneous components, keyed by degree."""
        self._check_weights(w)
        parts = {}
        for beta, c in self._terms.items():
            parts.setdefault(w.g_deg(beta), {})[beta] = c
        return {d: Polynomial(self.n, t) for d, t in sorted(parts.items())}

    def dilate(self, w: StratifiedWeights, lam: Scalar) -> "Polynomial":
        """Compose with the anisotropic dilation: scale each term by lam^||beta||_w."""
        self._check_weights(w)
        lam = _as_fraction(lam)
        if lam == 0:
            raise ZeroLambda("dilation parameter must be nonzero")
        return Polynomial(
            self.n, {b: c * lam ** w.g_deg(b) for b, c in self._terms.items()}
        )

    def max_degrees(self) -> tuple:
        """Componentwise maximum exponent over all terms."""
        out = [0] * self.n
        for beta in self._terms:
            for j, e in enumerate(beta):
                if e > out[j]:
                    out[j] = e
        return tuple(out)


# -- text format -------------------------------------------------------------

_TOKEN_RE = re.compile(r"\s*(?:(?P<int>\d+)|(?P<name>[A-Za-z][A-Za-z0-9_]*)|(?P<op>[-+*/^()]))")


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == m.start():
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            bad_at = len(text) - len(stripped)
            raise PolySyntaxError(f"unexpected character {text[bad_at]!r}", bad_at)
        if m.lastgroup == "int":
            tokens.append(("int", m.group("int"), m.start("int")))
        elif m.lastgroup == "name":
            tokens.append(("name", m.group("name"), m.start("name")))
        else:
            tokens.append(("op", m.group("op"), m.start("op")))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    """Recursive-descent parser for the polynomial grammar."""

    def __init__(self, text: str, n: int, names: dict):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0
        self.n = n
        self.names = names

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, op: str):
        kind, value, at = self.peek()
        if kind != "op" or value != op:
            raise PolySyntaxError(f"expected {op!r}", at)
        return self.advance()

    def parse(self) -> Polynomial:
        result = self.parse_expr()
        kind, value, at = self.peek()
        if kind != "end":
            raise PolySyntaxError(f"unexpected {value!r}", at)
        return result

    def parse_expr(self) -> Polynomial:
        sign = 1
        kind, value, _ = self.peek()
        if kind == "op" and value in "+-":
            self.advance()
            sign = -1 if value == "-" else 1
        total = self.parse_term() * sign
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "+-":
                self.advance()
                term = self.parse_term()
                total = total + term if value == "+" else total - term
            else:
                return total

    def parse_term(self) -> Polynomial:
        product = self.parse_factor()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value == "*":
                self.advance()
                product = product * self.parse_factor()
            else:
                return product

    def parse_factor(self) -> Polynomial:
        kind, value, at = self.peek()
        if kind == "int":
            self.advance()
            num = int(value)
            k2, v2, _ = self.peek()
            if k2 == "op" and v2 == "/":
                self.advance()
                k3, v3, at3 = self.peek()
                if k3 != "int":
                    raise PolySyntaxError("expected denominator", at3)
                self.advance()
                den = int(v3)
                if den == 0:
                    raise PolySyntaxError("zero denominator", at3)
                return Polynomial.constant(self.n, Fraction(num, den))
            return Polynomial.constant(self.n, num)
        if kind == "name":
            self.advance()
            if value not in self.names:
                raise UnknownVariable(value, at)
            var = Polynomial.variable(self.n, self.names[value])
            k2, v2, _ = self.peek()
            if k2 == "op" and v2 == "^":
                self.advance()
                k3, v3, at3 = self.peek()
                if k3 != "int" or int(v3) < 1:
                    raise PolySyntaxError("expected positive integer exponent", at3)
                self.advance()
                return var ** int(v3)
            return var
        if kind == "op" and value == "(":
            self.advance()
            inner = self.parse_expr()
            self.expect_op(")")
            return inner
        raise PolySyntaxError("expected rational, variable or '('", at)


def parse_poly(text: str, w: StratifiedWeights) -> Polynomial:
    """Parse ``text`` against the grammar, naming variables per ``w``."""
    return _Parser(text, w.n, w.name_table()).parse()


def parse_poly_names(text: str, n: int, names: dict) -> Polynomial:
    """Parse with an explicit variable-name table (name -> 1-based index)."""
    return _Parser(text, n, names).parse()


def format_poly(p: Polynomial, w: StratifiedWeights) -> str:
    """Canonical text form; ``parse_poly(format_poly(p, w), w) == p``."""
    p._check_weights(w)
    if p.is_zero():
        return "0"
    names = w.var_names()
    pieces = []
    for beta, coeff in p.terms():
        factors = []
        for name, e in zip(names, beta):
            if e == 1:
                factors.append(name)
            elif e > 1:
                factors.append(f"{name}^{e}")
        mag = abs(coeff)
        if factors:
            body = "*".join(factors) if mag == 1 else f"{mag}*" + "*".join(factors)
        else:
            body = str(mag)
        pieces.append((coeff < 0, body))
    first_neg, first_body = pieces[0]
    out = ("-" if first_neg else "") + first_body
    for neg, body in pieces[1:]:
        out += (" - " if neg else " + ") + body
    return out


def parse_rational(text: str) -> Fraction:
    """Strict rational literal: optional sign, integer, optional '/denominator'."""
    body = text.strip()
    if not re.fullmatch(r"[+-]?\d+(/[1-9]\d*)?", body):
        raise InputSyntaxError(f"not a rational literal: {text!r}")
    return Fraction(body)


# spec-facing thin wrappers -----------------------------------------------------


def poly_arith(a: Polynomial, b: Polynomial, kind: str) -> Polynomial:
    """Exact +, -, * on polynomials in the same variable space."""
    if kind == "add":
        return a + b
    if kind == "sub":
        return a - b
    if kind == "mul":
        return a * b
    raise ValueError(f"unknown arithmetic kind {kind!r}")


def poly_eval(p: Polynomial, point: Sequence[Scalar]) -> Fraction:
    return p.eval(point)


def partial_derivative(p: Polynomial, j: int) -> Polynomial:
    return p.diff(j)


def substitute(p: Polynomial, images: Sequence[Polynomial]) -> Polynomial:
    return p.substitute(images)


def g_degree(p: Polynomial, w: StratifiedWeights) -> int:
    return p.g_degree(w)


def is_g_homogeneous(p: Polynomial, w: StratifiedWeights, m: int) -> bool:
    return p.is_g_homogeneous(w, m)


def dilate(p: Polynomial, w: StratifiedWeights, lam: Scalar) -> Polynomial:
    return p.dilate(w, lam)
