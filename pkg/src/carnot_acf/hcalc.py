"""Horizontal calculus: field application, gradient, divergence, sub-Laplacian.

Everything here is exact; harmonicity means the sub-Laplacian vanishes as a
polynomial identity, never up to numerical tolerance.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence, Union

from .errors import DimensionMismatch, IndexOutOfRange, ZeroLambda
from .group import CarnotGroup
from .ratpoly import Polynomial

HorizontalSection = tuple  # tuple[Polynomial, ...], one component per X_1..X_m1


def apply_field(g: CarnotGroup, j: int, p: Polynomial) -> Polynomial:
    """X_j p = d_j p + sum_k p_{j,k} d_k p, exact."""
    if not 1 <= j <= g.m1:
        raise IndexOutOfRange(f"field index {j} outside 1..{g.m1}")
    if p.n != g.n:
        raise DimensionMismatch(f"polynomial has {p.n} variables, group has {g.n}")
    f = g.field(j)
    out = p.diff(f.base_index)
    for k, coeff in f.coeffs.items():
        dk = p.diff(k)
        if not dk.is_zero():
            out = out + coeff * dk
    return out


def horizontal_gradient(g: CarnotGroup, p: Polynomial) -> HorizontalSection:
    return tuple(apply_field(g, j, p) for j in range(1, g.m1 + 1))


def horizontal_divergence(g: CarnotGroup, phi: Sequence[Polynomial]) -> Polynomial:
    if len(phi) != g.m1:
        raise DimensionMismatch(f"section has {len(phi)} components, expected {g.m1}")
    total = Polynomial.zero(g.n)
    for j, component in enumerate(phi, start=1):
        total = total + apply_field(g, j, component)
    return total


def sublaplacian(g: CarnotGroup, p: Polynomial) -> Polynomial:
    """Sum of squared horizontal fields applied to p."""
    total = Polynomial.zero(g.n)
    for j in range(1, g.m1 + 1):
        total = total + apply_field(g, j, apply_field(g, j, p))
    return total


def is_harmonic(g: CarnotGroup, p: Polynomial):
    """Return (True, None) when the sub-Laplacian vanishes, else (False, residual)."""
    residual = sublaplacian(g, p)
    if residual.is_zero():
        return True, None
    return False, residual


def horizontal_inner(a: Sequence[Polynomial], b: Sequence[Polynomial]) -> Polynomial:
    if len(a) != len(b):
        raise DimensionMismatch("sections have different component counts")
    if not a:
        raise DimensionMismatch("empty horizontal section")
    total = Polynomial.zero(a[0].n)
    for pa, pb in zip(a, b):
        total = total + pa * pb
    return total


def check_G1(g: CarnotGroup, p: Polynomial, lam: Union[int, Fraction]) -> bool:
    """Gradient/dilation compatibility: grad(p o dil_lam) = lam * (grad p) o dil_lam."""
    lam = Fraction(lam)
    if lam == 0:
        raise ZeroLambda("dilation parameter must be nonzero")
    w = g.weights
    scaled = p.dilate(w, lam)
    lhs = horizontal_gradient(g, scaled)
    rhs = tuple(lam * comp.dilate(w, lam) for comp in horizontal_gradient(g, p))
    return lhs == rhs
