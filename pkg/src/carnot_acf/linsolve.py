"""Exact rational linear algebra: pivoted elimination over Fraction matrices."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .errors import DimensionMismatch, SingularSystem

Matrix = list  # list[list[Fraction]]


def _to_matrix(rows: Sequence[Sequence]) -> Matrix:
    out = [[Fraction(v) for v in row] for row in rows]
    if out and any(len(r) != len(out[0]) for r in out):
        raise DimensionMismatch("ragged matrix")
    return out


def det_exact(rows: Sequence[Sequence]) -> Fraction:
    """Determinant by exact Gaussian elimination with first-nonzero pivoting."""
    a = _to_matrix(rows)
    n = len(a)
    if any(len(r) != n for r in a):
        raise DimensionMismatch("determinant needs a square matrix")
    det = Fraction(1)
    for col in range(n):
        pivot_row = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot_row is None:
            return Fraction(0)
        if pivot_row != col:
            a[col], a[pivot_row] = a[pivot_row], a[col]
            det = -det
        pivot = a[col][col]
        det *= pivot
        for r in range(col + 1, n):
            if a[r][col] == 0:
                continue
            factor = a[r][col] / pivot
            for c in range(col, n):
                a[r][c] -= factor * a[col][c]
    return det


def solve_exact(rows: Sequence[Sequence], rhs: Sequence) -> list:
    """Unique exact solution of a square system; SingularSystem if det = 0."""
    a = _to_matrix(rows)
    n = len(a)
    if any(len(r) != n for r in a) or len(rhs) != n:
        raise DimensionMismatch("solve needs a square matrix and matching rhs")
    b = [Fraction(v) for v in rhs]
    for col in range(n):
        pivot_row = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot_row is None:
            raise SingularSystem("coefficient matrix is singular")
        if pivot_row != col:
            a[col], a[pivot_row] = a[pivot_row], a[col]
            b[col], b[pivot_row] = b[pivot_row], b[col]
        pivot = a[col][col]
        for r in range(col + 1, n):
            if a[r][col] == 0:
                continue
            factor = a[r][col] / pivot
            for c in range(col, n):
                a[r][c] -= factor * a[col][c]
            b[r] -= factor * b[col]
    x = [Fraction(0)] * n
    for r in range(n - 1, -1, -1):
        acc = b[r] - sum((a[r][c] * x[c] for c in range(r + 1, n)), Fraction(0))
        x[r] = acc / a[r][r]
    return x


def rank_exact(rows: Sequence[Sequence]) -> int:
    """Rank of an arbitrary rational matrix."""
    a = _to_matrix(rows)
    if not a:
        return 0
    n_rows, n_cols = len(a), len(a[0])
    rank = 0
    for col in range(n_cols):
        pivot_row = next((r for r in range(rank, n_rows) if a[r][col] != 0), None)
        if pivot_row is None:
            continue
        a[rank], a[pivot_row] = a[pivot_row], a[rank]
        pivot = a[rank][col]
        for r in range(rank + 1, n_rows):
            if a[r][col] == 0:
                continue
            factor = a[r][col] / pivot
            for c in range(col, n_cols):
                a[r][c] -= factor * a[rank][c]
        rank += 1
        if rank == n_rows:
            break
    return rank
