"""Small exact linear algebra over expressions."""

from __future__ import annotations

from itertools import combinations
from typing import Sequence

from .core import ONE, Expr, add, mul, power
from .numeric import Assumption, ZeroTest, is_zero


def determinant(rows: Sequence[Sequence[Expr]]) -> Expr:
    """Laplace expansion along the first row; fine for the small sizes used."""
    n = len(rows)
    if n == 0:
        return ONE
    if n == 1:
        return rows[0][0]
    terms = []
    for j in range(n):
        entry = rows[0][j]
        if entry.is_zero_constant():
            continue
        minor = [list(r[:j]) + list(r[j + 1:]) for r in rows[1:]]
        sign = -1 if j % 2 else 1
        terms.append(mul(sign, entry, determinant(minor)))
    return add(*terms)


def principal_minor(matrix, indices) -> list:
    return [[matrix[i][j] for j in indices] for i in indices]


class SingularMatrixError(ArithmeticError):
    pass


def solve(matrix, rhs, assumptions: Sequence[Assumption] = ()) -> list:
    """Gauss-Jordan solve of ``matrix @ x = rhs`` with exact pivots.

    A pivot must test provably nonzero under ``assumptions``.
    """
    n = len(matrix)
    a = [list(row) + [rhs[i]] for i, row in enumerate(matrix)]
    for col in range(n):
        pivot = None
        for r in range(col, n):
            if a[r][col].is_zero_constant():
                continue
            if a[r][col].is_constant() or is_zero(a[r][col], assumptions) is ZeroTest.NONZERO:
                pivot = r
                break
        if pivot is None:
            raise SingularMatrixError(f"no usable pivot in column {col}")
        a[col], a[pivot] = a[pivot], a[col]
        inv = power(a[col][col], -1)
        a[col] = [mul(x, inv) for x in a[col]]
        for r in range(n):
            if r == col or a[r][col].is_zero_constant():
                continue
            f = a[r][col]
            a[r] = [add(x, mul(-1, f, y)) for x, y in zip(a[r], a[col])]
    return [a[i][n] for i in range(n)]


def subsets_by_size(n: int):
    """Index subsets in decreasing size, lexicographic within a size."""
    for k in range(n, -1, -1):
        yield from combinations(range(n), k)
