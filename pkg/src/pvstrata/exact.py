"""Exact rational linear algebra over ``fractions.Fraction``.

Vectors are tuples of Fraction and matrices are tuples of row tuples, so
every value is immutable and safe to share.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

Rational = Fraction
QVector = tuple
QMatrix = tuple


class ShapeError(ValueError):
    """Raised when matrix or vector shapes do not fit an operation."""


class InconsistentSystemError(ValueError):
    """Raised by :func:`solve_linear` when ``a x = b`` has no solution."""


class NotAlternatingError(ValueError):
    """Raised by :func:`pfaffian` on input that is not an even alternating matrix."""


def q(value) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise TypeError("floats are not accepted in exact arithmetic")
    return Fraction(value)


def vector(entries: Iterable) -> QVector:
    return tuple(q(e) for e in entries)


def matrix(rows: Iterable[Iterable]) -> QMatrix:
    out = tuple(tuple(q(e) for e in row) for row in rows)
    if out and len({len(r) for r in out}) != 1:
        raise ShapeError("rows of unequal length")
    return out


def shape(m: QMatrix) -> tuple[int, int]:
    return (len(m), len(m[0]) if m else 0)


def zeros(rows: int, cols: int) -> QMatrix:
    return tuple(tuple(Fraction(0) for _ in range(cols)) for _ in range(rows))


def identity(n: int) -> QMatrix:
    return tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))


def transpose(m: QMatrix) -> QMatrix:
    return tuple(zip(*m)) if m else ()


def matmul(a: QMatrix, b: QMatrix) -> QMatrix:
    if shape(a)[1] != shape(b)[0]:
        raise ShapeError(f"cannot multiply {shape(a)} by {shape(b)}")
    bt = transpose(b)
    return tuple(tuple(sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in bt) for row in a)


def matvec(a: QMatrix, v: Sequence) -> QVector:
    if shape(a)[1] != len(v):
        raise ShapeError(f"cannot apply {shape(a)} to a vector of length {len(v)}")
    return tuple(sum((x * y for x, y in zip(row, v)), Fraction(0)) for row in a)


def dot(a: Sequence, b: Sequence) -> Fraction:
    if len(a) != len(b):
        raise ShapeError(f"length mismatch {len(a)} vs {len(b)}")
    return sum((q(x) * q(y) for x, y in zip(a, b)), Fraction(0))


def rref(m: QMatrix) -> tuple[QMatrix, tuple[int, ...]]:
    """Reduced row echelon form and the pivot column indices."""
    rows = [list(r) for r in matrix(m)]
    nrows, ncols = shape(m)
    pivots = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        p = next((i for i in range(r, nrows) if rows[i][c] != 0), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        lead = rows[r][c]
        rows[r] = [x / lead for x in rows[r]]
        for i in range(nrows):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    return tuple(tuple(r_) for r_ in rows), tuple(pivots)


def rank(m: QMatrix) -> int:
    return len(rref(m)[1])


def nullspace(m: QMatrix) -> tuple[QVector, ...]:
    """Basis of ``{x : m x = 0}``, one vector per free column."""
    red, pivots = rref(m)
    ncols = shape(m)[1]
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, pc in zip(red, pivots):
            v[pc] = -row[f]
        basis.append(tuple(v))
    return tuple(basis)


@dataclass(frozen=True)
class LinearSolution:
    """Solution set ``particular + span(nullspace)`` of a consistent system."""

    particular: QVector
    nullspace: tuple[QVector, ...]

    @property
    def unique(self) -> bool:
        return not self.nullspace


def solve_linear(a: QMatrix, b: Sequence) -> LinearSolution:
    """Solve ``a x = b`` exactly.

    Raises InconsistentSystemError when no solution exists.
    """
    a = matrix(a)
    b = vector(b)
    nrows, ncols = shape(a)
    if nrows != len(b):
        raise ShapeError(f"{nrows} rows but right-hand side of length {len(b)}")
    red, pivots = rref(tuple(row + (rhs,) for row, rhs in zip(a, b)))
    if ncols in pivots:
        raise InconsistentSystemError("system has no solution")
    x = [Fraction(0)] * ncols
    for row, pc in zip(red, pivots):
        x[pc] = row[ncols]
    return LinearSolution(tuple(x), nullspace(a))


def det(m: QMatrix) -> Fraction:
    """Determinant by Bareiss fraction-free elimination."""
    m = matrix(m)
    n, c = shape(m)
    if n != c:
        raise ShapeError(f"determinant of non-square {shape(m)} matrix")
    if n == 0:
        return Fraction(1)
    den = math.lcm(*(x.denominator for row in m for x in row))
    work = [[int(x * den) for x in row] for row in m]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if work[k][k] == 0:
            p = next((i for i in range(k + 1, n) if work[i][k] != 0), None)
            if p is None:
                return Fraction(0)
            work[k], work[p] = work[p], work[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                work[i][j] = (work[i][j] * work[k][k] - work[i][k] * work[k][j]) // prev
        prev = work[k][k]
    return Fraction(sign * work[n - 1][n - 1], den**n)


def inverse(m: QMatrix) -> QMatrix:
    n, c = shape(m)
    if n != c:
        raise ShapeError("inverse of non-square matrix")
    aug = tuple(tuple(row) + identity(n)[i] for i, row in enumerate(matrix(m)))
    red, pivots = rref(aug)
    if tuple(pivots[:n]) != tuple(range(n)):
        raise ZeroDivisionError("matrix is singular")
    return tuple(row[n:] for row in red)


def is_alternating(m: QMatrix) -> bool:
    n, c = shape(m)
    if n != c:
        return False
    return all(m[i][i] == 0 for i in range(n)) and all(
        m[i][j] == -m[j][i] for i in range(n) for j in range(i + 1, n)
    )


def pfaffian(m: QMatrix) -> Fraction:
    """Pfaffian by expansion along the first row; pf(e12 + e34) = 1."""
    m = matrix(m)
    n, c = shape(m)
    if n != c or n % 2:
        raise NotAlternatingError(f"Pfaffian needs an even square matrix, got {shape(m)}")
    if not is_alternating(m):
        raise NotAlternatingError("matrix is not alternating with zero diagonal")
    return _pf(m, tuple(range(n)))


def _pf(m: QMatrix, idx: tuple[int, ...]) -> Fraction:
    if not idx:
        return Fraction(1)
    first, rest = idx[0], idx[1:]
    total = Fraction(0)
    for pos, j in enumerate(rest):
        entry = m[first][j]
        if entry == 0:
            continue
        minor = rest[:pos] + rest[pos + 1 :]
        term = entry * _pf(m, minor)
        total += term if pos % 2 == 0 else -term
    return total
