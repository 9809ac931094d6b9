"""Nonnegative integer renormalization matrices and their diagnostics.

Matrices are tuples of row tuples of plain Python integers, so products
stay exact at any size.  Logs are only ever taken of already-final
integer quantities.

The norm used throughout is the entry sum: it is exact in integer
arithmetic and equivalent to any other norm for the growth statements
the package measures.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

from .permutations import Permutation, apply_op, is_irreducible

__all__ = [
    "IntMatrix",
    "identity",
    "mat_mul",
    "mat_vec",
    "transpose",
    "det",
    "elementary_matrix",
    "letter_matrix",
    "word_matrix",
    "matrix_norm",
    "is_positive",
    "birkhoff_diameter",
    "contraction_coefficient",
    "matrix_csv",
]

IntMatrix = tuple[tuple[int, ...], ...]


def identity(m: int) -> IntMatrix:
    return tuple(tuple(1 if i == j else 0 for j in range(m)) for i in range(m))


def mat_mul(A: IntMatrix, B: IntMatrix) -> IntMatrix:
    m = len(A)
    Bt = tuple(zip(*B))
    return tuple(
        tuple(sum(a * b for a, b in zip(row, col)) for col in Bt) for row in A
    )


def mat_vec(A: IntMatrix, v: Sequence) -> tuple:
    return tuple(sum(a * x for a, x in zip(row, v)) for row in A)


def transpose(A: IntMatrix) -> IntMatrix:
    return tuple(zip(*A))


def det(A: IntMatrix) -> int:
    """Exact integer determinant (fraction-free Bareiss elimination)."""
    n = len(A)
    M = [list(row) for row in A]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if M[k][k] == 0:
            for r in range(k + 1, n):
                if M[r][k] != 0:
                    M[k], M[r] = M[r], M[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return sign * M[n - 1][n - 1]


def elementary_matrix(op: str, pi: Permutation) -> IntMatrix:
    """One-step renormalization matrix for a move at ``pi``.

    The matrix is the unique nonnegative integer matrix reconstructing the
    pre-step lengths from the post-step ones (lam = A lam'), which pins the
    row layout of the first kind:

      rows i < k keep column i, row k = pi^{-1}(m) covers columns k and
      k+1, rows k < i < m shift to column i+1, and row m covers column
      k+1.  The second kind is the identity plus a single 1 at (m, k).
    """
    if not is_irreducible(pi):
        raise ValueError(f"permutation {pi} is reducible")
    m = pi.m
    k = pi.inverse_of(m)  # 1-based; k <= m-1 for irreducible pi
    rows = []
    if op == "a":
        for i in range(1, m + 1):
            row = [0] * m
            if i < k:
                row[i - 1] = 1
            elif i == k:
                row[k - 1] = 1
                row[k] = 1
            elif i < m:
                row[i] = 1
            else:
                row[k] = 1
            rows.append(tuple(row))
    elif op == "b":
        for i in range(1, m + 1):
            row = [0] * m
            row[i - 1] = 1
            if i == m:
                row[k - 1] += 1
            rows.append(tuple(row))
    else:
        raise ValueError(f"unknown operation {op!r}")
    return tuple(rows)


def letter_matrix(letter) -> IntMatrix:
    """Product of elementary matrices along the letter's own orbit of moves.

    ``letter`` is anything with fields c, n, pi.
    """
    pi = letter.pi
    A = identity(pi.m)
    for _ in range(letter.n):
        A = mat_mul(A, elementary_matrix(letter.c, pi))
        pi = apply_op(letter.c, pi)
    return A


def word_matrix(word, m: int | None = None) -> IntMatrix:
    """Left-to-right product of letter matrices; the empty word gives the
    identity (dimension ``m`` must then be supplied)."""
    letters = list(word)
    if not letters:
        if m is None:
            raise ValueError("empty word needs an explicit dimension")
        return identity(m)
    A = letter_matrix(letters[0])
    for letter in letters[1:]:
        A = mat_mul(A, letter_matrix(letter))
    return A


def matrix_norm(A: IntMatrix) -> int:
    """Entry sum."""
    return sum(sum(row) for row in A)


def is_positive(A: IntMatrix) -> bool:
    return all(entry >= 1 for row in A for entry in row)


def log_ratio(p: int, q: int) -> float:
    """log(p/q) for positive integers of any size, accurate near 1.

    Avoids the catastrophic cancellation of log(p) - log(q) when p and q
    are huge but close.
    """
    if p == q:
        return 0.0
    if q < p < 2 * q:
        return math.log1p(float(Fraction(p - q, q)))
    if p < q < 2 * p:
        return -math.log1p(float(Fraction(q - p, p)))
    return math.log(p) - math.log(q)


def birkhoff_diameter(A: IntMatrix) -> float:
    """Projective diameter of the cone image: the largest log cross-ratio
    log((A_ik A_jl) / (A_jk A_il)), or +inf when a zero pattern makes some
    cross-ratio degenerate.

    The maximizing cross-ratio is selected by exact integer comparisons, so
    the result stays accurate when the matrix entries are huge and the
    diameter is tiny.

    The induced projective contraction coefficient is tanh(diameter / 4).
    """
    m = len(A)
    best_p, best_q = 1, 1  # running maximum of p/q over quadruples
    for k in range(m):
        for l in range(k + 1, m):
            for i in range(m):
                for j in range(m):
                    p = A[i][k] * A[j][l]
                    q = A[j][k] * A[i][l]
                    if p == 0:
                        continue
                    if q == 0:
                        return math.inf
                    if p * best_q > q * best_p:
                        best_p, best_q = p, q
    return log_ratio(best_p, best_q)


def contraction_coefficient(A: IntMatrix) -> float:
    """tanh(birkhoff_diameter/4); equals 1.0 for a non-positive pattern."""
    d = birkhoff_diameter(A)
    return 1.0 if math.isinf(d) else math.tanh(d / 4.0)


def normalized_columns(A: IntMatrix) -> tuple[tuple[Fraction, ...], ...]:
    """Columns scaled to sum 1, as exact rationals."""
    cols = []
    for j in range(len(A)):
        col = [row[j] for row in A]
        s = sum(col)
        if s == 0:
            raise ValueError("zero column has no normalization")
        cols.append(tuple(Fraction(x, s) for x in col))
    return tuple(cols)


def matrix_csv(A: IntMatrix) -> str:
    """Row-major CSV of decimal integers (arbitrary precision preserved)."""
    return "\n".join(",".join(str(x) for x in row) for row in A) + "\n"
