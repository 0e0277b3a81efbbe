"""
Exact Matrix Kernel
Fraction-free determinants, adjugates, exact inverses and definiteness tests.

Matrices are numpy object arrays holding Python ints (IntMatrix) or
Fractions (RatMatrix), indexed by an ordered tuple of vertex names.
No floating point is involved anywhere in this module.
"""

import logging
from fractions import Fraction
from typing import Dict, Iterable, List, Sequence

import numpy as np

from errors import InputError, SingularMatrixError, UnknownNameError

logger = logging.getLogger(__name__)


class ExactMatrix:
    """Square exact matrix with named rows/columns. Immutable."""

    _coerce = staticmethod(lambda x: x)

    def __init__(self, index: Iterable[str], entries):
        self.index = tuple(index)
        n = len(self.index)
        arr = np.empty((n, n), dtype=object)
        rows = list(entries)
        if len(rows) != n:
            raise ValueError(f"expected {n} rows, got {len(rows)}")
        for i, row in enumerate(rows):
            row = list(row)
            if len(row) != n:
                raise ValueError(f"row {i} has {len(row)} entries, expected {n}")
            for j, x in enumerate(row):
                arr[i, j] = self._coerce(x)
        arr.flags.writeable = False
        self.entries = arr
        self._position = {name: i for i, name in enumerate(self.index)}

    @property
    def size(self) -> int:
        return len(self.index)

    def position(self, name: str) -> int:
        try:
            return self._position[name]
        except KeyError:
            raise UnknownNameError(f"unknown index {name!r}") from None

    def entry(self, u: str, v: str):
        return self.entries[self.position(u), self.position(v)]

    def __getitem__(self, key):
        u, v = key
        return self.entry(u, v)

    def row(self, u: str) -> Dict[str, object]:
        i = self.position(u)
        return {name: self.entries[i, j] for j, name in enumerate(self.index)}

    def is_symmetric(self) -> bool:
        return bool(np.array_equal(self.entries, self.entries.T))

    def submatrix(self, names: Sequence[str]) -> "ExactMatrix":
        pos = [self.position(n) for n in names]
        return type(self)(names, self.entries[np.ix_(pos, pos)].tolist())

    def __neg__(self):
        return type(self)(self.index, (-self.entries).tolist())

    def __matmul__(self, other: "ExactMatrix") -> "ExactMatrix":
        if self.index != other.index:
            raise ValueError("index sets differ")
        product = self.entries.dot(other.entries) if self.size else self.entries
        if isinstance(self, IntMatrix) and isinstance(other, IntMatrix):
            return IntMatrix(self.index, product.tolist())
        return RatMatrix(self.index, product.tolist())

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        return self.index == other.index and bool(np.array_equal(self.entries, other.entries))

    def __hash__(self):
        return hash((self.index, tuple(self.entries.flatten().tolist())))

    def to_json(self) -> List[List[str]]:
        return [[str(x) for x in row] for row in self.entries.tolist()]

    def __repr__(self):
        return f"{type(self).__name__}(index={self.index!r}, entries={self.entries.tolist()!r})"


def _to_int(x) -> int:
    if isinstance(x, Fraction):
        if x.denominator != 1:
            raise ValueError(f"non-integral entry {x}")
        return x.numerator
    return int(x)


class IntMatrix(ExactMatrix):
    _coerce = staticmethod(_to_int)


class RatMatrix(ExactMatrix):
    _coerce = staticmethod(Fraction)


def identity(index: Sequence[str]) -> IntMatrix:
    n = len(index)
    return IntMatrix(index, [[int(i == j) for j in range(n)] for i in range(n)])


def determinant(M: ExactMatrix) -> int:
    """
    Exact determinant by Bareiss fraction-free elimination.

    Every intermediate value is the determinant of a minor of M, so the
    division by the previous pivot is exact.
    """
    n = M.size
    if n == 0:
        return 1
    if isinstance(M, RatMatrix):
        return determinant_rational(M)

    A = M.entries.copy()
    sign = 1
    prev = 1
    for k in range(n - 1):
        if A[k, k] == 0:
            swap = next((i for i in range(k + 1, n) if A[i, k] != 0), None)
            if swap is None:
                return 0
            A[[k, swap]] = A[[swap, k]]
            sign = -sign
        pivot = A[k, k]
        A[k + 1:, k + 1:] = (A[k + 1:, k + 1:] * pivot - np.outer(A[k + 1:, k], A[k, k + 1:])) // prev
        prev = pivot
    return sign * A[n - 1, n - 1]


def determinant_rational(M: ExactMatrix) -> Fraction:
    """Determinant by plain Gaussian elimination over the rationals."""
    n = M.size
    A = np.array([[Fraction(x) for x in row] for row in M.entries.tolist()], dtype=object).reshape(n, n)
    det = Fraction(1)
    for k in range(n):
        swap = next((i for i in range(k, n) if A[i, k] != 0), None)
        if swap is None:
            return Fraction(0)
        if swap != k:
            A[[k, swap]] = A[[swap, k]]
            det = -det
        det *= A[k, k]
        A[k + 1:, k:] -= np.outer(A[k + 1:, k] / A[k, k], A[k, k:])
    return det


def leading_principal_minors(M: ExactMatrix) -> List[int]:
    """
    All leading principal minors of M, smallest first.

    Bareiss elimination without pivoting produces them as successive
    pivots; after a zero pivot the remaining minors are computed directly.
    """
    n = M.size
    A = M.entries.copy()
    minors: List[int] = []
    prev = 1
    for k in range(n):
        pivot = A[k, k]
        minors.append(pivot)
        if pivot == 0:
            break
        A[k + 1:, k + 1:] = (A[k + 1:, k + 1:] * pivot - np.outer(A[k + 1:, k], A[k, k + 1:])) // prev
        prev = pivot
    for k in range(len(minors), n):
        minors.append(determinant(M.submatrix(M.index[:k + 1])))
    return minors


def inverse(M: ExactMatrix) -> RatMatrix:
    """Exact rational inverse by Gauss-Jordan elimination."""
    n = M.size
    X = np.array([[Fraction(x) for x in row] for row in M.entries.tolist()], dtype=object).reshape(n, n)
    Y = np.array([[Fraction(int(i == j)) for j in range(n)] for i in range(n)], dtype=object).reshape(n, n)

    # Downward elimination: unit diagonal, zero lower triangle.
    for i in range(n):
        swap = next((j for j in range(i, n) if X[j, i] != 0), None)
        if swap is None:
            raise SingularMatrixError("matrix is not invertible")
        if swap != i:
            X[[i, swap]] = X[[swap, i]]
            Y[[i, swap]] = Y[[swap, i]]
        pivot = X[i, i]
        X[i, :] /= pivot
        Y[i, :] /= pivot
        for j in range(i + 1, n):
            factor = X[j, i]
            if factor:
                X[j, :] -= factor * X[i, :]
                Y[j, :] -= factor * Y[i, :]

    # Upward elimination.
    for j in range(n - 2, -1, -1):
        for i in range(j + 1, n):
            factor = X[j, i]
            if factor:
                X[j, :] -= factor * X[i, :]
                Y[j, :] -= factor * Y[i, :]

    return RatMatrix(M.index, Y.tolist())


def adjugate(M: ExactMatrix) -> IntMatrix:
    """
    Exact adjugate, M @ adj(M) == det(M) * Id.

    Nonsingular input goes through det * inverse; singular input falls
    back to cofactors.
    """
    n = M.size
    det = determinant(M)
    if det != 0:
        inv = inverse(M)
        return IntMatrix(M.index, (inv.entries * det).tolist())

    logger.debug("adjugate of singular %dx%d matrix via cofactors", n, n)
    adj = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = np.delete(np.delete(M.entries, i, axis=0), j, axis=1)
            sub = IntMatrix([str(k) for k in range(n - 1)], minor.tolist())
            adj[j][i] = (-1) ** (i + j) * determinant(sub)
    return IntMatrix(M.index, adj)


def is_negative_definite(I: ExactMatrix) -> bool:
    """Sylvester's criterion applied to -I."""
    if not I.is_symmetric():
        raise InputError("intersection matrix is not symmetric")
    return all(m > 0 for m in leading_principal_minors(-I))


def first_failing_minor(I: ExactMatrix):
    """(1-based index, value) of the first non-positive leading minor of -I, or None."""
    for k, m in enumerate(leading_principal_minors(-I), start=1):
        if m <= 0:
            return k, m
    return None
