"""
Linear (group) codes over Z_p presented by generator matrices.

Row reduction follows the usual mod-p Gauss-Jordan elimination on numpy
integer arrays; every public function returns a new immutable value.
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from src.utils.algebra import GroupVector, Prime, element_rows
from src.utils.errors import DimensionError, ResourceError

logger = logging.getLogger(__name__)

DEFAULT_BUDGET = 2**24


@dataclass(frozen=True)
class LinearCode:
    """The row space of ``generators`` inside (Z_p)^n."""

    p: int
    n: int
    generators: Tuple[GroupVector, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "p", Prime(self.p))
        if self.n < 0:
            raise DimensionError(f"code length must be nonnegative, got {self.n}")
        gens = tuple(self.generators)
        for g in gens:
            if g.p != self.p or g.n != self.n:
                raise DimensionError(
                    f"generator {g} does not live in (Z_{self.p})^{self.n}"
                )
        object.__setattr__(self, "generators", gens)

    @classmethod
    def from_rows(cls, p: int, n: int, rows: Iterable[Sequence[int]]) -> "LinearCode":
        vectors = tuple(GroupVector(p, tuple(int(c) % p for c in row)) for row in rows)
        return cls(p, n, vectors)

    @classmethod
    def from_digit_strings(
        cls, p: int, rows: Sequence[str], n: int = None
    ) -> "LinearCode":
        vectors = tuple(GroupVector.from_digits(p, row) for row in rows)
        if n is None:
            if not vectors:
                raise DimensionError(
                    "the length of a code without generators is unknown"
                )
            n = vectors[0].n
        return cls(p, n, vectors)

    @classmethod
    def whole_space(cls, p: int, n: int) -> "LinearCode":
        return cls.from_rows(p, n, np.eye(n, dtype=np.int64))

    @cached_property
    def matrix(self) -> np.ndarray:
        """Generator matrix as a (k, n) int64 array."""
        if not self.generators:
            return np.zeros((0, self.n), dtype=np.int64)
        return np.array([g.coords for g in self.generators], dtype=np.int64).reshape(
            len(self.generators), self.n
        )

    @cached_property
    def dimension(self) -> int:
        _, pivots = rref_mod(self.matrix, self.p)
        return len(pivots)

    @property
    def size(self) -> int:
        return self.p**self.dimension

    def to_digit_strings(self) -> List[str]:
        return [g.to_digits() for g in self.generators]

    def __str__(self) -> str:
        rows = ", ".join(self.to_digit_strings()) or "-"
        return f"({self.n}, {self.dimension}) code over Z_{self.p}: {rows}"


def rref_mod(matrix: np.ndarray, p: int) -> Tuple[np.ndarray, List[int]]:
    """
    Reduced row echelon form over Z_p.

    Args:
        matrix: Integer matrix (m x n).
        p: The prime modulus.

    Returns:
        tuple: (R, pivot_cols) with the zero rows of R removed.
    """
    A = np.array(matrix, dtype=np.int64) % p
    m, n = A.shape
    pivots: List[int] = []
    row = 0
    for col in range(n):
        if row >= m:
            break
        nonzero = np.nonzero(A[row:, col])[0]
        if nonzero.size == 0:
            continue
        found = row + int(nonzero[0])
        if found != row:
            A[[row, found]] = A[[found, row]]
        inv = pow(int(A[row, col]), p - 2, p)
        A[row] = (A[row] * inv) % p
        factors = A[:, col].copy()
        factors[row] = 0
        A = (A - np.outer(factors, A[row])) % p
        pivots.append(col)
        row += 1
    return A[:row], pivots


def canonicalize(code: LinearCode) -> LinearCode:
    """The unique RREF basis of the row space."""
    reduced, _ = rref_mod(code.matrix, code.p)
    return LinearCode.from_rows(code.p, code.n, reduced)


def dual(code: LinearCode) -> LinearCode:
    """The orthogonal code under the symbolwise inner product."""
    reduced, pivots = rref_mod(code.matrix, code.p)
    p, n = code.p, code.n
    pivot_set = set(pivots)
    free = [c for c in range(n) if c not in pivot_set]
    rows = []
    for f in free:
        x = np.zeros(n, dtype=np.int64)
        x[f] = 1
        for r, c in enumerate(pivots):
            x[c] = (-reduced[r, f]) % p
        rows.append(x)
    result = canonicalize(LinearCode.from_rows(p, n, rows))
    logger.debug(
        f"Dual of a ({n}, {len(pivots)}) code has dimension {result.dimension}"
    )
    return result


def codeword_array(code: LinearCode, budget: int = DEFAULT_BUDGET) -> np.ndarray:
    """
    All codewords as rows of an int64 array, in message order.

    Message vectors u run over (Z_p)^k in canonical order and each row is
    u . G over the canonical basis.
    """
    basis, _ = rref_mod(code.matrix, code.p)
    k = basis.shape[0]
    count = code.p**k
    if count > budget:
        raise ResourceError(count, budget, what="codewords")
    messages = element_rows(code.p, k)
    return (messages @ basis) % code.p


def enumerate_code(code: LinearCode, budget: int = DEFAULT_BUDGET) -> List[GroupVector]:
    return [GroupVector(code.p, tuple(row)) for row in codeword_array(code, budget)]


def contains(code: LinearCode, v: GroupVector) -> bool:
    if v.p != code.p or v.n != code.n:
        raise DimensionError(
            f"vector in (Z_{v.p})^{v.n} tested against a code in (Z_{code.p})^{code.n}"
        )
    reduced, pivots = rref_mod(code.matrix, code.p)
    residue = np.array(v.coords, dtype=np.int64)
    for r, c in enumerate(pivots):
        residue = (residue - residue[c] * reduced[r]) % code.p
    return not residue.any()


def code_equal(a: LinearCode, b: LinearCode) -> bool:
    if a.p != b.p or a.n != b.n:
        raise DimensionError(
            f"cannot compare codes in (Z_{a.p})^{a.n} and (Z_{b.p})^{b.n}"
        )
    ra, _ = rref_mod(a.matrix, a.p)
    rb, _ = rref_mod(b.matrix, b.p)
    return ra.shape == rb.shape and bool(np.array_equal(ra, rb))


def shorten(code: LinearCode, positions: Sequence[int]) -> LinearCode:
    """Codewords that vanish on ``positions``, with those coordinates deleted."""
    positions = sorted(set(positions))
    if any(not 0 <= c < code.n for c in positions):
        raise DimensionError(f"positions {positions} outside a code of length {code.n}")
    rest = [c for c in range(code.n) if c not in set(positions)]
    order = positions + rest
    reduced, pivots = rref_mod(code.matrix[:, order], code.p)
    keep = [r for r, c in enumerate(pivots) if c >= len(positions)]
    rows = reduced[keep][:, len(positions):] if keep else np.zeros((0, len(rest)))
    return canonicalize(LinearCode.from_rows(code.p, len(rest), rows))


def negate_coordinates(code: LinearCode, positions: Sequence[int]) -> LinearCode:
    """Image of the code under x_j -> -x_j for j in ``positions``."""
    if not positions:
        return code
    signs = np.ones(code.n, dtype=np.int64)
    signs[list(positions)] = -1
    return LinearCode.from_rows(code.p, code.n, (code.matrix * signs) % code.p)

