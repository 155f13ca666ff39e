"""
Exact arithmetic over Z_p, (Z_p)^n and the cyclotomic field Q(w), w = exp(2*pi*i/p).

Group elements are indexed in the canonical state order: index i maps to the
vector whose j-th coordinate is (i // p**j) % p, so the leftmost coordinate
is the least significant digit ({00, 10, 01, 11} for p = 2, n = 2).
"""

import cmath
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import List, Sequence, Tuple, Union

import numpy as np
from sympy import isprime

from src.utils.errors import DimensionError, DomainError

logger = logging.getLogger(__name__)

Rational = Union[int, Fraction]

DIGITS = "0123456789abcdefghijklmnopqrstuvwxyz"


class Prime(int):
    """An int that is known to be prime."""

    def __new__(cls, value):
        if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
            raise DomainError(f"p must be an integer prime, got {value!r}")
        if not isprime(int(value)):
            raise DomainError(f"p must be prime, got {value}")
        return super().__new__(cls, int(value))


@dataclass(frozen=True)
class GroupVector:
    """An n-tuple over Z_p."""

    p: int
    coords: Tuple[int, ...]

    def __post_init__(self):
        coords = tuple(int(c) for c in self.coords)
        for c in coords:
            if not 0 <= c < self.p:
                raise DomainError(f"coordinate {c} is not in [0, {self.p})")
        object.__setattr__(self, "coords", coords)

    @classmethod
    def zero(cls, p: int, n: int) -> "GroupVector":
        return cls(p, (0,) * n)

    @classmethod
    def from_index(cls, p: int, n: int, index: int) -> "GroupVector":
        if not 0 <= index < p**n:
            raise DimensionError(f"index {index} outside a group of size {p ** n}")
        return cls(p, tuple((index // p**j) % p for j in range(n)))

    @classmethod
    def from_digits(cls, p: int, text: str) -> "GroupVector":
        try:
            coords = tuple(DIGITS.index(ch) for ch in text.lower())
        except ValueError:
            raise DomainError(f"'{text}' is not a digit string")
        return cls(p, coords)

    @property
    def n(self) -> int:
        return len(self.coords)

    @property
    def index(self) -> int:
        return sum(c * self.p**j for j, c in enumerate(self.coords))

    def to_digits(self) -> str:
        return "".join(DIGITS[c] for c in self.coords)

    def __len__(self) -> int:
        return len(self.coords)

    def __add__(self, other: "GroupVector") -> "GroupVector":
        _check_compatible(self, other)
        return GroupVector(
            self.p, tuple((a + b) % self.p for a, b in zip(self.coords, other.coords))
        )

    def __neg__(self) -> "GroupVector":
        return GroupVector(self.p, tuple((-c) % self.p for c in self.coords))

    def __str__(self) -> str:
        return self.to_digits()


def _check_compatible(u: GroupVector, v: GroupVector):
    if u.p != v.p:
        raise DimensionError(f"vectors over Z_{u.p} and Z_{v.p} are not compatible")
    if u.n != v.n:
        raise DimensionError(f"vectors of length {u.n} and {v.n} are not compatible")


def dot(u: GroupVector, v: GroupVector) -> int:
    """Symbolwise inner product of two vectors, reduced mod p."""
    _check_compatible(u, v)
    return sum(a * b for a, b in zip(u.coords, v.coords)) % u.p


@dataclass(frozen=True)
class CycloRat:
    """
    Exact element sum(c_i * w**i, i < p-1) of Q(w), reduced modulo the p-th
    cyclotomic polynomial 1 + w + ... + w**(p-1).
    """

    p: int
    coeffs: Tuple[Fraction, ...]

    def __post_init__(self):
        coeffs = tuple(Fraction(c) for c in self.coeffs)
        if len(coeffs) != self.p - 1:
            raise DomainError(
                f"an element of Q(w_{self.p}) needs {self.p - 1} coefficients, "
                f"got {len(coeffs)}"
            )
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def zero(cls, p: int) -> "CycloRat":
        return cls(p, (0,) * (p - 1))

    @classmethod
    def rational(cls, p: int, value: Rational) -> "CycloRat":
        return cls(p, (value,) + (0,) * (p - 2))

    @classmethod
    def one(cls, p: int) -> "CycloRat":
        return cls.rational(p, 1)

    @classmethod
    def omega_power(cls, p: int, exponent: int) -> "CycloRat":
        ring = [0] * p
        ring[exponent % p] = 1
        return cls.from_group_ring(p, ring)

    @classmethod
    def from_group_ring(
        cls, p: int, ring: Sequence[Rational], scale: Rational = 1
    ) -> "CycloRat":
        """
        Map sum(ring[k] * x**k, k < p) from Z[x]/(x**p - 1) into Q(w).

        Args:
            p: The prime.
            ring: p coefficients, ring[k] multiplies x**k.
            scale: Rational factor applied after reduction.

        Returns:
            CycloRat: The reduced element.
        """
        if len(ring) != p:
            raise DomainError(f"group ring vectors for p={p} have {p} entries")
        top = Fraction(ring[p - 1])
        return cls(p, tuple((Fraction(ring[k]) - top) * scale for k in range(p - 1)))

    def _coerce(self, other) -> "CycloRat":
        if isinstance(other, CycloRat):
            if other.p != self.p:
                raise DomainError(
                    f"cannot combine elements of Q(w_{self.p}) and Q(w_{other.p})"
                )
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return CycloRat.rational(self.p, other)
        return NotImplemented

    def __add__(self, other) -> "CycloRat":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return CycloRat(self.p, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    __radd__ = __add__

    def __neg__(self) -> "CycloRat":
        return CycloRat(self.p, tuple(-a for a in self.coeffs))

    def __sub__(self, other) -> "CycloRat":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> "CycloRat":
        return (-self) + other

    def __mul__(self, other) -> "CycloRat":
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return CycloRat(self.p, tuple(a * other for a in self.coeffs))
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        p = self.p
        ring = [Fraction(0)] * p
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            for j, b in enumerate(other.coeffs):
                if b:
                    ring[(i + j) % p] += a * b
        return CycloRat.from_group_ring(p, ring)

    __rmul__ = __mul__

    def __truediv__(self, other: Rational) -> "CycloRat":
        if isinstance(other, CycloRat):
            if not other.is_rational():
                raise DomainError("division is only defined by rational elements")
            other = other.to_fraction()
        return CycloRat(self.p, tuple(a / other for a in self.coeffs))

    def __bool__(self) -> bool:
        return any(self.coeffs)

    def times_omega(self, exponent: int) -> "CycloRat":
        """Multiply by w**exponent (a rotation in the group ring)."""
        p = self.p
        ring = [Fraction(0)] * p
        for i, a in enumerate(self.coeffs):
            ring[(i + exponent) % p] += a
        return CycloRat.from_group_ring(p, ring)

    def conj(self) -> "CycloRat":
        p = self.p
        ring = [Fraction(0)] * p
        for i, a in enumerate(self.coeffs):
            ring[(-i) % p] += a
        return CycloRat.from_group_ring(p, ring)

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def is_integer(self) -> bool:
        return self.is_rational() and self.coeffs[0].denominator == 1

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise DomainError(f"{self} is not rational")
        return self.coeffs[0]

    def to_complex(self) -> complex:
        return sum(
            (float(c) * cmath.exp(2j * cmath.pi * i / self.p))
            for i, c in enumerate(self.coeffs)
        )

    def __str__(self) -> str:
        parts = []
        for i, c in enumerate(self.coeffs):
            if not c:
                continue
            power = "" if i == 0 else ("w" if i == 1 else f"w^{i}")
            if not power:
                parts.append(str(c))
            elif c == 1:
                parts.append(power)
            elif c == -1:
                parts.append(f"-{power}")
            else:
                parts.append(f"{c}*{power}")
        return " + ".join(parts).replace("+ -", "- ") if parts else "0"


def cyclo_mul(a: CycloRat, b: CycloRat) -> CycloRat:
    if a.p != b.p:
        raise DomainError(f"cannot multiply elements of Q(w_{a.p}) and Q(w_{b.p})")
    return a * b


def cyclo_conj(a: CycloRat) -> CycloRat:
    return a.conj()


def character(f: GroupVector, t: GroupVector) -> CycloRat:
    """w ** (f . t)"""
    return CycloRat.omega_power(f.p, dot(f, t))


def element_rows(p: int, n: int) -> np.ndarray:
    """All p**n vectors as rows of a fresh array, in canonical state order."""
    if n == 0:
        return np.zeros((1, 0), dtype=np.int64)
    index = np.arange(p**n, dtype=np.int64)
    return np.stack([(index // p**j) % p for j in range(n)], axis=1)


@lru_cache(maxsize=16)
def group_elements(p: int, n: int) -> np.ndarray:
    """Read-only, cached ``element_rows`` for state and symbol groups."""
    rows = element_rows(p, n)
    rows.flags.writeable = False
    return rows


def state_labels(p: int, n: int) -> List[str]:
    """Digit strings of (Z_p)^n in canonical order; the lone label of n = 0 is empty."""
    return ["".join(DIGITS[c] for c in row) for row in group_elements(p, n).tolist()]


@lru_cache(maxsize=16)
def character_exponents(p: int, n: int) -> np.ndarray:
    """Matrix of f . t mod p over (Z_p)^n, rows f and columns t in canonical order."""
    elements = group_elements(p, n)
    exps = (elements @ elements.T) % p
    exps.flags.writeable = False
    return exps


@dataclass(frozen=True)
class TransformMatrix:
    """
    The character table H = {w^(f.t)} of (Z_p)^n, or its conjugate H* when
    ``conjugated`` is set.
    """

    p: int
    n: int
    entries: Tuple[Tuple[CycloRat, ...], ...]
    conjugated: bool = False

    @property
    def size(self) -> int:
        return self.p**self.n

    def exponents(self) -> np.ndarray:
        exps = character_exponents(self.p, self.n)
        return (-exps) % self.p if self.conjugated else exps

    def apply(self, v: Sequence[CycloRat]) -> List[CycloRat]:
        """H . v, or H* . v for a conjugated table."""
        if len(v) != self.size:
            raise DimensionError(
                f"vector of length {len(v)} cannot be transformed over a group "
                f"of size {self.size}"
            )
        exps = self.exponents()
        return [_sum_rotated(v, exps[f], self.p) for f in range(self.size)]

    def conjugate(self) -> "TransformMatrix":
        return TransformMatrix(
            self.p,
            self.n,
            tuple(tuple(e.conj() for e in row) for row in self.entries),
            not self.conjugated,
        )

    def is_symmetric(self) -> bool:
        return all(
            self.entries[i][j] == self.entries[j][i]
            for i in range(self.size)
            for j in range(i)
        )


def _sum_rotated(v: Sequence[CycloRat], exponents: Sequence[int], p: int) -> CycloRat:
    total = CycloRat.zero(p)
    for value, e in zip(v, exponents):
        if isinstance(value, CycloRat):
            total = total + value.times_omega(int(e))
        else:
            total = total + CycloRat.omega_power(p, int(e)) * value
    return total


@lru_cache(maxsize=16)
def transform_matrix(p: int, n: int) -> TransformMatrix:
    p = Prime(p)
    if n < 0:
        raise DimensionError(f"group dimension must be nonnegative, got {n}")
    exps = character_exponents(p, n)
    entries = tuple(
        tuple(CycloRat.omega_power(p, int(e)) for e in row) for row in exps
    )
    logger.debug(f"Built {p ** n}x{p ** n} transform matrix over Z_{p}^{n}")
    return TransformMatrix(p, n, entries)


def inverse_transform_apply(
    H: TransformMatrix, v: Sequence[CycloRat]
) -> List[CycloRat]:
    """|F|^-1 . H* . v"""
    if len(v) != H.size:
        raise DimensionError(
            f"vector of length {len(v)} cannot be inverse transformed over a "
            f"group of size {H.size}"
        )
    exps = (-H.exponents()) % H.p
    return [_sum_rotated(v, exps[t], H.p) / H.size for t in range(H.size)]


def group_ring_transform(
    values: np.ndarray, p: int, n: int, axis: int, conjugate: bool = False
) -> np.ndarray:
    """
    Apply the unnormalized character transform along one axis of an array of
    group-ring elements.

    The last axis of ``values`` holds the p coefficients of 1, x, ..., x^(p-1)
    with x standing for w; multiplying by w^e is a roll of that axis, so the
    whole transform stays in exact integer arithmetic.

    Args:
        values: Object or integer array; ``values.shape[axis] == p**n``.
        p: The prime.
        n: Dimension of the group indexing ``axis``.
        axis: Axis to transform (must not be the last one).
        conjugate: Use w^(-f.t) instead of w^(f.t).

    Returns:
        np.ndarray: Object array of the same shape.
    """
    exps = character_exponents(p, n)
    if conjugate:
        exps = (-exps) % p
    moved = np.moveaxis(np.asarray(values, dtype=object), axis, 0)
    if moved.shape[0] != p**n:
        raise DimensionError(
            f"axis of length {moved.shape[0]} does not index (Z_{p})^{n}"
        )
    out = np.zeros(moved.shape, dtype=object)
    for r in range(p):
        selector = (exps == r).astype(np.int64)
        if not selector.any():
            continue
        partial = np.tensordot(selector, moved, axes=(1, 0))
        out = out + np.roll(partial, r, axis=-1)
    return np.moveaxis(out, 0, axis)
