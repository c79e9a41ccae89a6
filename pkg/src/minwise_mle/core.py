"""Shared domain types for minwise sketches and their comparison counts."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Integral, Real
from typing import Optional, Sequence

import numpy as np

DEFAULT_UNIVERSE = 2**64


class ValidationError(ValueError):
    """Raised when inputs violate a domain invariant."""


@dataclass(frozen=True)
class UniverseConfig:
    D: int = DEFAULT_UNIVERSE

    def __post_init__(self):
        if int(self.D) < 1:
            raise ValidationError(f"universe size must be >= 1, got {self.D}")


@dataclass(frozen=True)
class SetRecord:
    """A non-empty set of element IDs, stored sorted and de-duplicated."""

    id: str
    elements: tuple

    def __post_init__(self):
        elems = tuple(int(x) for x in self.elements)
        if not elems:
            raise ValidationError(f"set {self.id!r} is empty")
        if any(x < 0 for x in elems):
            raise ValidationError(f"set {self.id!r} has negative element IDs")
        if any(b <= a for a, b in zip(elems, elems[1:])):
            raise ValidationError(f"set {self.id!r} elements are not strictly increasing")
        object.__setattr__(self, "elements", elems)

    @classmethod
    def from_iterable(cls, id, elements, universe: Optional[int] = None) -> "SetRecord":
        elems = sorted(set(int(x) for x in elements))
        if universe is not None and elems and elems[-1] >= universe:
            raise ValidationError(f"set {id!r} has element {elems[-1]} outside universe of size {universe}")
        return cls(str(id), tuple(elems))

    @property
    def f(self) -> int:
        return len(self.elements)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.elements, dtype=np.uint64)


@dataclass(frozen=True)
class PairGroundTruth:
    """Cardinalities of two sets and of their intersection.

    The fields may be integers or (scaled) real numbers; the variance formulas
    only depend on ratios. No ``f1 >= f2`` orientation is imposed.
    """

    f1: Real
    f2: Real
    a: Real

    @property
    def union(self):
        return self.f1 + self.f2 - self.a

    @property
    def resemblance(self):
        return _ratio(self.a, self.union)

    @property
    def containment(self):
        return _ratio(self.a, min(self.f1, self.f2))

    def three_cell(self):
        """Exact (P_eq, P_lt, P_gt); Fractions for integer input."""
        u = self.union
        return _ratio(self.a, u), _ratio(self.f1 - self.a, u), _ratio(self.f2 - self.a, u)

    def swapped(self) -> "PairGroundTruth":
        return PairGroundTruth(self.f2, self.f1, self.a)


def _ratio(num, den):
    if isinstance(num, Integral) and isinstance(den, Integral):
        return Fraction(int(num), int(den))
    return num / den


def validate_ground_truth(f1, f2, a) -> PairGroundTruth:
    for name, v in (("f1", f1), ("f2", f2), ("a", a)):
        if not isinstance(v, Real) or v != v:
            raise ValidationError(f"{name} must be a real number, got {v!r}")
        if v < 0:
            raise ValidationError(f"{name} must be non-negative, got {v}")
    if f1 == 0 or f2 == 0:
        raise ValidationError("set cardinalities must be positive")
    if a > min(f1, f2):
        raise ValidationError(f"intersection a={a} exceeds min(f1, f2)={min(f1, f2)}")
    return PairGroundTruth(f1, f2, a)


@dataclass(frozen=True)
class PairCounts3:
    k_eq: int
    k_lt: int
    k_gt: int

    def __post_init__(self):
        if min(self.k_eq, self.k_lt, self.k_gt) < 0:
            raise ValidationError("counts must be non-negative")
        if self.k < 1:
            raise ValidationError("at least one comparison is required (k >= 1)")

    @property
    def k(self) -> int:
        return self.k_eq + self.k_lt + self.k_gt

    def swapped(self) -> "PairCounts3":
        return PairCounts3(self.k_eq, self.k_gt, self.k_lt)

    def as_array(self) -> np.ndarray:
        return np.array([self.k_eq, self.k_lt, self.k_gt], dtype=np.int64)


MAX_TABLE_BITS = 8
MAX_DIAG_BITS = 16


@dataclass(frozen=True)
class ContingencyTable:
    """Joint counts of the b-bit values (u1, u2) over k comparisons.

    ``counts[t, d]`` is only kept for ``b <= 8``. For wider values the table
    is held in collapsed form: per-value diagonal counts (``b <= 16``) and the
    two off-diagonal sums.
    """

    b: int
    counts: Optional[np.ndarray] = None
    diag: Optional[np.ndarray] = None
    k_lt: Optional[int] = None
    k_gt: Optional[int] = None
    k_eq: Optional[int] = field(default=None)

    def __post_init__(self):
        if not 1 <= self.b <= 64:
            raise ValidationError(f"b must be in [1, 64], got {self.b}")
        if self.counts is not None:
            c = np.asarray(self.counts, dtype=np.int64)
            n = 1 << self.b
            if c.shape != (n, n):
                raise ValidationError(f"table for b={self.b} must be {n}x{n}, got {c.shape}")
            if (c < 0).any():
                raise ValidationError("table counts must be non-negative")
            c.setflags(write=False)
            object.__setattr__(self, "counts", c)
            object.__setattr__(self, "diag", np.diag(c).copy())
            object.__setattr__(self, "k_lt", int(np.triu(c, 1).sum()))
            object.__setattr__(self, "k_gt", int(np.tril(c, -1).sum()))
            object.__setattr__(self, "k_eq", int(np.trace(c)))
        else:
            if self.k_lt is None or self.k_gt is None:
                raise ValidationError("collapsed tables need k_lt and k_gt")
            if self.diag is not None:
                d = np.asarray(self.diag, dtype=np.int64)
                if d.shape != (1 << self.b,):
                    raise ValidationError("diagonal length must be 2**b")
                object.__setattr__(self, "diag", d)
                k_eq = int(d.sum())
                if self.k_eq is not None and self.k_eq != k_eq:
                    raise ValidationError("k_eq disagrees with the diagonal counts")
                object.__setattr__(self, "k_eq", k_eq)
            elif self.k_eq is None:
                raise ValidationError("collapsed tables need k_eq or diag")
        if self.k < 1:
            raise ValidationError("table must contain at least one comparison")

    @property
    def k(self) -> int:
        return self.k_eq + self.k_lt + self.k_gt

    def collapse(self) -> PairCounts3:
        return PairCounts3(self.k_eq, self.k_lt, self.k_gt)


def pair_ground_truth_from_sets(s1: Sequence[int], s2: Sequence[int]) -> PairGroundTruth:
    a, b = set(s1), set(s2)
    return validate_ground_truth(len(a), len(b), len(a & b))
