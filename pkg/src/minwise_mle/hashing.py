"""Seeded hash family standing in for k random permutations, plus sketches.

Every permutation ``j`` is simulated by ``h_j(x) = splitmix64(x ^ key_j)`` with
``key_j = splitmix64(seed + j)``. splitmix64 is a bijection on 64-bit words, so
``h_j`` is a permutation of the 64-bit universe and sketches are reproducible
bit-for-bit on any platform.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    DEFAULT_UNIVERSE,
    MAX_DIAG_BITS,
    MAX_TABLE_BITS,
    ContingencyTable,
    PairCounts3,
    SetRecord,
    ValidationError,
)

MASK64 = (1 << 64) - 1
_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30, _S27, _S31 = np.uint64(30), np.uint64(27), np.uint64(31)

# elements * permutations hashed per block
_BLOCK = 1 << 22


def splitmix64(z) -> np.ndarray:
    """splitmix64 output function applied elementwise (wrapping uint64 arithmetic)."""
    z = np.array(z, dtype=np.uint64, copy=True, ndmin=1)
    z += _GAMMA
    z ^= z >> _S30
    z *= _M1
    z ^= z >> _S27
    z *= _M2
    z ^= z >> _S31
    return z


def finalize_int(z: int) -> int:
    """Scalar splitmix64 on a Python int (taken mod 2**64)."""
    return int(splitmix64(np.uint64(z & MASK64))[0])


class HashFamily:
    """k seeded hash functions over 64-bit element IDs.

    With ``universe`` below 2**64 the hashed values are mapped into
    ``[0, universe)`` by multiply-shift range reduction. The reduction is
    monotone, so the reduced minimum is the reduction of the 64-bit minimum
    (ties broken by the pre-reduction hash).
    """

    def __init__(self, seed: int, k: int, universe: int = DEFAULT_UNIVERSE):
        if k < 1:
            raise ValidationError(f"k must be >= 1, got {k}")
        if not 1 <= universe <= DEFAULT_UNIVERSE:
            raise ValidationError(f"universe must be in [1, 2**64], got {universe}")
        self.seed = int(seed) & MASK64
        self.k = int(k)
        self.universe = int(universe)
        self._keys = splitmix64(np.uint64(self.seed) + np.arange(self.k, dtype=np.uint64))
        self._keys.setflags(write=False)

    @property
    def keys(self) -> np.ndarray:
        return self._keys

    def __repr__(self):
        return f"HashFamily(seed={self.seed}, k={self.k}, universe={self.universe})"

    def hash64(self, j: int, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.uint64)
        return splitmix64(x ^ self._keys[j])

    def reduce(self, h) -> np.ndarray:
        h = np.asarray(h, dtype=np.uint64)
        if self.universe == DEFAULT_UNIVERSE:
            return h
        D = self.universe
        return np.array([(int(v) * D) >> 64 for v in h.ravel()], dtype=np.uint64).reshape(h.shape)

    def hash(self, j: int, x) -> np.ndarray:
        return self.reduce(self.hash64(j, x))

    def min_hashes(self, elements) -> np.ndarray:
        """Per-permutation minimum of the 64-bit hashes over ``elements``."""
        x = np.asarray(elements, dtype=np.uint64).ravel()
        if x.size == 0:
            raise ValidationError("cannot sketch an empty set")
        out = np.empty(self.k, dtype=np.uint64)
        step = max(1, _BLOCK // x.size)
        for lo in range(0, self.k, step):
            keys = self._keys[lo:lo + step]
            out[lo:lo + keys.size] = splitmix64(x[None, :] ^ keys[:, None]).min(axis=1)
        return out


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.uint64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class MinwiseSketch:
    f: int
    seed: int
    k: int
    mins: np.ndarray

    def __post_init__(self):
        mins = _readonly(self.mins)
        if mins.shape != (self.k,):
            raise ValidationError(f"expected {self.k} minimums, got shape {mins.shape}")
        if self.f < 1:
            raise ValidationError("sketch cardinality must be >= 1")
        object.__setattr__(self, "mins", mins)

    def __eq__(self, other):
        if not isinstance(other, MinwiseSketch):
            return NotImplemented
        return (self.f, self.seed, self.k) == (other.f, other.seed, other.k) and np.array_equal(
            self.mins, other.mins)


@dataclass(frozen=True, eq=False)
class BBitSketch:
    f: int
    seed: int
    k: int
    b: int
    packed: bytes

    def __post_init__(self):
        if not 1 <= self.b <= 64:
            raise ValidationError(f"b must be in [1, 64], got {self.b}")
        expected = packed_size(self.k, self.b)
        if len(self.packed) != expected:
            raise ValidationError(f"expected {expected} packed bytes, got {len(self.packed)}")
        object.__setattr__(self, "packed", bytes(self.packed))

    @property
    def values(self) -> np.ndarray:
        return unpack_bits(self.packed, self.k, self.b)

    def __eq__(self, other):
        if not isinstance(other, BBitSketch):
            return NotImplemented
        return (self.f, self.seed, self.k, self.b, self.packed) == (
            other.f, other.seed, other.k, other.b, other.packed)


def packed_size(k: int, b: int) -> int:
    return (k * b + 7) // 8


def pack_bits(values, b: int) -> bytes:
    """Pack b-bit values LSB-first: value j occupies stream bits [j*b, (j+1)*b)."""
    v = np.asarray(values, dtype=np.uint64).ravel()
    if b < 64 and v.size and int(v.max()) >> b:
        raise ValidationError(f"value does not fit in {b} bits")
    bits = ((v[:, None] >> np.arange(b, dtype=np.uint64)) & np.uint64(1)).astype(np.uint8)
    return np.packbits(bits.ravel(), bitorder="little").tobytes()


def unpack_bits(data: bytes, k: int, b: int) -> np.ndarray:
    raw = np.frombuffer(data, dtype=np.uint8)
    bits = np.unpackbits(raw, bitorder="little")[: k * b].reshape(k, b).astype(np.uint64)
    return (bits << np.arange(b, dtype=np.uint64)).sum(axis=1, dtype=np.uint64)


def sketch_minwise(record: SetRecord, family: HashFamily) -> MinwiseSketch:
    if record.f < 1:
        raise ValidationError("cannot sketch an empty set")
    mins = family.reduce(family.min_hashes(record.as_array()))
    return MinwiseSketch(record.f, family.seed, family.k, mins)


def low_bits(values, b: int) -> np.ndarray:
    v = np.asarray(values, dtype=np.uint64)
    if b >= 64:
        return v.copy()
    return v & np.uint64((1 << b) - 1)


def truncate_to_bbit(sketch: MinwiseSketch, b: int) -> BBitSketch:
    if not 1 <= b <= 64:
        raise ValidationError(f"b must be in [1, 64], got {b}")
    return BBitSketch(sketch.f, sketch.seed, sketch.k, b, pack_bits(low_bits(sketch.mins, b), b))


def _check_compatible(s1, s2):
    if s1.seed != s2.seed:
        raise ValidationError(f"seed mismatch: {s1.seed} vs {s2.seed}")
    if s1.k != s2.k:
        raise ValidationError(f"k mismatch: {s1.k} vs {s2.k}")
    if getattr(s1, "b", None) != getattr(s2, "b", None):
        raise ValidationError(f"b mismatch: {getattr(s1, 'b', None)} vs {getattr(s2, 'b', None)}")


def compare_minwise(s1: MinwiseSketch, s2: MinwiseSketch) -> PairCounts3:
    _check_compatible(s1, s2)
    z1, z2 = s1.mins, s2.mins
    return PairCounts3(int(np.sum(z1 == z2)), int(np.sum(z1 < z2)), int(np.sum(z1 > z2)))


def table_from_values(u1, u2, b: int) -> ContingencyTable:
    """Contingency table of paired b-bit values (collapsed form for b > 8)."""
    u1 = np.asarray(u1, dtype=np.uint64)
    u2 = np.asarray(u2, dtype=np.uint64)
    if b <= MAX_TABLE_BITS:
        n = 1 << b
        flat = u1.astype(np.int64) * n + u2.astype(np.int64)
        return ContingencyTable(b, counts=np.bincount(flat, minlength=n * n).reshape(n, n))
    eq = u1 == u2
    k_lt, k_gt = int(np.sum(u1 < u2)), int(np.sum(u1 > u2))
    if b <= MAX_DIAG_BITS:
        diag = np.bincount(u1[eq].astype(np.int64), minlength=1 << b)
        return ContingencyTable(b, diag=diag, k_lt=k_lt, k_gt=k_gt)
    return ContingencyTable(b, k_eq=int(eq.sum()), k_lt=k_lt, k_gt=k_gt)


def compare_bbit(s1: BBitSketch, s2: BBitSketch) -> ContingencyTable:
    _check_compatible(s1, s2)
    return table_from_values(s1.values, s2.values, s1.b)
