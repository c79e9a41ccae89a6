"""Independent reference computations for testing the models.

* exact finite-universe probabilities of the pair of minimums (rational arithmetic),
* exhaustive enumeration of all permutations of small universes,
* the large-universe geometric limits of P(z1 = i, z2 = j) and the b-bit cell
  probabilities obtained by summing them over residue classes mod 2**b,
* an exact sampler of (z1, z2) under a uniformly random permutation.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from .core import ValidationError

MAX_ENUM_UNIVERSE = 7
TAIL_TOL = 1e-14


def _check_pair(D, f1, f2, a):
    if not (1 <= f1 <= D and 1 <= f2 <= D and 0 <= a <= min(f1, f2) and f1 + f2 - a <= D):
        raise ValidationError(f"infeasible pair (D={D}, f1={f1}, f2={f2}, a={a})")


def exact_equal_min_prob(D: int, f1: int, f2: int, a: int, i: int) -> Fraction:
    """P(z1 = z2 = i) under a uniformly random permutation of {0..D-1}."""
    _check_pair(D, f1, f2, a)
    if i < 0 or i > D - (f1 + f2 - a):
        return Fraction(0)
    p = Fraction(a, D)
    free = D - f1 - f2 + a
    for t in range(i):
        p *= Fraction(free - t, D - 1 - t)
    return p


def _first_in_then(D, free, first, i, gap_pool, gap, second):
    # i elements from `free`, then one of `first`, then `gap` elements from
    # `gap_pool` (which already excludes the first pick), then one of `second`
    p = Fraction(1)
    for t in range(i):
        p *= Fraction(free - t, D - t)
    p *= Fraction(first, D - i)
    pool = gap_pool - i
    for t in range(gap):
        p *= Fraction(pool - t, D - i - 1 - t)
    return p * Fraction(second, D - i - 1 - gap)


def exact_joint_min_prob(D: int, f1: int, f2: int, a: int, i: int, j: int) -> Fraction:
    """P(z1 = i, z2 = j) under a uniformly random permutation of {0..D-1}."""
    _check_pair(D, f1, f2, a)
    if i < 0 or j < 0 or i >= D or j >= D:
        return Fraction(0)
    if i == j:
        return exact_equal_min_prob(D, f1, f2, a, i)
    free = D - (f1 + f2 - a)
    if i < j:
        # slot i holds an element of S1 \ S2; slots i+1 .. j-1 avoid S2
        pool = free + (f1 - a) - 1
        if i > free or j - i - 1 > pool - i or f1 == a:
            return Fraction(0)
        return _first_in_then(D, free, f1 - a, i, pool, j - i - 1, f2)
    pool = free + (f2 - a) - 1
    if j > free or i - j - 1 > pool - j or f2 == a:
        return Fraction(0)
    return _first_in_then(D, free, f2 - a, j, pool, i - j - 1, f1)


@dataclass(frozen=True)
class JointMinDistribution:
    D: int
    f1: int
    f2: int
    a: int

    def __post_init__(self):
        _check_pair(self.D, self.f1, self.f2, self.a)

    def prob(self, i: int, j: int) -> Fraction:
        return exact_joint_min_prob(self.D, self.f1, self.f2, self.a, i, j)

    def table(self) -> dict:
        return {(i, j): self.prob(i, j) for i in range(self.D) for j in range(self.D)}

    def three_cell(self) -> tuple:
        tab = self.table()
        eq = sum(p for (i, j), p in tab.items() if i == j)
        lt = sum(p for (i, j), p in tab.items() if i < j)
        gt = sum(p for (i, j), p in tab.items() if i > j)
        return eq, lt, gt


def _check_enum(D):
    if not 1 <= D <= MAX_ENUM_UNIVERSE:
        raise ValidationError(f"exhaustive enumeration is limited to D <= {MAX_ENUM_UNIVERSE}")


@lru_cache(maxsize=None)
def _permutation_min_table(D: int) -> np.ndarray:
    """min over the subset (bitmask) of pi(x), for every permutation and subset."""
    perms = np.array(list(itertools.permutations(range(D))), dtype=np.int8)
    n_sub = 1 << D
    out = np.full((perms.shape[0], n_sub), D, dtype=np.int8)
    for mask in range(1, n_sub):
        low = (mask & -mask).bit_length() - 1
        out[:, mask] = np.minimum(out[:, mask & (mask - 1)], perms[:, low])
    out.setflags(write=False)
    return out


def enumerate_min_pairs(D: int, s1, s2) -> np.ndarray:
    """Counts of (z1, z2) over all D! permutations; entry [i, j]."""
    _check_enum(D)
    m1 = sum(1 << x for x in set(s1))
    m2 = sum(1 << x for x in set(s2))
    if not m1 or not m2 or max(set(s1) | set(s2)) >= D:
        raise ValidationError("sets must be non-empty subsets of {0..D-1}")
    tab = _permutation_min_table(D)
    z1, z2 = tab[:, m1].astype(np.int64), tab[:, m2].astype(np.int64)
    return np.bincount(z1 * D + z2, minlength=D * D).reshape(D, D)


def enumerate_three_cell_all_pairs(D: int) -> dict:
    """Exhaustive 3-cell counts for every ordered pair of non-empty subsets.

    Returns arrays indexed by ``[mask1, mask2]`` (index 0 unused): ``eq``,
    ``lt``, ``gt`` permutation counts, plus ``f1``, ``f2``, ``a`` and the
    number of permutations ``total``.
    """
    _check_enum(D)
    tab = _permutation_min_table(D)
    n_sub = 1 << D
    eq = np.zeros((n_sub, n_sub), dtype=np.int64)
    lt = np.zeros_like(eq)
    for m1 in range(1, n_sub):
        z1 = tab[:, m1][:, None]
        eq[m1] = (z1 == tab).sum(axis=0)
        lt[m1] = (z1 < tab).sum(axis=0)
    total = tab.shape[0]
    gt = total - eq - lt
    pop = np.array([bin(m).count("1") for m in range(n_sub)])
    inter = np.array([[bin(i & j).count("1") for j in range(n_sub)] for i in range(n_sub)])
    return {
        "eq": eq, "lt": lt, "gt": gt, "total": total,
        "f1": np.broadcast_to(pop[:, None], eq.shape),
        "f2": np.broadcast_to(pop[None, :], eq.shape),
        "a": inter,
    }


def _rates(rates):
    if hasattr(rates, "r1"):
        return rates.r1, rates.r2, rates.s
    return tuple(float(x) for x in rates)


def limit_joint_prob(rates, i, j):
    """Large-universe limit of P(z1 = i, z2 = j); broadcasts over arrays."""
    r1, r2, s = _rates(rates)
    u = r1 + r2 - s
    i = np.asarray(i, dtype=float)
    j = np.asarray(j, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        lw = np.log1p(-u) if u < 1 else -np.inf
        l1, l2 = np.log1p(-r1), np.log1p(-r2)

        def pw(log_base, e):
            return np.where(e == 0, 1.0, np.exp(e * log_base))

        lt = r2 * (r1 - s) * pw(l2, j - i - 1) * pw(lw, i)
        gt = r1 * (r2 - s) * pw(l1, i - j - 1) * pw(lw, j)
        eq = s * pw(lw, i)
    out = np.where(i < j, lt, np.where(i > j, gt, eq))
    return out if out.ndim else float(out)


def limit_tail_mass(rates, N: int) -> float:
    """Mass of the limit distribution outside [0, N) x [0, N).

    z1 and z2 are marginally geometric with success rates r1 and r2 and
    min(z1, z2) with rate u, so the mass is (1-r1)^N + (1-r2)^N - (1-u)^N.
    """
    r1, r2, s = _rates(rates)
    u = r1 + r2 - s
    return float((1 - r1) ** N + (1 - r2) ** N - (1 - u) ** N)


def truncation_for(rates, tol: float = TAIL_TOL) -> int:
    """Smallest N (found by doubling) whose tail mass is below ``tol``."""
    N = 16
    while limit_tail_mass(rates, N) >= tol:
        N *= 2
    return N


def limit_joint_matrix(rates, N: int) -> np.ndarray:
    idx = np.arange(N)
    return limit_joint_prob(rates, idx[:, None], idx[None, :])


def bbit_matrix_by_summation(b: int, rates, tol: float = TAIL_TOL) -> np.ndarray:
    """All b-bit cell probabilities by folding the limit joint law mod 2**b.

    The folded positions are truncated where the explicitly computed tail
    mass drops below ``tol``.
    """
    n = 1 << b
    N = max(truncation_for(rates, tol), n)
    N = -(-N // n) * n
    reps = N // n
    out = np.zeros((n, n))
    idx = np.arange(N)
    rows = max(1, (1 << 22) // N)
    for lo in range(0, N, rows):
        block = limit_joint_prob(rates, idx[lo:lo + rows, None], idx[None, :])
        z1 = idx[lo:lo + rows] % n
        folded = block.reshape(block.shape[0], reps, n).sum(axis=1)
        np.add.at(out, z1, folded)
    return out


def bbit_cell_prob_by_summation(b: int, rates, t: int, d: int, tol: float = TAIL_TOL) -> float:
    n = 1 << b
    if not (0 <= t < n and 0 <= d < n):
        raise ValidationError(f"cell ({t}, {d}) outside a {n}x{n} table")
    N = max(truncation_for(rates, tol), n)
    reps = -(-N // n)
    i = t + n * np.arange(reps)
    j = d + n * np.arange(reps)
    return float(limit_joint_prob(rates, i[:, None], j[None, :]).sum())


def _failures_before_success(N, K, v):
    """Inverse-CDF draw of the failures before the first success, sampling
    without replacement from N items of which K are successes.

    P(F >= x) = C(N - x, K) / C(N, K). ``v`` is uniform on (0, 1].
    """
    N = np.asarray(N, dtype=np.int64)
    K = np.asarray(K, dtype=np.int64)
    N, K, v = np.broadcast_arrays(N, K, np.asarray(v, dtype=float))
    log_v = np.log(v)
    base = gammaln(N + 1.0) - gammaln(N - K + 1.0)

    def log_surv(x):
        return gammaln(N - x + 1.0) - gammaln(N - x - K + 1.0) - base

    lo = np.zeros_like(N)
    hi = N - K
    while True:
        open_ = lo < hi
        if not open_.any():
            return lo
        mid = (lo + hi + 1) // 2
        ok = log_surv(mid) >= log_v
        lo = np.where(open_ & ok, mid, lo)
        hi = np.where(open_ & ~ok, mid - 1, hi)


def sample_permutation_minima(D: int, f1: int, f2: int, a: int, size: int, rng) -> tuple:
    """Exact draws of (z1, z2) = (min pi(S1), min pi(S2)) for random permutations.

    Only the cardinalities matter: the first union element sits after a
    negative-hypergeometric number of non-union elements, it is shared /
    S1-only / S2-only with probabilities a/U, (f1-a)/U, (f2-a)/U, and when it
    is not shared the other set's minimum is found the same way among the
    remaining elements.
    """
    _check_pair(D, f1, f2, a)
    U = f1 + f2 - a
    rng = np.random.default_rng(rng)
    v = 1.0 - rng.random((3, size))  # in (0, 1]
    x0 = _failures_before_success(D, U, v[0])
    cat = np.searchsorted(np.cumsum([a, f1 - a, f2 - a]), v[1] * U, side="left")
    rest = D - x0 - 1
    z1 = x0.copy()
    z2 = x0.copy()
    only1 = cat == 1
    only2 = cat == 2
    if only1.any():
        z2[only1] = x0[only1] + 1 + _failures_before_success(rest[only1], f2, v[2][only1])
    if only2.any():
        z1[only2] = x0[only2] + 1 + _failures_before_success(rest[only2], f1, v[2][only2])
    return z1, z2
