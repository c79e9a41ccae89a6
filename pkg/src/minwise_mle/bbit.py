"""Cell probabilities of the b-bit contingency table (large-universe limit).

Notation: ``r1 = f1/D``, ``r2 = f2/D``, ``s = a/D``, ``u = r1 + r2 - s`` (the
union rate), ``n = 2**b``. For the lowest b bits ``(u1, u2)`` of the two
minimums,

    P(t, d) = P_lt * r2 (1-r2)^(d-t-1) / G2 * g(t) + P_gt * r1 (1-r1)^(t+n-d-1) / G1 * g(d)   t < d
    P(t, d) = P_gt * r1 (1-r1)^(t-d-1) / G1 * g(d) + P_lt * r2 (1-r2)^(d+n-t-1) / G2 * g(t)   t > d
    P(t, t) = (R + P_lt * C2 + P_gt * C1) * g(t)

with ``G_i = 1 - (1-r_i)^n``, ``C_i = r_i (1-r_i)^(n-1) / G_i`` and
``g(t) = u (1-u)^t / (1 - (1-u)^n)``, which sums to one over t.

All powers ``(1-x)^e`` go through ``exp(e * log1p(-x))``.
"""
from __future__ import annotations

from dataclasses import dataclass

import mpmath
import numpy as np

from .core import MAX_DIAG_BITS, MAX_TABLE_BITS, ContingencyTable, ValidationError

SCHEMES = ("full", "do", "d", "three", "eq")
MAX_SUMMARY_BITS = 32
_RATE_SLACK = 1e-12
# below this value of n * min(r1, r2) the closed form loses digits to cancellation
_CANCEL_LIMIT = 1e-3


@dataclass(frozen=True)
class RateTriple:
    r1: float
    r2: float
    s: float

    def __post_init__(self):
        r1, r2, s = float(self.r1), float(self.r2), float(self.s)
        if not (0 < r1 <= 1 and 0 < r2 <= 1):
            raise ValidationError(f"rates must lie in (0, 1], got r1={r1}, r2={r2}")
        if not 0 <= s <= min(r1, r2):
            raise ValidationError(f"s={s} must lie in [0, min(r1, r2)]")
        if r1 + r2 - s > 1 + _RATE_SLACK:
            raise ValidationError(f"union rate r1 + r2 - s = {r1 + r2 - s} exceeds 1")
        object.__setattr__(self, "r1", r1)
        object.__setattr__(self, "r2", r2)
        object.__setattr__(self, "s", s)

    @classmethod
    def from_counts(cls, f1, f2, a, D) -> "RateTriple":
        return cls(f1 / D, f2 / D, a / D)

    @property
    def u(self) -> float:
        return self.r1 + self.r2 - self.s

    def swapped(self) -> "RateTriple":
        return RateTriple(self.r2, self.r1, self.s)

    def with_s(self, s: float) -> "RateTriple":
        return RateTriple(self.r1, self.r2, s)


def s_domain(r1: float, r2: float) -> tuple:
    """Feasible range of s for fixed marginal rates."""
    return max(0.0, r1 + r2 - 1.0), min(r1, r2)


def _check_rates(rates):
    if isinstance(rates, RateTriple):
        return rates.r1, rates.r2, rates.s
    r1, r2, s = (float(x) for x in rates)
    return r1, r2, s


def _pow1m(x, e):
    """(1 - x)**e for 0 <= x <= 1, e >= 0, with 0**0 == 1."""
    e = np.asarray(e, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.exp(e * np.log1p(-x))
    return np.where(e == 0, 1.0, out)


def _one_minus_pow1m(x, n):
    """1 - (1 - x)**n, accurate for small x."""
    with np.errstate(divide="ignore"):
        return -np.expm1(n * np.log1p(-x))


def _pow_gap(w, gap, n):
    """(w + gap)**n - w**n for w >= 0, gap >= 0, without cancellation."""
    if gap <= 0:
        return 0.0
    if w <= 0:
        return gap**n
    ln_w = n * np.log(w)
    delta = n * np.log1p(gap / w)
    if delta > 30:
        lg = ln_w + delta + np.log1p(-np.exp(-delta))
    else:
        lg = ln_w + np.log(np.expm1(delta))
    return float(np.exp(lg))


def _parts(b, r1, r2, s):
    n = float(2**b)
    u = r1 + r2 - s
    if not u > 0:
        raise ValidationError("both sets are empty at rate level (r1 + r2 - s = 0)")
    w = max(0.0, 1.0 - u)
    return n, u, w, _one_minus_pow1m(r1, n), _one_minus_pow1m(r2, n), _one_minus_pow1m(u, n)


def _geo(t, u, w, gu):
    # u (1-u)^t / (1 - (1-u)^n)
    return u * _pow1m(u, t) / gu


def _diag_weight(b, r1, r2, s):
    """R + P_lt * C2 + P_gt * C1 (the diagonal mass before the geometric split)."""
    n, u, w, g1, g2, gu = _parts(b, r1, r2, s)
    c1 = r1 * float(_pow1m(r1, n - 1)) / g1
    c2 = r2 * float(_pow1m(r2, n - 1)) / g2
    return (s + (r1 - s) * c2 + (r2 - s) * c1) / u


def cell_matrix(b: int, rates) -> np.ndarray:
    """The full 2**b x 2**b matrix of P(u1 = t, u2 = d)."""
    if not 1 <= b <= MAX_TABLE_BITS:
        raise ValidationError(f"full table needs 1 <= b <= {MAX_TABLE_BITS}, got {b}")
    r1, r2, s = _check_rates(rates)
    return _cell_matrix(b, r1, r2, s)


def _cell_matrix(b, r1, r2, s):
    n, u, w, g1, g2, gu = _parts(b, r1, r2, s)
    idx = np.arange(int(n))
    t, d = idx[:, None], idx[None, :]
    geo = _geo(idx, u, w, gu)
    g_t, g_d = geo[:, None], geo[None, :]
    p_lt, p_gt = (r1 - s) / u, (r2 - s) / u
    # the geometric gap exponents are (d - t - 1) mod n and (t - d - 1) mod n
    fwd2 = p_lt * r2 * _pow1m(r2, idx) / g2
    fwd1 = p_gt * r1 * _pow1m(r1, idx) / g1
    nn = int(n)
    out = fwd2[(d - t - 1) % nn] * g_t + fwd1[(t - d - 1) % nn] * g_d
    out[idx, idx] = _diag_weight(b, r1, r2, s) * geo
    return out


def cell_prob(b: int, rates, t: int, d: int) -> float:
    r1, r2, s = _check_rates(rates)
    n = 2**b
    if not (0 <= t < n and 0 <= d < n):
        raise ValidationError(f"cell ({t}, {d}) outside a {n}x{n} table")
    nf, u, w, g1, g2, gu = _parts(b, r1, r2, s)
    p_lt, p_gt = (r1 - s) / u, (r2 - s) / u
    if t == d:
        return float(_diag_weight(b, r1, r2, s) * _geo(t, u, w, gu))
    g_t, g_d = float(_geo(t, u, w, gu)), float(_geo(d, u, w, gu))
    if t < d:
        e2, e1 = d - t - 1, t + n - d - 1
    else:
        e2, e1 = d + n - t - 1, t - d - 1
    return float(p_lt * r2 * _pow1m(r2, e2) / g2 * g_t + p_gt * r1 * _pow1m(r1, e1) / g1 * g_d)


def diag_probs(b: int, rates) -> np.ndarray:
    """P(u1 = u2 = t) for t = 0 .. 2**b - 1."""
    if not 1 <= b <= MAX_DIAG_BITS:
        raise ValidationError(f"diagonal cells need 1 <= b <= {MAX_DIAG_BITS}, got {b}")
    r1, r2, s = _check_rates(rates)
    n, u, w, g1, g2, gu = _parts(b, r1, r2, s)
    return _diag_weight(b, r1, r2, s) * _geo(np.arange(int(n)), u, w, gu)


def p_lt_closed_form(b: int, rates) -> float:
    """P(u1 < u2) from the geometric-sum closed form.

    P_lt = (r1-s) / (G2 Gu) * A + (1-r1)^(n-1) / G1 * (r2-s) / Gu * B with

        A = (1 - (1-u)^n) / u - ((1-r2)^n - (1-u)^n) / (r1 - s)
        B = ((1-r1)^n - (1-u)^n) / (r2 - s) * (1-r1)^(1-n) - (1 - (1-u)^n) / u

    Rearranged so that the (r1 - s) and (r2 - s) factors cancel analytically
    and no division by them occurs.
    """
    r1, r2, s = _check_rates(rates)
    n, u, w, g1, g2, gu = _parts(b, r1, r2, s)
    gap2 = _pow_gap(w, r1 - s, n)  # (1-r2)^n - (1-u)^n
    gap1 = _pow_gap(w, r2 - s, n)  # (1-r1)^n - (1-u)^n
    term1 = ((r1 - s) / u - gap2 / gu) / g2
    term2 = (gap1 / gu - (r2 - s) * float(_pow1m(r1, n - 1)) / u) / g1
    return float(term1 + term2)


def p_lt_by_sums(b: int, rates) -> float:
    """P(u1 < u2) as an O(2**b) sum of non-negative terms (no cancellation)."""
    if not 1 <= b <= MAX_DIAG_BITS:
        raise ValidationError(f"summation form needs b <= {MAX_DIAG_BITS}")
    r1, r2, s = _check_rates(rates)
    n, u, w, g1, g2, gu = _parts(b, r1, r2, s)
    t = np.arange(int(n), dtype=float)
    wt = _pow1m(u, t)
    with np.errstate(divide="ignore"):
        tail2 = -np.expm1((n - 1 - t) * np.log1p(-r2))       # 1 - (1-r2)^(n-1-t)
        head1 = -np.expm1(t * np.log1p(-r1))                 # 1 - (1-r1)^t
    term1 = (r1 - s) / (g2 * gu) * np.sum(wt * tail2)
    term2 = (r2 - s) / (g1 * gu) * np.sum(wt * _pow1m(r1, n - 1 - t) * head1)
    return float(term1 + term2)


def _p_lt_mp(b, r1, r2, s, digits):
    with mpmath.workdps(digits):
        r1, r2, s = mpmath.mpf(r1), mpmath.mpf(r2), mpmath.mpf(s)
        n = mpmath.mpf(2) ** b
        u = r1 + r2 - s
        w, q1, q2 = 1 - u, 1 - r1, 1 - r2
        gu, g1, g2 = 1 - w**n, 1 - q1**n, 1 - q2**n
        term1 = ((r1 - s) / u - (q2**n - w**n) / gu) / g2
        term2 = ((q1**n - w**n) / gu - (r2 - s) * q1 ** (n - 1) / u) / g1
        return float(term1 + term2)


def p_lt(b: int, rates) -> float:
    """P(u1 < u2), choosing a numerically safe evaluation path."""
    r1, r2, s = _check_rates(rates)
    n = 2.0**b
    if n * min(r1, r2) >= _CANCEL_LIMIT:
        return p_lt_closed_form(b, (r1, r2, s))
    if b <= MAX_DIAG_BITS:
        return p_lt_by_sums(b, (r1, r2, s))
    lost = -np.log10(n * min(r1, r2))
    return _p_lt_mp(b, r1, r2, s, int(30 + lost))


def summary_probs(b: int, rates) -> tuple:
    """(P_eq_b, P_lt_b, P_gt_b).

    P_gt_b is P_lt_b with the two sets swapped; P_eq_b is the diagonal mass
    ``R + P_lt * C2 + P_gt * C1`` (equal to 1 - P_lt_b - P_gt_b).
    """
    if not 1 <= b <= MAX_SUMMARY_BITS:
        raise ValidationError(f"b must be in [1, {MAX_SUMMARY_BITS}], got {b}")
    r1, r2, s = _check_rates(rates)
    lt = p_lt(b, (r1, r2, s))
    gt = p_lt(b, (r2, r1, s))
    eq = _diag_weight(b, r1, r2, s)
    return float(eq), lt, gt


@dataclass(frozen=True)
class GroupingScheme:
    """One of the five cell groupings of the b-bit table.

    ``full``: all 2**(2b) cells. ``do``: diagonal cells plus the two
    off-diagonal sums. ``d``: diagonal cells plus the off-diagonal total.
    ``three``: diagonal total and the two off-diagonal sums. ``eq``: diagonal
    total and its complement.
    """

    tag: str
    b: int

    def __post_init__(self):
        if self.tag not in SCHEMES:
            raise ValidationError(f"unknown scheme {self.tag!r}; expected one of {SCHEMES}")
        limit = {"full": MAX_TABLE_BITS, "do": MAX_DIAG_BITS, "d": MAX_DIAG_BITS}.get(self.tag, MAX_SUMMARY_BITS)
        if not 1 <= self.b <= limit:
            raise ValidationError(f"scheme {self.tag!r} supports 1 <= b <= {limit}, got {self.b}")

    @property
    def m(self) -> int:
        n = 2**self.b
        return {"full": n * n, "do": n + 2, "d": n + 1, "three": 3, "eq": 2}[self.tag]


def grouped_probs(scheme: GroupingScheme, rates) -> np.ndarray:
    b = scheme.b
    if scheme.tag == "full":
        return cell_matrix(b, rates).ravel()
    r1, r2, s = _check_rates(rates)
    eq, lt, gt = summary_probs(b, (r1, r2, s))
    if scheme.tag == "three":
        return np.array([eq, lt, gt])
    if scheme.tag == "eq":
        return np.array([eq, lt + gt])
    diag = diag_probs(b, (r1, r2, s))
    if scheme.tag == "do":
        return np.concatenate([diag, [lt, gt]])
    return np.concatenate([diag, [lt + gt]])


def group_matrix(matrix: np.ndarray, tag: str) -> np.ndarray:
    """Collapse a full table (of probabilities, derivatives or counts) by scheme."""
    if tag == "full":
        return matrix.ravel()
    diag = np.diagonal(matrix, axis1=-2, axis2=-1)
    lt = np.triu(matrix, 1).sum(axis=(-2, -1))
    gt = np.tril(matrix, -1).sum(axis=(-2, -1))
    if tag == "do":
        return np.concatenate([diag, [lt, gt]])
    if tag == "d":
        return np.concatenate([diag, [lt + gt]])
    if tag == "three":
        return np.array([diag.sum(), lt, gt])
    if tag == "eq":
        return np.array([diag.sum(), lt + gt])
    raise ValidationError(f"unknown scheme {tag!r}")


def grouped_counts(table: ContingencyTable, scheme: GroupingScheme) -> np.ndarray:
    if table.b != scheme.b:
        raise ValidationError(f"table has b={table.b} but scheme expects b={scheme.b}")
    tag = scheme.tag
    if tag == "full":
        if table.counts is None:
            raise ValidationError("full scheme needs the full contingency table")
        return table.counts.ravel().astype(np.int64)
    if tag == "three":
        return np.array([table.k_eq, table.k_lt, table.k_gt], dtype=np.int64)
    if tag == "eq":
        return np.array([table.k_eq, table.k_lt + table.k_gt], dtype=np.int64)
    if table.diag is None:
        raise ValidationError(f"scheme {tag!r} needs per-value diagonal counts")
    tail = [table.k_lt, table.k_gt] if tag == "do" else [table.k_lt + table.k_gt]
    return np.concatenate([table.diag, tail]).astype(np.int64)


def bbit_eq_inverse(b: int, r1: float, r2: float, p_eq: float) -> float:
    """Invert P_eq_b(s) = p_eq for s (the 2-cell estimator in closed form).

    P_eq_b(s) = (s (1 - C1 - C2) + r1 C2 + r2 C1) / (r1 + r2 - s) with C1, C2
    independent of s, so the inverse is a linear-fractional map.
    """
    n = 2.0**b
    c1 = r1 * float(_pow1m(r1, n - 1)) / _one_minus_pow1m(r1, n)
    c2 = r2 * float(_pow1m(r2, n - 1)) / _one_minus_pow1m(r2, n)
    return float((p_eq * (r1 + r2) - r1 * c2 - r2 * c1) / (1.0 - c1 - c2 + p_eq))
