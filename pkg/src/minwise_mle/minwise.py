"""Estimators of the intersection size from full minwise sketches.

Comparing two sketches permutation by permutation yields the counts
``(k_eq, k_lt, k_gt)``, a 3-cell multinomial sample with probabilities

    P_eq = a / (f1 + f2 - a),  P_lt = (f1 - a) / (f1 + f2 - a),  P_gt = (f2 - a) / (f1 + f2 - a).

Each single cell yields a simple estimator of ``a``; the maximum-likelihood
estimator combines all three. Variances are the leading O(1/k) terms.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import PairCounts3, PairGroundTruth, ValidationError, validate_ground_truth

SIMPLE_ESTIMATORS = ("eq", "lt", "gt")


class BoundaryError(ValidationError):
    """A simple estimator is undefined for the observed counts."""


@dataclass(frozen=True)
class EstimateResult:
    a_hat: float
    r_hat: float
    t_hat: float
    var_asymptotic: float
    estimator_tag: str
    f1: float
    f2: float
    k: int
    a_hat_raw: Optional[float] = None
    at_boundary: bool = False

    @property
    def se(self) -> float:
        return float(np.sqrt(self.var_asymptotic))


def _as_gt(gt) -> PairGroundTruth:
    if isinstance(gt, PairGroundTruth):
        return gt
    return validate_ground_truth(*gt)


def _result(a_hat, f1, f2, var, tag, k, raw=None, at_boundary=False) -> EstimateResult:
    a_hat = float(a_hat)
    return EstimateResult(
        a_hat=a_hat,
        r_hat=a_hat / (f1 + f2 - a_hat),
        t_hat=a_hat / min(f1, f2),
        var_asymptotic=float(var),
        estimator_tag=tag,
        f1=f1,
        f2=f2,
        k=k,
        a_hat_raw=a_hat if raw is None else float(raw),
        at_boundary=at_boundary,
    )


def three_cell_probs(gt) -> tuple:
    """(P_eq, P_lt, P_gt); exact Fractions when the cardinalities are integers."""
    gt = _as_gt(gt)
    if gt.union == 0:
        raise ValidationError("both sets are empty")
    return gt.three_cell()


def _variance_terms(f1, f2, a):
    u = f1 + f2 - a
    return {
        "eq": u * u * a * (f1 + f2 - 2 * a) / (f1 + f2) ** 2,
        "lt": u * u * (f1 - a) / f2,
        "gt": u * u * (f2 - a) / f1,
    }


def variance_simple(gt, k: int, which: str) -> float:
    """Leading-order variance of a single-cell estimator.

    ``which`` is one of ``eq``, ``lt``, ``gt`` (variance of the estimate of
    ``a``) or ``classic_R`` (variance of the collision-rate estimate of R).
    """
    gt = _as_gt(gt)
    if k < 1:
        raise ValidationError("k must be >= 1")
    f1, f2, a = float(gt.f1), float(gt.f2), float(gt.a)
    if which == "classic_R":
        r = a / (f1 + f2 - a)
        return r * (1.0 - r) / k
    try:
        return _variance_terms(f1, f2, a)[which] / k
    except KeyError:
        raise ValidationError(f"unknown estimator {which!r}") from None


def variance_mle3(gt, k: int) -> float:
    """Leading-order variance of the 3-cell MLE; 0.0 when ``a`` is at a boundary.

    At ``a = 0`` or ``a = min(f1, f2)`` the Fisher information diverges, so the
    O(1/k) term vanishes; use :func:`mle3_at_boundary` to tell the cases apart.
    """
    gt = _as_gt(gt)
    if k < 1:
        raise ValidationError("k must be >= 1")
    if mle3_at_boundary(gt):
        return 0.0
    f1, f2, a = float(gt.f1), float(gt.f2), float(gt.a)
    u = f1 + f2 - a
    return u * u / ((f1 + f2) / a + f2 / (f1 - a) + f1 / (f2 - a)) / k


def mle3_at_boundary(gt) -> bool:
    gt = _as_gt(gt)
    return gt.a <= 0 or gt.a >= min(gt.f1, gt.f2)


def estimate_simple(counts: PairCounts3, f1, f2, which: str) -> EstimateResult:
    k = counts.k
    f1, f2 = float(f1), float(f2)
    if which == "eq":
        raw = (f1 + f2) * counts.k_eq / (k + counts.k_eq)
    elif which == "lt":
        if counts.k_lt >= k:
            raise BoundaryError("k_lt == k: the less-than estimator is undefined")
        raw = f1 - f2 * counts.k_lt / (k - counts.k_lt)
    elif which == "gt":
        if counts.k_gt >= k:
            raise BoundaryError("k_gt == k: the greater-than estimator is undefined")
        raw = f2 - f1 * counts.k_gt / (k - counts.k_gt)
    else:
        raise ValidationError(f"unknown estimator {which!r}")
    m = min(f1, f2)
    a_hat = min(max(raw, 0.0), m)
    var = _variance_terms(f1, f2, a_hat)[which] / k
    return _result(a_hat, f1, f2, var, which, k, raw=raw)


def mle3_score(a, k_eq, k_lt, k_gt, f1, f2):
    """Derivative of the 3-cell log-likelihood in ``a`` (up to a positive factor)."""
    with np.errstate(divide="ignore", invalid="ignore"):
        return k_eq * (f1 + f2) / a - k_lt * f2 / (f1 - a) - k_gt * f1 / (f2 - a)


def mle3_roots(k_eq, k_lt, k_gt, f1, f2, rtol: float = 1e-12, max_iter: int = 200):
    """Vectorised 3-cell MLE of ``a`` by bisection on the score.

    The score is strictly decreasing on (0, min(f1, f2)); if it has no sign
    change the likelihood is monotone and the matching boundary is returned.
    Arrays broadcast against each other.
    """
    k_eq, k_lt, k_gt, f1, f2 = np.broadcast_arrays(
        *(np.asarray(x, dtype=float) for x in (k_eq, k_lt, k_gt, f1, f2)))
    m = np.minimum(f1, f2)
    eps = m * rtol
    lo, hi = eps.copy(), m - eps
    g_lo = mle3_score(lo, k_eq, k_lt, k_gt, f1, f2)
    g_hi = mle3_score(hi, k_eq, k_lt, k_gt, f1, f2)
    at_zero = (k_eq == 0) | (g_lo <= 0)
    at_top = ~at_zero & (((k_lt == 0) & (k_gt == 0)) | (g_hi >= 0))
    active = ~(at_zero | at_top)
    for _ in range(max_iter):
        if not np.any(active & (hi - lo > m * rtol)):
            break
        mid = 0.5 * (lo + hi)
        pos = mle3_score(mid, k_eq, k_lt, k_gt, f1, f2) > 0
        lo = np.where(active & pos, mid, lo)
        hi = np.where(active & ~pos, mid, hi)
    root = 0.5 * (lo + hi)
    root = np.where(at_zero, 0.0, np.where(at_top, m, root))
    return root, at_zero | at_top


def estimate_mle3(counts: PairCounts3, f1, f2) -> EstimateResult:
    f1, f2 = float(f1), float(f2)
    root, boundary = mle3_roots(counts.k_eq, counts.k_lt, counts.k_gt, f1, f2)
    a_hat, boundary = float(root), bool(boundary)
    var = 0.0 if boundary else variance_mle3(PairGroundTruth(f1, f2, a_hat), counts.k)
    return _result(a_hat, f1, f2, var, "mle", counts.k, at_boundary=boundary)
