"""One-parameter multinomial maximum likelihood.

A :class:`CellModel` maps a scalar parameter to ``m`` cell probabilities.
Given observed cell counts, :func:`solve_mle` maximises
``l(theta) = sum_i k_i log q_i(theta)`` and reports the Fisher information
``I(theta) = k * sum_i q_i'(theta)**2 / q_i(theta)`` at the optimum.

Cell derivatives are numerical: central differences at steps ``h`` and ``h/2``
combined by one Richardson extrapolation (fourth-order accurate).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

from . import bbit
from .core import ValidationError

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
_TINY_PROB = 1e-300
_ONSET_SLOPE = 1e-8
_GRID_POINTS = 4096
_PROBES = 17


class FlatLikelihoodError(ValidationError):
    """The model's cell probabilities do not depend on the parameter."""


@dataclass(frozen=True)
class CellModel:
    """Cell probabilities ``prob(theta)`` over the closed domain ``[lo, hi]``.

    ``step`` is the base finite-difference step; it is shrunk near the domain
    edges so that every evaluation stays inside ``[lo, hi]``.
    """

    m: int
    prob: Callable[[float], np.ndarray]
    lo: float
    hi: float
    step: float
    name: str = ""

    def __post_init__(self):
        if not self.hi > self.lo:
            raise ValidationError(f"empty parameter domain [{self.lo}, {self.hi}]")
        if not self.step > 0:
            raise ValidationError("derivative step must be positive")

    def __call__(self, theta: float) -> np.ndarray:
        return np.asarray(self.prob(theta), dtype=float)

    @property
    def width(self) -> float:
        return self.hi - self.lo


@dataclass(frozen=True)
class MleSolution:
    theta_hat: float
    log_lik: float
    fisher_info: float
    var_asymptotic: float
    at_boundary: bool
    k: int
    used_grid_fallback: bool = False
    evaluations: int = field(default=0, compare=False)

    @property
    def se(self) -> float:
        return math.sqrt(self.var_asymptotic)


def _interior_step(model: CellModel, theta: float) -> float:
    room = min(theta - model.lo, model.hi - theta)
    return min(model.step, 0.45 * room)


def cell_derivatives(model: CellModel, theta: float, h: Optional[float] = None):
    """(q, dq/dtheta) at ``theta`` by Richardson-extrapolated central differences."""
    if h is None:
        h = _interior_step(model, theta)
    if not h > 0:
        raise ValidationError(f"theta={theta} is on the domain boundary; no room for a central difference")
    q = model(theta)
    d_h = (model(theta + h) - model(theta - h)) / (2.0 * h)
    h2 = 0.5 * h
    d_h2 = (model(theta + h2) - model(theta - h2)) / (2.0 * h2)
    return q, (4.0 * d_h2 - d_h) / 3.0


def log_likelihood(model: CellModel, counts, theta: float) -> float:
    """sum k_i log q_i(theta); ``-inf`` if an observed cell has probability 0."""
    counts = np.asarray(counts, dtype=float)
    if counts.shape != (model.m,):
        raise ValidationError(f"expected {model.m} counts, got shape {counts.shape}")
    mask = counts > 0
    if not mask.any():
        return 0.0
    q = model(theta)[mask]
    if np.any(q <= 0):
        return -math.inf
    return float(np.dot(counts[mask], np.log(q)))


def score(model: CellModel, counts, theta: float) -> float:
    counts = np.asarray(counts, dtype=float)
    q, dq = cell_derivatives(model, theta)
    mask = counts > 0
    return float(np.sum(counts[mask] * dq[mask] / q[mask]))


def _inside(model: CellModel, theta: float) -> tuple:
    # evaluation point at least two base steps from either edge
    margin = min(2.0 * model.step, 0.25 * model.width)
    lo, hi = model.lo + margin, model.hi - margin
    shifted = min(max(theta, lo), hi)
    return shifted, shifted != theta


def information_from_derivatives(q, dq, k: float = 1.0) -> float:
    q = np.asarray(q, dtype=float)
    dq = np.asarray(dq, dtype=float)
    keep = q > _TINY_PROB
    return float(k * np.sum(dq[keep] ** 2 / q[keep]))


def fisher_info(model: CellModel, theta: float, k: float = 1.0) -> float:
    """Expected information ``k * sum q_i'^2 / q_i``.

    Cells with ``q_i < 1e-300`` are skipped. Near the domain edge (where the
    information may diverge) it is evaluated two derivative steps inside.
    """
    value, _ = fisher_info_detail(model, theta, k)
    return value


def _edge_of(model: CellModel, theta: float, at: float) -> float:
    return model.lo if theta < at else model.hi


def _diverging(q_edge, q_inside, dist: float) -> bool:
    """A cell that is zero at the edge and grows linearly away from it adds
    q'^2 / q ~ 1 / distance, so the information is infinite at the edge.
    Cells that are merely tiny (underflow) have a negligible slope."""
    slope = np.asarray(q_inside) / dist
    return bool(np.any((np.asarray(q_edge) <= _TINY_PROB) & (slope > _ONSET_SLOPE)))


def information_diverges(model: CellModel, theta: float) -> bool:
    """True when ``theta`` is at a domain edge where the information is infinite."""
    at, shifted = _inside(model, theta)
    if not shifted or not (theta <= model.lo or theta >= model.hi):
        return False
    edge = _edge_of(model, theta, at)
    return _diverging(model(edge), model(at), abs(at - edge))


def fisher_info_detail(model: CellModel, theta: float, k: float = 1.0) -> tuple:
    """(information, shifted) where ``shifted`` flags a boundary evaluation."""
    at, shifted = _inside(model, theta)
    q, dq = cell_derivatives(model, at)
    return information_from_derivatives(q, dq, k), shifted


def _golden(fn, a, b, tol, record):
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = fn(c), fn(d)
    record.extend([(c, fc), (d, fd)])
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = fn(c)
            record.append((c, fc))
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = fn(d)
            record.append((d, fd))
    return (c, fc) if fc >= fd else (d, fd)


def _check_not_flat(model: CellModel):
    pts = np.linspace(model.lo, model.hi, 5)
    base = model(pts[0])
    if all(np.allclose(model(p), base, rtol=1e-14, atol=0) for p in pts[1:]):
        raise FlatLikelihoodError(f"cell probabilities of {model.name or 'model'} are constant in theta")


def solve_mle(model: CellModel, counts) -> MleSolution:
    """Maximum-likelihood estimate of the model parameter.

    Golden-section search on the log-likelihood, a consistency check against
    evenly spaced probes (falling back to a 4096-point grid scan if the
    likelihood turns out not to be unimodal), then a bracketed root of the score.
    """
    counts = np.asarray(counts, dtype=float)
    if counts.shape != (model.m,):
        raise ValidationError(f"expected {model.m} counts, got shape {counts.shape}")
    if np.any(counts < 0):
        raise ValidationError("counts must be non-negative")
    k = float(counts.sum())
    if k < 1:
        raise ValidationError("need at least one observation")
    _check_not_flat(model)

    record: list = []

    def ll(theta):
        return log_likelihood(model, counts, theta)

    tol = 1e-12 * max(1e-12, abs(model.hi))
    x, fx = _golden(ll, model.lo, model.hi, tol, record)

    probes = [(p, ll(p)) for p in np.linspace(model.lo, model.hi, _PROBES)]
    record.extend(probes)
    slack = 1e-9 * (1.0 + abs(fx)) if math.isfinite(fx) else 0.0
    best_probe = max(probes, key=lambda t: t[1])
    fallback = best_probe[1] > fx + slack
    if fallback:
        grid = np.linspace(model.lo, model.hi, _GRID_POINTS)
        vals = np.array([ll(g) for g in grid])
        i = int(np.argmax(vals))
        lo_i, hi_i = max(i - 1, 0), min(i + 1, _GRID_POINTS - 1)
        x, fx = _golden(ll, grid[lo_i], grid[hi_i], tol, record)
        if vals[i] > fx:
            x, fx = grid[i], vals[i]

    # snap to an edge when the likelihood is monotone there
    edge_tol = 1e-9 * max(abs(model.hi), model.width)
    at_boundary = False
    for edge in (model.lo, model.hi):
        if abs(x - edge) <= edge_tol:
            fe = ll(edge)
            if fe >= fx - slack:
                x, fx, at_boundary = edge, fe, True
            break

    if not at_boundary:
        x, fx = _polish(model, counts, x, fx, ll)

    info, _ = fisher_info_detail(model, x, k)
    var = 1.0 / info if info > 0 else math.inf
    return MleSolution(
        theta_hat=float(x),
        log_lik=float(fx),
        fisher_info=info,
        var_asymptotic=var,
        at_boundary=at_boundary,
        k=int(round(k)),
        used_grid_fallback=fallback,
        evaluations=len(record),
    )


def _polish(model, counts, x, fx, ll):
    """Refine an interior optimum by root-finding on the score."""
    delta = 1e-6 * model.width
    a, b = max(model.lo, x - delta), min(model.hi, x + delta)
    if not (a > model.lo and b < model.hi):
        return x, fx
    try:
        sa, sb = score(model, counts, a), score(model, counts, b)
    except ValidationError:
        return x, fx
    if not (sa > 0 > sb):
        return x, fx
    root = brentq(lambda t: score(model, counts, t), a, b, xtol=1e-15 * max(1.0, abs(b)), rtol=4 * np.finfo(float).eps)
    froot = ll(root)
    if froot + 1e-12 * (1.0 + abs(fx)) < fx:
        return x, fx
    return root, froot


def binomial_model() -> CellModel:
    return CellModel(2, lambda p: np.array([p, 1.0 - p]), 0.0, 1.0, step=1e-3, name="binomial")


def minwise_model(f1: float, f2: float) -> CellModel:
    """3-cell model of full minwise hashing with the intersection ``a`` as parameter."""
    f1, f2 = float(f1), float(f2)

    def prob(a):
        u = f1 + f2 - a
        return np.array([a / u, (f1 - a) / u, (f2 - a) / u])

    m = min(f1, f2)
    return CellModel(3, prob, 0.0, m, step=1e-3 * m, name="minwise-3")


def bbit_step(b: int, r1: float, r2: float) -> float:
    """Finite-difference step for the b-bit models (``b`` kept for callers)."""
    lo, hi = bbit.s_domain(r1, r2)
    w = max(1.0 - max(r1, r2), 1e-3)
    return 1e-3 * min(hi - lo, min(r1, r2), w)


def bbit_model(scheme, r1: float, r2: float) -> CellModel:
    """Cells of a b-bit grouping scheme with ``s`` (intersection rate) as parameter."""
    if isinstance(scheme, str):
        raise ValidationError("pass a GroupingScheme")
    r1, r2 = float(r1), float(r2)
    lo, hi = bbit.s_domain(r1, r2)

    def prob(s):
        return bbit.grouped_probs(scheme, (r1, r2, s))

    return CellModel(scheme.m, prob, lo, hi, step=bbit_step(scheme.b, r1, r2),
                     name=f"bbit-{scheme.tag}-b{scheme.b}")


def scheme_informations(b: int, r1: float, r2: float, s: float, tags=bbit.SCHEMES, k: float = 1.0) -> dict:
    """Fisher information of several grouping schemes at one point.

    Uses one set of full-table evaluations for all schemes (grouping is linear
    so grouped derivatives are grouped full-table derivatives). Needs b <= 8.
    At a domain edge where a scheme's information diverges it is reported as
    ``inf``; otherwise edge points are evaluated two derivative steps inside.
    """
    lo, hi = bbit.s_domain(r1, r2)
    model = CellModel((2**b) ** 2, lambda x: bbit.cell_matrix(b, (r1, r2, x)), lo, hi,
                      step=bbit_step(b, r1, r2))
    at, shifted = _inside(model, s)
    q, dq = cell_derivatives(model, at)
    edge = _edge_of(model, s, at)
    q_edge = model(edge) if shifted and (s <= lo or s >= hi) else None
    out = {}
    for tag in tags:
        gq = bbit.group_matrix(q, tag)
        if q_edge is not None and _diverging(bbit.group_matrix(q_edge, tag), gq, abs(at - edge)):
            out[tag] = math.inf
        else:
            out[tag] = information_from_derivatives(gq, bbit.group_matrix(dq, tag), k)
    return out
