"""Variance-ratio grids and Monte Carlo experiments on synthetic pairs.

The grids are parameterised by the ratio ``r2/r1`` (equal to ``f2/f1``) and
the containment ``s/r2`` (equal to ``T = a/f2``). For plain minwise hashing
(``b = 0``) the ratios come from the closed-form variances; for b-bit hashing
they are ratios of inverse Fisher informations between grouping schemes.
All variances are leading O(1/k) terms, so the ratios do not depend on k.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import bbit, minwise, oracle
from .core import ContingencyTable, PairGroundTruth, SetRecord, ValidationError, validate_ground_truth
from .hashing import HashFamily, finalize_int, low_bits, sketch_minwise, table_from_values
from .mle import bbit_model, fisher_info, scheme_informations, solve_mle

MINWISE_VARIANTS = ("eq", "lt", "gt", "mle")
DEFAULT_MINWISE_COMPARISONS = (("eq", "mle"), ("lt", "mle"), ("gt", "mle"), ("gt", "lt"))
DEFAULT_BBIT_COMPARISONS = (("do", "full"), ("d", "full"), ("three", "full"), ("eq", "full"))
GRID_BITS = (0, 1, 2, 4, 6, 8)

# the standard test grid shared by the property checks
STANDARD_BITS = (1, 2, 4, 6, 8)
STANDARD_R1 = (0.2, 0.5, 0.8)
STANDARD_RATIO_AXIS = tuple(np.round(np.linspace(0.1, 1.0, 10), 12))
STANDARD_CONTAINMENT_AXIS = tuple(np.round(np.linspace(0.0, 0.99, 10), 12))


def default_axes(resolution: int = 50) -> tuple:
    """(r2/r1 axis, s/r2 axis) with ``resolution`` points each."""
    if resolution < 2:
        raise ValidationError("grid resolution must be at least 2")
    return tuple(np.linspace(0.02, 1.0, resolution)), tuple(np.linspace(0.0, 0.99, resolution))


def standard_grid(bits=STANDARD_BITS, r1_values=STANDARD_R1,
                  ratio_axis=STANDARD_RATIO_AXIS, containment_axis=STANDARD_CONTAINMENT_AXIS):
    """Feasible (b, r1, r2, s) points of the standard grid.

    Points with ``r1 + r2 - s > 1`` cannot occur for sets in one universe and
    are skipped.
    """
    for b in bits:
        for r1 in r1_values:
            for ratio in ratio_axis:
                r2 = r1 * ratio
                for c in containment_axis:
                    s = c * r2
                    if r1 + r2 - s <= 1.0:
                        yield b, r1, r2, s


def comparison_name(pair) -> str:
    return f"{pair[0]}/{pair[1]}"


@dataclass(frozen=True)
class VarianceGridSpec:
    """Grid over (r2/r1, s/r2) at fixed ``b`` and ``r1``.

    ``comparisons`` holds (numerator, denominator) estimator pairs. For
    ``b = 0`` the names are ``eq``, ``lt``, ``gt``, ``mle``; otherwise they
    are grouping schemes (``full``, ``do``, ``d``, ``three``, ``eq``).
    """

    b: int
    r1: float
    ratio_axis: Sequence[float]
    containment_axis: Sequence[float]
    comparisons: Sequence[tuple] = ()

    def __post_init__(self):
        if self.b not in GRID_BITS:
            raise ValidationError(f"b must be one of {GRID_BITS}, got {self.b}")
        if not 0 < self.r1 <= 1:
            raise ValidationError(f"r1 must lie in (0, 1], got {self.r1}")
        if not self.ratio_axis or not self.containment_axis:
            raise ValidationError("grid axes must be non-empty")
        if any(not 0 < x <= 1 for x in self.ratio_axis):
            raise ValidationError("r2/r1 values must lie in (0, 1]")
        if any(not 0 <= x <= 1 for x in self.containment_axis):
            raise ValidationError("s/r2 values must lie in [0, 1]")
        comps = tuple(tuple(c) for c in (self.comparisons or self.default_comparisons()))
        names = MINWISE_VARIANTS if self.b == 0 else bbit.SCHEMES
        for pair in comps:
            if len(pair) != 2 or any(p not in names for p in pair):
                raise ValidationError(f"invalid comparison {pair!r} for b={self.b}; names: {names}")
        object.__setattr__(self, "comparisons", comps)
        object.__setattr__(self, "ratio_axis", tuple(float(x) for x in self.ratio_axis))
        object.__setattr__(self, "containment_axis", tuple(float(x) for x in self.containment_axis))

    def default_comparisons(self):
        return DEFAULT_MINWISE_COMPARISONS if self.b == 0 else DEFAULT_BBIT_COMPARISONS

    @classmethod
    def with_resolution(cls, b: int, r1: float, resolution: int = 50, comparisons=()) -> "VarianceGridSpec":
        ratio_axis, containment_axis = default_axes(resolution)
        return cls(b, r1, ratio_axis, containment_axis, comparisons)

    @property
    def columns(self) -> list:
        return ["r2_over_r1", "s_over_r2"] + [comparison_name(c) for c in self.comparisons] + ["status"]


def minwise_variances(f1: float, f2: float, a: float) -> dict:
    """Unit-k variances of the three simple estimators and the MLE."""
    gt = PairGroundTruth(f1, f2, a)
    out = {w: minwise.variance_simple(gt, 1, w) for w in minwise.SIMPLE_ESTIMATORS}
    out["mle"] = minwise.variance_mle3(gt, 1)
    return out


def bbit_variances(b: int, r1: float, r2: float, s: float, tags) -> dict:
    info = scheme_informations(b, r1, r2, s, tags=tuple(tags))
    return {t: (1.0 / i if i > 0 else math.inf) for t, i in info.items()}


def _ratio(num: float, den: float) -> tuple:
    if den == 0 or not math.isfinite(den) or not math.isfinite(num):
        return math.nan, False
    return num / den, True


def variance_ratio_grid(spec: VarianceGridSpec) -> list:
    """One dict per grid point, in axis order (ratio axis outer).

    ``status`` is ``ok``, ``boundary`` (a denominator variance is zero or
    infinite, the ratio is NaN) or ``infeasible`` (``r1 + r2 - s > 1``).
    """
    rows = []
    names = sorted({n for pair in spec.comparisons for n in pair})
    for ratio in spec.ratio_axis:
        r2 = spec.r1 * ratio
        for c in spec.containment_axis:
            s = c * r2
            row = {"r2_over_r1": ratio, "s_over_r2": c}
            if spec.b == 0:
                var = minwise_variances(1.0, ratio, c * ratio)
            elif r1_r2_feasible(spec.r1, r2, s):
                var = bbit_variances(spec.b, spec.r1, r2, s, names)
            else:
                for pair in spec.comparisons:
                    row[comparison_name(pair)] = math.nan
                row["status"] = "infeasible"
                rows.append(row)
                continue
            ok = True
            for pair in spec.comparisons:
                value, good = _ratio(var[pair[0]], var[pair[1]])
                row[comparison_name(pair)] = value
                ok &= good
            row["status"] = "ok" if ok else "boundary"
            rows.append(row)
    return rows


def r1_r2_feasible(r1: float, r2: float, s: float) -> bool:
    return r1 + r2 - s <= 1.0 and 0 <= s <= min(r1, r2)


def eq_to_mle_variance_ratio(f2_over_f1: float, containment: float) -> float:
    """Var(a_eq) / Var(a_mle) at one point of the minwise grid."""
    var = minwise_variances(1.0, f2_over_f1, containment * f2_over_f1)
    return var["eq"] / var["mle"]


# Monte Carlo ----------------------------------------------------------------

MINWISE_ESTIMATORS = ("mle", "eq", "lt", "gt")
BBIT_ESTIMATORS = {"bbit-full": "full", "bbit-do": "do", "bbit-d": "d", "bbit-3": "three", "bbit-eq": "eq"}
SIM_MODES = ("multinomial", "permutation", "hash")


@dataclass(frozen=True)
class SimulationSpec:
    """Monte Carlo experiment on one synthetic pair.

    ``mode`` selects how each replication's sketch comparison is produced:

    * ``multinomial``: cell counts drawn from the exact cell probabilities
      (exact for independent random permutations; for b-bit estimators the
      large-universe cell probabilities are used),
    * ``permutation``: minimums drawn exactly under random permutations of
      ``{0..D-1}`` (:func:`oracle.sample_permutation_minima`),
    * ``hash``: the sets are materialised (IDs ``0..f1+f2-a-1``) and sketched
      with a :class:`HashFamily` over universe ``D``.

    The simple estimators are evaluated as plain formulas unless ``clamp`` is
    set, in which case they are clipped to ``[0, min(f1, f2)]`` like
    :func:`minwise.estimate_simple` does. Clipping lowers their MSE well below
    the asymptotic variance when ``a`` is near ``min(f1, f2)``.
    """

    ground_truth: PairGroundTruth
    D: int
    k_values: Sequence[int]
    replications: int
    seed: int
    estimators: Sequence[str] = ("mle", "eq")
    mode: str = "multinomial"
    b: int = 1
    clamp: bool = False

    def __post_init__(self):
        gt = self.ground_truth
        if not isinstance(gt, PairGroundTruth):
            gt = validate_ground_truth(*gt)
        validate_ground_truth(gt.f1, gt.f2, gt.a)
        if any(float(x) != int(x) for x in (gt.f1, gt.f2, gt.a)):
            raise ValidationError("simulation needs integer cardinalities")
        gt = PairGroundTruth(int(gt.f1), int(gt.f2), int(gt.a))
        object.__setattr__(self, "ground_truth", gt)
        if gt.union > self.D:
            raise ValidationError(f"union size {gt.union} exceeds the universe D={self.D}")
        if self.replications < 1:
            raise ValidationError("need at least one replication")
        if not self.k_values or any(int(k) < 1 for k in self.k_values):
            raise ValidationError("k values must be positive")
        object.__setattr__(self, "k_values", tuple(int(k) for k in self.k_values))
        for e in self.estimators:
            if e not in MINWISE_ESTIMATORS and e not in BBIT_ESTIMATORS:
                raise ValidationError(f"unknown estimator {e!r}")
        object.__setattr__(self, "estimators", tuple(self.estimators))
        if self.mode not in SIM_MODES:
            raise ValidationError(f"mode must be one of {SIM_MODES}")
        for e in self.estimators:
            if e in BBIT_ESTIMATORS:
                bbit.GroupingScheme(BBIT_ESTIMATORS[e], self.b)


def replication_seed(master_seed: int, index: int) -> int:
    """Independent, individually reproducible seed of one replication."""
    return finalize_int((finalize_int(master_seed) ^ index) & 0xFFFFFFFFFFFFFFFF)


SIM_COLUMNS = ["estimator", "k", "replications", "true_a", "mean", "bias", "mse",
               "var_theory", "mse_over_var", "n_boundary"]


def theoretical_variance(spec: SimulationSpec, estimator: str, k: int) -> float:
    gt = spec.ground_truth
    if estimator == "mle":
        return minwise.variance_mle3(gt, k)
    if estimator in minwise.SIMPLE_ESTIMATORS:
        return minwise.variance_simple(gt, k, estimator)
    scheme = bbit.GroupingScheme(BBIT_ESTIMATORS[estimator], spec.b)
    D = float(spec.D)
    r = bbit.RateTriple.from_counts(gt.f1, gt.f2, gt.a, D)
    info = fisher_info(bbit_model(scheme, r.r1, r.r2), r.s, k)
    return D * D / info if info > 0 else math.inf


def _minwise_estimates(counts: np.ndarray, f1: float, f2: float, estimator: str, clamp: bool) -> tuple:
    """Vectorised intersection estimates; counts has shape (reps, 3)."""
    k_eq, k_lt, k_gt = (counts[:, i].astype(float) for i in range(3))
    k = k_eq + k_lt + k_gt
    m = min(f1, f2)
    if estimator == "mle":
        root, boundary = minwise.mle3_roots(k_eq, k_lt, k_gt, f1, f2)
        return root, boundary
    with np.errstate(divide="ignore", invalid="ignore"):
        if estimator == "eq":
            raw = (f1 + f2) * k_eq / (k + k_eq)
        elif estimator == "lt":
            raw = np.where(k_lt < k, f1 - f2 * k_lt / (k - k_lt), -np.inf)
        else:
            raw = np.where(k_gt < k, f2 - f1 * k_gt / (k - k_gt), -np.inf)
    outside = (raw <= 0) | (raw >= m)
    if clamp:
        return np.clip(raw, 0.0, m), outside
    # lt / gt are undefined (-inf) when every sample falls in their cell
    return np.where(np.isfinite(raw), raw, 0.0), outside


def _draw_minima(spec: SimulationSpec, k: int, rng, family_seed: int) -> tuple:
    gt = spec.ground_truth
    if spec.mode == "permutation":
        return oracle.sample_permutation_minima(spec.D, gt.f1, gt.f2, gt.a, k, rng)
    # hash mode: S1 = {0..f1-1}, S2 = {f1-a .. f1+f2-a-1}
    fam = HashFamily(family_seed, k, universe=spec.D)
    s1 = SetRecord("s1", np.arange(gt.f1, dtype=np.uint64))
    s2 = SetRecord("s2", np.arange(gt.f1 - gt.a, gt.f1 + gt.f2 - gt.a, dtype=np.uint64))
    return sketch_minwise(s1, fam).mins, sketch_minwise(s2, fam).mins


def _three_counts(z1, z2) -> np.ndarray:
    z1 = np.asarray(z1)
    z2 = np.asarray(z2)
    return np.array([np.sum(z1 == z2), np.sum(z1 < z2), np.sum(z1 > z2)])


def run_simulation(spec: SimulationSpec) -> list:
    """Per-(estimator, k) rows of mean, bias, MSE and theoretical variance.

    Estimates are of the intersection size ``a``; b-bit estimates of ``s``
    are scaled by ``D``.
    """
    gt = spec.ground_truth
    f1, f2, a = float(gt.f1), float(gt.f2), float(gt.a)
    D = float(spec.D)
    reps = spec.replications
    need_three = any(e in MINWISE_ESTIMATORS for e in spec.estimators)
    bbit_tags = [BBIT_ESTIMATORS[e] for e in spec.estimators if e in BBIT_ESTIMATORS]
    p3 = np.array([float(x) for x in gt.three_cell()])
    rates = bbit.RateTriple.from_counts(gt.f1, gt.f2, gt.a, D) if bbit_tags else None
    p_full = bbit.cell_matrix(spec.b, rates).ravel() if bbit_tags and spec.b <= 8 else None

    three = {k: np.zeros((reps, 3), dtype=np.int64) for k in spec.k_values}
    tables = {k: [] for k in spec.k_values}
    for r in range(reps):
        seed_r = replication_seed(spec.seed, r)
        rng = np.random.default_rng(seed_r)
        for k in spec.k_values:
            if spec.mode == "multinomial":
                if need_three:
                    three[k][r] = rng.multinomial(k, p3)
                if bbit_tags:
                    tables[k].append(_multinomial_table(spec.b, k, rates, p_full, rng))
                continue
            z1, z2 = _draw_minima(spec, k, rng, seed_r)
            three[k][r] = _three_counts(z1, z2)
            if bbit_tags:
                tables[k].append(table_from_values(low_bits(z1, spec.b), low_bits(z2, spec.b), spec.b))

    rows = []
    for est in spec.estimators:
        for k in spec.k_values:
            if est in MINWISE_ESTIMATORS:
                values, boundary = _minwise_estimates(three[k], f1, f2, est, spec.clamp)
            else:
                scheme = bbit.GroupingScheme(BBIT_ESTIMATORS[est], spec.b)
                model = bbit_model(scheme, rates.r1, rates.r2)
                sols = [solve_mle(model, bbit.grouped_counts(t, scheme)) for t in tables[k]]
                values = np.array([s.theta_hat for s in sols]) * D
                boundary = np.array([s.at_boundary for s in sols])
            rows.append(_summary_row(spec, est, k, values, boundary, a))
    return rows


def _multinomial_table(b, k, rates, p_full, rng):
    if p_full is not None:
        n = 2**b
        return ContingencyTable(b, counts=rng.multinomial(k, p_full).reshape(n, n))
    eq, lt, gt = bbit.summary_probs(b, rates)
    if b <= bbit.MAX_DIAG_BITS:
        diag_p = bbit.diag_probs(b, rates)
        c = rng.multinomial(k, np.concatenate([diag_p, [lt, gt]]))
        return ContingencyTable(b, diag=c[:-2], k_lt=int(c[-2]), k_gt=int(c[-1]))
    c = rng.multinomial(k, [eq, lt, gt])
    return ContingencyTable(b, k_eq=int(c[0]), k_lt=int(c[1]), k_gt=int(c[2]))


def _summary_row(spec, est, k, values, boundary, a) -> dict:
    values = np.asarray(values, dtype=float)
    mean = float(values.mean())
    mse = float(np.mean((values - a) ** 2))
    var = theoretical_variance(spec, est, k)
    return {
        "estimator": est,
        "k": k,
        "replications": len(values),
        "true_a": a,
        "mean": mean,
        "bias": mean - a,
        "mse": mse,
        "var_theory": var,
        "mse_over_var": mse / var if var > 0 else math.nan,
        "n_boundary": int(np.sum(boundary)),
    }


# CSV -------------------------------------------------------------------------

def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def write_csv(rows: list, columns: Optional[list] = None, stream=None) -> str:
    """Write dict rows as CSV (floats with 17 significant digits).

    Returns the text; also writes it to ``stream`` when given.
    """
    if columns is None:
        columns = list(rows[0].keys()) if rows else []
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(row[c]) for c in columns])
    text = buf.getvalue()
    if stream is not None:
        stream.write(text)
    return text
