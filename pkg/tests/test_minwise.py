from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from minwise_mle.core import PairCounts3, PairGroundTruth, ValidationError
from minwise_mle.minwise import (
    BoundaryError,
    estimate_mle3,
    estimate_simple,
    mle3_at_boundary,
    mle3_roots,
    mle3_score,
    three_cell_probs,
    variance_mle3,
    variance_simple,
)

COUNTS = PairCounts3(2, 6, 2)


def test_three_cell_probs_exact():
    assert three_cell_probs((4, 2, 1)) == (Fraction(1, 5), Fraction(3, 5), Fraction(1, 5))


@pytest.mark.parametrize("which", ["eq", "lt", "gt"])
def test_simple_estimators_on_worked_counts(which):
    # 6*2/12 = 1, 4 - 2*(6/4) = 1, 2 - 4*(2/8) = 1
    assert estimate_simple(COUNTS, 4, 2, which).a_hat == pytest.approx(1.0, abs=1e-15)


def test_simple_variances_by_hand():
    gt = PairGroundTruth(4, 2, 1)
    assert variance_simple(gt, 100, "eq") == pytest.approx(25 * 1 * 4 / 36 / 100, rel=1e-15)
    assert variance_simple(gt, 100, "gt") == pytest.approx(25 * 1 / 4 / 100, rel=1e-15)
    # U^2 (f1 - a) / f2 / k = 25 * 3 / 2 / 100
    assert variance_simple(gt, 100, "lt") == pytest.approx(0.375, rel=1e-15)
    assert variance_simple(PairGroundTruth(4, 2, 0), 7, "classic_R") == 0.0
    assert variance_simple(gt, 10, "classic_R") == pytest.approx(0.2 * 0.8 / 10)
    with pytest.raises(ValidationError):
        variance_simple(gt, 10, "nope")


def test_variance_mle3_by_hand():
    assert variance_mle3(PairGroundTruth(4, 2, 1), 100) == pytest.approx(25 / (6 + 2 / 3 + 4) / 100, rel=1e-15)


def test_variance_mle3_zero_at_boundaries():
    assert variance_mle3(PairGroundTruth(4, 2, 0), 10) == 0.0
    assert variance_mle3(PairGroundTruth(4, 2, 2), 10) == 0.0
    assert mle3_at_boundary(PairGroundTruth(4, 2, 2))
    assert not mle3_at_boundary(PairGroundTruth(4, 2, 1))


def test_mle_matches_symbolic_root():
    a = sp.symbols("a")
    k_eq, k_lt, k_gt, f1, f2 = 2, 6, 2, 4, 2
    g = k_eq * (f1 + f2) / a - k_lt * f2 / (f1 - a) - k_gt * f1 / (f2 - a)
    poly = sp.expand(sp.cancel(g * a * (f1 - a) * (f2 - a)))
    assert sp.Poly(poly, a).monic() == sp.Poly(32 * a**2 - 128 * a + 96, a).monic()
    roots = [r for r in sp.solve(poly, a) if 0 < r < min(f1, f2)]
    assert roots == [1]
    res = estimate_mle3(COUNTS, 4, 2)
    assert res.a_hat == pytest.approx(1.0, abs=1e-10)
    assert not res.at_boundary
    assert res.var_asymptotic == pytest.approx(variance_mle3(PairGroundTruth(4, 2, 1.0), 10), rel=1e-9)


def test_mle_boundaries():
    top = estimate_mle3(PairCounts3(5, 0, 0), 4, 2)
    assert top.a_hat == 2.0 and top.at_boundary and top.var_asymptotic == 0.0
    bottom = estimate_mle3(PairCounts3(0, 3, 4), 4, 2)
    assert bottom.a_hat == 0.0 and bottom.at_boundary
    # one empty off-diagonal cell: the root of 6/a = 12/(4 - a) is 4/3
    inner = estimate_mle3(PairCounts3(1, 6, 0), 4, 2)
    assert inner.a_hat == pytest.approx(4 / 3, abs=1e-10) and not inner.at_boundary
    # while (3, 4, 0) has a positive score up to a = 2
    assert estimate_mle3(PairCounts3(3, 4, 0), 4, 2).at_boundary


def test_simple_boundary_errors_and_clamping():
    with pytest.raises(BoundaryError):
        estimate_simple(PairCounts3(0, 5, 0), 4, 2, "lt")
    with pytest.raises(BoundaryError):
        estimate_simple(PairCounts3(0, 0, 5), 4, 2, "gt")
    res = estimate_simple(PairCounts3(1, 0, 9), 4, 2, "gt")
    assert res.a_hat_raw < 0 and res.a_hat == 0.0


@given(st.integers(0, 50), st.integers(0, 50), st.integers(0, 50),
       st.floats(1, 1e6), st.floats(0.01, 1))
def test_score_is_decreasing(k_eq, k_lt, k_gt, f1, ratio):
    f2 = f1 * ratio
    m = min(f1, f2)
    grid = np.linspace(m * 1e-6, m * (1 - 1e-6), 200)
    g = mle3_score(grid, k_eq, k_lt, k_gt, f1, f2)
    if k_eq + k_lt + k_gt:
        assert np.all(np.diff(g) <= 1e-9 * np.abs(g[:-1]) + 1e-300)


@given(st.integers(0, 40), st.integers(0, 40), st.integers(0, 40), st.floats(1, 100), st.floats(1, 100))
def test_orientation_symmetry(k_eq, k_lt, k_gt, f1, f2):
    if k_eq + k_lt + k_gt == 0:
        return
    a, _ = mle3_roots(k_eq, k_lt, k_gt, f1, f2)
    b, _ = mle3_roots(k_eq, k_gt, k_lt, f2, f1)
    assert a == pytest.approx(b, rel=1e-10, abs=1e-12 * min(f1, f2))


def test_mle_root_is_likelihood_maximiser():
    rng = np.random.default_rng(0)
    for _ in range(100):
        k_eq, k_lt, k_gt = rng.integers(1, 30, size=3)
        f1, f2 = rng.uniform(1, 50, size=2)
        root, boundary = mle3_roots(k_eq, k_lt, k_gt, f1, f2)
        m = min(f1, f2)
        grid = np.linspace(m * 1e-4, m * (1 - 1e-4), 2001)

        def ll(a):
            u = f1 + f2 - a
            return k_eq * np.log(a / u) + k_lt * np.log((f1 - a) / u) + k_gt * np.log((f2 - a) / u)

        assert ll(float(root)) >= ll(grid).max() - 1e-9


def mle_variance_by_fisher(f1, f2, a):
    """Inverse of sum q'^2/q with symbolic derivatives of the three cells."""
    x = sp.symbols("x")
    u = f1 + f2 - x
    cells = [x / u, (f1 - x) / u, (f2 - x) / u]
    info = sum(sp.diff(q, x) ** 2 / q for q in cells)
    return 1 / float(info.subs(x, a))


@pytest.mark.parametrize("f1,f2,a", [(4, 2, 1), (10, 10, 3), (100, 20, 19), (7, 30, 0.5)])
def test_variance_mle3_is_inverse_fisher_information(f1, f2, a):
    assert variance_mle3(PairGroundTruth(f1, f2, a), 1) == pytest.approx(mle_variance_by_fisher(f1, f2, a), rel=1e-12)


@given(st.floats(0.01, 1.0), st.floats(0.001, 0.999))
def test_mle_variance_never_exceeds_simple(ratio, t):
    gt = PairGroundTruth(1.0, ratio, t * ratio)
    best = min(variance_simple(gt, 1, w) for w in ("eq", "lt", "gt"))
    assert variance_mle3(gt, 1) <= best * (1 + 1e-12)


def test_equal_sizes_make_eq_nearly_optimal():
    # ratio Var(eq)/Var(mle) >= 1 and tends to 1 as f2/f1 -> 1 at small containment
    ratios = []
    for q in (0.5, 0.9, 0.99, 1.0):
        gt = PairGroundTruth(1.0, q, 0.05 * q)
        ratios.append(variance_simple(gt, 1, "eq") / variance_mle3(gt, 1))
    assert all(r >= 1 - 1e-12 for r in ratios)
    assert ratios[-1] == pytest.approx(1.0, abs=2e-3)
    assert ratios == sorted(ratios, reverse=True)


def test_reference_variance_ratio_in_rationals():
    # (f1, f2, a) = (100, 20, 19): f2/f1 = 0.2 and T = 0.95
    f1, f2, a = Fraction(100), Fraction(20), Fraction(19)
    exact = a * (f1 + f2 - 2 * a) / (f1 + f2) ** 2 * ((f1 + f2) / a + f2 / (f1 - a) + f1 / (f2 - a))
    gt = PairGroundTruth(1.0, 0.2, 0.19)
    ratio = variance_simple(gt, 1, "eq") / variance_mle3(gt, 1)
    assert ratio == pytest.approx(float(exact), rel=1e-12)
    assert abs(ratio - 11.53) <= 0.01


def test_monte_carlo_mle_consistency():
    gt = PairGroundTruth(4, 2, 1)
    reps = 10_000
    rng = np.random.default_rng(20)
    p = [float(x) for x in gt.three_cell()]
    bias = {}
    for k in (50, 500):
        counts = rng.multinomial(k, p, size=reps)
        roots, _ = mle3_roots(counts[:, 0], counts[:, 1], counts[:, 2], 4, 2)
        bias[k] = roots.mean() - 1.0
        if k == 500:
            mse = np.mean((roots - 1.0) ** 2)
            assert abs(mse / variance_mle3(gt, k) - 1) < 0.15
    # the bias is O(1/k): bias * k stays bounded while the bias itself shrinks
    assert abs(bias[500]) < abs(bias[50])
    assert all(k * abs(b) < 5 for k, b in bias.items())
