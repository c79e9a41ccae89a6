import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from minwise_mle import bbit, oracle
from minwise_mle.analysis import standard_grid
from minwise_mle.core import ValidationError
from minwise_mle.hashing import low_bits, table_from_values


def small_grid():
    return [p for p in standard_grid(bits=(1, 2, 4)) if p[1] == 0.5]


def test_rate_triple_validation():
    r = bbit.RateTriple(0.5, 0.25, 0.2)
    assert r.u == pytest.approx(0.55)
    assert r.swapped() == bbit.RateTriple(0.25, 0.5, 0.2)
    assert bbit.RateTriple.from_counts(50, 25, 20, 100) == r
    for bad in [(0, 0.5, 0), (0.5, 0.25, 0.3), (0.8, 0.8, 0.1), (0.5, 0.5, -0.1)]:
        with pytest.raises(ValidationError):
            bbit.RateTriple(*bad)
    assert bbit.s_domain(0.8, 0.6) == (pytest.approx(0.4), 0.6)


@pytest.mark.parametrize("b,r1,r2,s", small_grid())
def test_cells_match_residue_summation(b, r1, r2, s):
    closed = bbit.cell_matrix(b, (r1, r2, s))
    summed = oracle.bbit_matrix_by_summation(b, (r1, r2, s))
    assert np.abs(closed - summed).max() <= 1e-12


def test_scalar_cell_prob_matches_matrix():
    rates = (0.3, 0.2, 0.05)
    m = bbit.cell_matrix(3, rates)
    for t in range(8):
        for d in range(8):
            assert bbit.cell_prob(3, rates, t, d) == pytest.approx(m[t, d], rel=1e-13, abs=1e-300)
    assert bbit.cell_prob(3, rates, 2, 6) == pytest.approx(oracle.bbit_cell_prob_by_summation(3, rates, 2, 6), abs=1e-14)
    with pytest.raises(ValidationError):
        bbit.cell_prob(3, rates, 8, 0)


def test_identical_sets_put_all_mass_on_diagonal():
    m = bbit.cell_matrix(4, (0.3, 0.3, 0.3))
    assert np.all(m[~np.eye(16, dtype=bool)] == 0)
    assert m.sum() == pytest.approx(1.0, abs=1e-14)


@settings(max_examples=40)
@given(st.sampled_from([1, 2, 3, 5]), st.floats(0.01, 1.0), st.floats(0.01, 1.0), st.floats(0, 1))
def test_relabelling_symmetry(b, r1, ratio, c):
    r2 = r1 * ratio
    s = c * r2
    if r1 + r2 - s > 1:
        return
    a = bbit.cell_matrix(b, (r1, r2, s))
    swapped = bbit.cell_matrix(b, (r2, r1, s))
    assert np.allclose(a, swapped.T, rtol=1e-12, atol=1e-16)
    eq, lt, gt = bbit.summary_probs(b, (r1, r2, s))
    eq2, lt2, gt2 = bbit.summary_probs(b, (r2, r1, s))
    assert (lt, gt) == pytest.approx((gt2, lt2), rel=1e-12, abs=1e-16)


@pytest.mark.parametrize("b", [1, 2, 4, 6, 8])
def test_grouped_probs_are_groupings_of_the_full_table(b):
    for _, r1, r2, s in standard_grid(bits=(b,)):
        full = bbit.cell_matrix(b, (r1, r2, s))
        for tag in ("do", "d", "three", "eq"):
            direct = bbit.grouped_probs(bbit.GroupingScheme(tag, b), (r1, r2, s))
            assert np.abs(direct - bbit.group_matrix(full, tag)).max() <= 1e-13


def test_three_is_do_with_diagonal_summed():
    do = bbit.grouped_probs(bbit.GroupingScheme("do", 6), (0.4, 0.3, 0.1))
    three = bbit.grouped_probs(bbit.GroupingScheme("three", 6), (0.4, 0.3, 0.1))
    assert three == pytest.approx([do[:-2].sum(), do[-2], do[-1]], abs=1e-15)


@pytest.mark.parametrize("b", [10, 12, 16])
def test_closed_form_matches_sums_for_wide_values(b):
    for r1, r2, s in [(0.5, 0.25, 0.2), (0.01, 0.004, 0.001), (0.9, 0.05, 0.0)]:
        assert bbit.p_lt_closed_form(b, (r1, r2, s)) == pytest.approx(bbit.p_lt_by_sums(b, (r1, r2, s)), abs=1e-13)


def mp_p_lt(b, r1, r2, s, dps=60):
    """Double sum of the lt-part of the cells, in 60-digit arithmetic, over
    the gap e = d - t - 1 (off-diagonal cells with t < d)."""
    with mpmath.workdps(dps):
        r1, r2, s = mpmath.mpf(r1), mpmath.mpf(r2), mpmath.mpf(s)
        n = 2**b
        u = r1 + r2 - s
        w = 1 - u
        gu = 1 - w**n
        g1, g2 = 1 - (1 - r1) ** n, 1 - (1 - r2) ** n
        # sum_t geo(t) over t <= n - 2 - e, summed over e, closed in t
        total = mpmath.mpf(0)
        for e in range(n - 1):
            m = n - 1 - e  # number of t values
            geo_sum = (1 - w**m) / gu
            total += (r1 - s) / u * r2 * (1 - r2) ** e / g2 * geo_sum
            gm = n - 1 - e
            geo_sum_d = (w ** (e + 1) - w**n) / gu
            total += (r2 - s) / u * r1 * (1 - r1) ** (gm - 1) / g1 * geo_sum_d
        return float(total)


@pytest.mark.parametrize("b,rates", [(4, (0.5, 0.25, 0.2)), (8, (1e-3, 5e-4, 1e-4)),
                                     (12, (1e-14, 1e-14, 5e-15)), (12, (3e-9, 1e-9, 0.0))])
def test_p_lt_against_high_precision_sum(b, rates):
    assert bbit.p_lt(b, rates) == pytest.approx(mp_p_lt(b, *rates), rel=1e-12, abs=1e-15)


def test_tiny_rates_do_not_cancel():
    # n * r far below 1: the closed form alone would lose all digits here
    rates = (2e-14, 1e-14, 5e-15)
    ref = bbit.p_lt_by_sums(16, rates)
    assert bbit.p_lt(16, rates) == ref
    assert bbit._p_lt_mp(16, *rates, digits=50) == pytest.approx(ref, rel=1e-12)
    eq, lt, gt = bbit.summary_probs(24, rates)
    assert eq + lt + gt == pytest.approx(1.0, abs=1e-14)
    assert 0 < lt < 1 and 0 < gt < 1


def test_summary_probs_sum_to_one_up_to_32_bits():
    for b in (1, 9, 17, 32):
        eq, lt, gt = bbit.summary_probs(b, (0.3, 0.1, 0.05))
        assert eq + lt + gt == pytest.approx(1.0, abs=1e-13)


def test_scheme_limits():
    assert bbit.GroupingScheme("full", 8).m == 65536
    assert bbit.GroupingScheme("do", 3).m == 10
    assert bbit.GroupingScheme("d", 3).m == 9
    assert bbit.GroupingScheme("three", 32).m == 3
    assert bbit.GroupingScheme("eq", 1).m == 2
    for tag, b in [("full", 9), ("do", 17), ("eq", 33), ("other", 2)]:
        with pytest.raises(ValidationError):
            bbit.GroupingScheme(tag, b)


def test_grouped_counts_follow_groupings():
    table = table_from_values(np.array([0, 1, 2, 3, 3], dtype=np.uint64),
                              np.array([0, 2, 1, 3, 0], dtype=np.uint64), 2)
    assert list(bbit.grouped_counts(table, bbit.GroupingScheme("do", 2))) == [1, 0, 0, 1, 1, 2]
    assert list(bbit.grouped_counts(table, bbit.GroupingScheme("d", 2))) == [1, 0, 0, 1, 3]
    assert list(bbit.grouped_counts(table, bbit.GroupingScheme("three", 2))) == [2, 1, 2]
    assert list(bbit.grouped_counts(table, bbit.GroupingScheme("eq", 2))) == [2, 3]
    assert bbit.grouped_counts(table, bbit.GroupingScheme("full", 2)).sum() == 5
    with pytest.raises(ValidationError):
        bbit.grouped_counts(table, bbit.GroupingScheme("eq", 3))


@pytest.mark.parametrize("b", [1, 3, 8, 20])
def test_eq_inverse_round_trip(b):
    r1, r2 = 0.3, 0.12
    for s in (0.0, 0.05, 0.1, 0.12):
        p_eq = bbit.summary_probs(b, (r1, r2, s))[0]
        assert bbit.bbit_eq_inverse(b, r1, r2, p_eq) == pytest.approx(s, abs=1e-12)


def test_cells_match_exact_permutation_monte_carlo():
    # rates (0.5, 0.25, 0.2) realised as f1, f2, a in a universe of 10^7
    D, k, b = 10**7, 10**6, 2
    z1, z2 = oracle.sample_permutation_minima(D, D // 2, D // 4, D // 5, k, np.random.default_rng(3))
    table = table_from_values(low_bits(z1, b), low_bits(z2, b), b)
    freq = table.counts / k
    p = bbit.cell_matrix(b, (0.5, 0.25, 0.2))
    assert p.sum() == pytest.approx(1.0, abs=1e-14)
    se = np.sqrt(p * (1 - p) / k)
    assert np.all(np.abs(freq - p) <= 4 * se)
