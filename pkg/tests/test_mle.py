import math

import mpmath
import numpy as np
import pytest

from minwise_mle import bbit
from minwise_mle.core import PairGroundTruth, ValidationError
from minwise_mle.minwise import variance_mle3
from minwise_mle.mle import (
    CellModel,
    FlatLikelihoodError,
    bbit_model,
    binomial_model,
    cell_derivatives,
    fisher_info,
    information_diverges,
    log_likelihood,
    minwise_model,
    scheme_informations,
    solve_mle,
)
from minwise_mle.analysis import standard_grid


def test_binomial_information_and_estimate():
    model = binomial_model()
    for theta in (0.1, 0.5, 0.83):
        assert fisher_info(model, theta, k=40) == pytest.approx(40 / (theta * (1 - theta)), rel=1e-10)
    sol = solve_mle(model, [3, 1])
    assert sol.theta_hat == pytest.approx(0.75, abs=1e-10)
    assert sol.var_asymptotic == pytest.approx(0.75 * 0.25 / 4, rel=1e-8)


def test_binomial_boundaries():
    top = solve_mle(binomial_model(), [5, 0])
    assert top.theta_hat == 1.0 and top.at_boundary
    bottom = solve_mle(binomial_model(), [0, 5])
    assert bottom.theta_hat == 0.0 and bottom.at_boundary
    assert math.isfinite(top.fisher_info)
    assert information_diverges(binomial_model(), 1.0)
    assert not information_diverges(binomial_model(), 0.5)


def test_minwise_model_reproduces_closed_forms():
    model = minwise_model(4, 2)
    sol = solve_mle(model, [2, 6, 2])
    assert sol.theta_hat == pytest.approx(1.0, abs=1e-9)
    assert sol.var_asymptotic == pytest.approx(variance_mle3(PairGroundTruth(4, 2, 1), 10), rel=1e-9)
    for f1, f2, a in [(10, 3, 1.5), (1, 1, 0.2), (500, 900, 499)]:
        inv = 1 / fisher_info(minwise_model(f1, f2), a, k=1)
        assert inv == pytest.approx(variance_mle3(PairGroundTruth(f1, f2, a), 1), rel=1e-10)


def test_derivatives_against_high_precision():
    rates = (0.6, 0.3, 0.2)
    model = bbit_model(bbit.GroupingScheme("full", 2), rates[0], rates[1])
    _, dq = cell_derivatives(model, rates[2])

    def cell(s, t, d):
        with mpmath.workdps(40):
            return bbit_cell_mp(2, mpmath.mpf(rates[0]), mpmath.mpf(rates[1]), s, t, d)

    ref = [float(mpmath.diff(lambda s: cell(s, t, d), mpmath.mpf(rates[2]))) for t in range(4) for d in range(4)]
    assert np.abs(dq - ref).max() < 1e-11


def bbit_cell_mp(b, r1, r2, s, t, d):
    """Cell probability written directly from its defining expression."""
    n = 2**b
    u = r1 + r2 - s
    w = 1 - u

    def geo(x):
        return u * w**x / (1 - w**n)

    g1, g2 = 1 - (1 - r1) ** n, 1 - (1 - r2) ** n
    p_lt, p_gt = (r1 - s) / u, (r2 - s) / u
    if t == d:
        c1 = r1 * (1 - r1) ** (n - 1) / g1
        c2 = r2 * (1 - r2) ** (n - 1) / g2
        return (s / u + p_lt * c2 + p_gt * c1) * geo(t)
    e2 = (d - t - 1) % n
    e1 = (t - d - 1) % n
    return p_lt * r2 * (1 - r2) ** e2 / g2 * geo(t) + p_gt * r1 * (1 - r1) ** e1 / g1 * geo(d)


@pytest.mark.parametrize("b", [1, 4])
def test_eq_scheme_mle_matches_closed_form_inversion(b):
    r1, r2 = 0.4, 0.2
    model = bbit_model(bbit.GroupingScheme("eq", b), r1, r2)
    for counts in ([700, 300], [400, 600], [555, 445]):
        sol = solve_mle(model, counts)
        exact = bbit.bbit_eq_inverse(b, r1, r2, counts[0] / sum(counts))
        lo, hi = bbit.s_domain(r1, r2)
        assert sol.theta_hat == pytest.approx(min(max(exact, lo), hi), abs=1e-10)


def test_solver_recovers_truth_from_expected_counts():
    # counts proportional to the cell probabilities make the truth the exact maximiser
    r1, r2, s = 0.5, 0.3, 0.12
    for tag in bbit.SCHEMES:
        scheme = bbit.GroupingScheme(tag, 2)
        counts = 1e6 * bbit.grouped_probs(scheme, (r1, r2, s))
        sol = solve_mle(bbit_model(scheme, r1, r2), counts)
        assert sol.theta_hat == pytest.approx(s, abs=1e-9)


def test_grid_fallback_on_bimodal_likelihood():
    # a symmetric mixture-like model with two separated maxima
    def prob(x):
        p = 0.5 + 0.45 * math.sin(6 * math.pi * x) * math.exp(-x)
        return np.array([p, 1 - p])

    model = CellModel(2, prob, 0.0, 1.0, step=1e-4, name="wavy")
    sol = solve_mle(model, [90, 10])
    grid = np.linspace(0, 1, 200001)
    values = [log_likelihood(model, [90, 10], x) for x in grid]
    assert sol.used_grid_fallback
    assert sol.log_lik >= max(values) - 1e-9


def test_flat_model_is_rejected():
    model = CellModel(2, lambda x: np.array([0.5, 0.5]), 0.0, 1.0, step=1e-3)
    with pytest.raises(FlatLikelihoodError):
        solve_mle(model, [3, 4])


def test_input_validation():
    with pytest.raises(ValidationError):
        CellModel(2, lambda x: x, 1.0, 1.0, step=1e-3)
    with pytest.raises(ValidationError):
        solve_mle(binomial_model(), [1, 2, 3])
    with pytest.raises(ValidationError):
        solve_mle(binomial_model(), [0, 0])
    with pytest.raises(ValidationError):
        solve_mle(binomial_model(), [-1, 3])


def test_log_likelihood_minus_inf_for_impossible_cells():
    assert log_likelihood(binomial_model(), [1, 1], 1.0) == -math.inf


def test_scheme_informations_match_individual_models():
    b, r1, r2, s = 3, 0.5, 0.3, 0.1
    joint = scheme_informations(b, r1, r2, s)
    for tag in bbit.SCHEMES:
        single = fisher_info(bbit_model(bbit.GroupingScheme(tag, b), r1, r2), s)
        assert joint[tag] == pytest.approx(single, rel=1e-8)


def test_information_is_infinite_where_sets_partition_the_universe():
    # r1 + r2 = 1 and s = 0: the full table pins s down at the edge
    info = scheme_informations(1, 0.5, 0.5, 0.0)
    assert info["full"] == math.inf
    assert math.isfinite(info["eq"])
    assert math.isfinite(scheme_informations(8, 0.5, 0.4, 0.0)["full"])


@pytest.mark.parametrize("b", [1, 2, 4])
def test_refinement_ordering(b):
    for _, r1, r2, s in standard_grid(bits=(b,)):
        i = scheme_informations(b, r1, r2, s)
        slack = 1 - 1e-9
        assert i["full"] >= i["do"] * slack
        assert i["do"] >= i["d"] * slack and i["d"] >= i["eq"] * slack
        assert i["do"] >= i["three"] * slack and i["three"] >= i["eq"] * slack
