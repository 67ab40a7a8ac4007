import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from groupstage.score_models import (
    BivariatePoisson,
    NegativeBinomial,
    NoGoalScale,
    OrderedLogistic,
    SimplePoisson,
    UniformGuess,
    expected_goals,
    model_from_dict,
    model_to_dict,
    outcome_probs,
    outcome_probs_arrays,
    sample_score,
    score_matrix,
    score_pmf,
)

ALPHA = 2.5156
ratings = st.floats(1.0, 44.0)


def poisson_mass(k, lam):
    return lam ** k * math.exp(-lam) / math.factorial(k)


def test_expected_goals_simple():
    m = SimplePoisson(ALPHA)
    assert expected_goals(m, 5.0, 5.0) == pytest.approx(1.2578)
    assert expected_goals(m, 3.0, 1.0) == pytest.approx(1.8867, abs=1e-4)


@given(ratings, ratings)
def test_bivariate_beta_zero_mean_matches(r_i, r_j):
    assert expected_goals(BivariatePoisson(ALPHA, 0.0), r_i, r_j) == pytest.approx(
        expected_goals(SimplePoisson(ALPHA), r_i, r_j))


def test_no_goal_scale():
    with pytest.raises(NoGoalScale):
        expected_goals(UniformGuess(), 1, 2)
    with pytest.raises(NoGoalScale):
        expected_goals(OrderedLogistic(0.01, (-0.5, 0.5)), 1, 2)


def test_pmf_zero_zero():
    assert score_pmf(SimplePoisson(ALPHA), 2.0, 2.0, (0, 0)) == pytest.approx(math.exp(-ALPHA), rel=1e-12)
    assert math.exp(-ALPHA) == pytest.approx(0.08081, abs=1e-5)


def test_bivariate_reduces_to_simple_on_grid():
    a, b = SimplePoisson(ALPHA), BivariatePoisson(ALPHA, 0.0)
    for x in range(10):
        for y in range(10):
            assert score_pmf(b, 7.0, 2.5, (x, y)) == pytest.approx(score_pmf(a, 7.0, 2.5, (x, y)), abs=1e-12)


def test_bivariate_against_direct_convolution():
    m = BivariatePoisson(2.0, 0.3)
    l1, l2 = 2.0 * 0.75, 2.0 * 0.25
    for x, y in [(0, 0), (2, 1), (3, 3), (1, 4)]:
        direct = sum(poisson_mass(x - z, l1) * poisson_mass(y - z, l2) * poisson_mass(z, 0.3)
                     for z in range(min(x, y) + 1))
        assert score_pmf(m, 3.0, 1.0, (x, y)) == pytest.approx(direct, rel=1e-12)


def test_negative_binomial_zero_zero():
    m = NegativeBinomial(0.1747, 13)
    assert score_pmf(m, 4.0, 4.0, (0, 0)) == pytest.approx((1 - 0.1747 / 2) ** 26, rel=1e-12)


def test_negative_binomial_mass_formula():
    m = NegativeBinomial(0.4, 3)
    q = 0.4 * 0.6
    direct = math.comb(2 + 3 - 1, 2) * (1 - q) ** 3 * q ** 2
    q2 = 0.4 * 0.4
    direct *= math.comb(1 + 3 - 1, 1) * (1 - q2) ** 3 * q2
    assert score_pmf(m, 3.0, 2.0, (2, 1)) == pytest.approx(direct, rel=1e-12)


def test_negative_binomial_constraint():
    with pytest.raises(ValueError, match="success probability"):
        score_pmf(NegativeBinomial(2.5, 5), 1.0, 1.0, (0, 0))


EXACT = [SimplePoisson(ALPHA), BivariatePoisson(ALPHA, 0.2), NegativeBinomial(0.1747, 13)]


@pytest.mark.parametrize("model", EXACT, ids=lambda m: m.family)
@settings(max_examples=30, deadline=None)
@given(r_i=ratings, r_j=ratings)
def test_normalisation_means_symmetry(model, r_i, r_j):
    m = score_matrix(model, r_i, r_j)
    assert m.sum() >= 1 - 1e-9
    k = np.arange(m.shape[0])
    assert (m.sum(axis=1) * k).sum() == pytest.approx(expected_goals(model, r_i, r_j), abs=1e-6)
    assert np.allclose(m, score_matrix(model, r_j, r_i).T, atol=1e-15)


@settings(max_examples=30, deadline=None)
@given(r_i=ratings, r_j=ratings)
def test_simple_poisson_total_goals(r_i, r_j):
    m = score_matrix(SimplePoisson(ALPHA), r_i, r_j)
    totals = np.bincount(np.add.outer(np.arange(26), np.arange(26)).ravel(), weights=m.ravel())
    for n in range(10):
        assert totals[n] == pytest.approx(poisson_mass(n, ALPHA), abs=1e-12)


def test_outcome_probs_uniform():
    assert outcome_probs(UniformGuess(), 1, 40) == pytest.approx((1 / 3, 1 / 3, 1 / 3))


@pytest.mark.parametrize("model", EXACT, ids=lambda m: m.family)
def test_outcome_probs_equal_teams_symmetric(model):
    w, d, l = outcome_probs(model, 9.0, 9.0)
    assert w == pytest.approx(l, abs=1e-9)
    assert w + d + l == pytest.approx(1.0, abs=1e-12)


def test_draw_probability_brute_force():
    lam = ALPHA / 2
    oracle = sum(poisson_mass(k, lam) ** 2 for k in range(31))
    _, draw, _ = outcome_probs(SimplePoisson(ALPHA), 3.0, 3.0)
    assert draw == pytest.approx(oracle, abs=1e-10)
    assert draw == pytest.approx(0.26, abs=0.01)


def test_ordered_logit():
    m = OrderedLogistic(0.01, (-0.4, 0.6))
    w, d, l = outcome_probs(m, 1900, 1800)
    sig = lambda x: 1 / (1 + math.exp(-x))
    assert l == pytest.approx(sig(-0.4 - 1.0))
    assert w == pytest.approx(1 - sig(0.6 - 1.0))
    assert np.allclose(outcome_probs_arrays(m, [1900], [1800])[0], (w, d, l))
    with pytest.raises(ValueError):
        OrderedLogistic(0.01, (0.5, 0.5))


def test_sampling_mean_and_zero_zero():
    m = SimplePoisson(ALPHA)
    rng = np.random.default_rng(3)
    s = np.array([sample_score(m, 2.0, 2.0, rng) for _ in range(100_000)])
    assert s.mean() == pytest.approx(1.2578, abs=0.02)
    p00 = math.exp(-ALPHA)
    f00 = np.mean((s[:, 0] == 0) & (s[:, 1] == 0))
    assert abs(f00 - p00) < 4 * math.sqrt(p00 * (1 - p00) / len(s))


@pytest.mark.parametrize("model", EXACT, ids=lambda m: m.family)
def test_sampled_outcomes_match_probs(model):
    rng = np.random.default_rng(8)
    n = 100_000
    s = np.array([sample_score(model, 20.0, 6.0, rng) for _ in range(n)])
    freq = [np.mean(s[:, 0] > s[:, 1]), np.mean(s[:, 0] == s[:, 1]), np.mean(s[:, 0] < s[:, 1])]
    for f, p in zip(freq, outcome_probs(model, 20.0, 6.0)):
        assert abs(f - p) < 4 * math.sqrt(p * (1 - p) / n)


def test_sampling_deterministic():
    m = BivariatePoisson(ALPHA, 0.1)
    a = [sample_score(m, 3.0, 2.0, np.random.default_rng(1)) for _ in range(3)]
    b = [sample_score(m, 3.0, 2.0, np.random.default_rng(1)) for _ in range(3)]
    assert a == b


@pytest.mark.parametrize("model", EXACT + [OrderedLogistic(0.004, (-0.3, 0.9)), UniformGuess()],
                         ids=lambda m: m.family)
def test_json_round_trip(model):
    doc = model_to_dict(model, gap=3.5)
    back, gap = model_from_dict(doc)
    assert back == model and gap == 3.5


def test_json_errors():
    with pytest.raises(ValueError, match="unknown model family"):
        model_from_dict({"family": "skellam"})
    with pytest.raises(ValueError, match="missing parameter"):
        model_from_dict({"family": "poisson"})
    with pytest.raises(ValueError, match="positive integer"):
        model_from_dict({"family": "negbin", "alpha": 0.2, "r": 2.5})
