import math

import numpy as np
import pytest

from groupstage.calibration import (
    FitDataset,
    GameRecord,
    fit,
    information_criteria,
    log_likelihood,
    wdl_losses,
)
from groupstage.dataio import synthetic_history
from groupstage.ratings import rescale
from groupstage.score_models import (
    FITTED_GAP,
    FITTED_POISSON,
    BivariatePoisson,
    OrderedLogistic,
    SimplePoisson,
    UniformGuess,
    score_pmf,
)


@pytest.fixture(scope="module")
def data():
    return synthetic_history(FITTED_POISSON, FITTED_GAP, seed=1).fit_dataset()


def test_poisson_alpha_is_mean_total(data):
    res = fit("poisson", data)
    mean_total = float((data.goals_home + data.goals_away).mean())
    assert res.model.alpha == pytest.approx(mean_total, abs=1e-4)
    assert res.converged and res.n_obs == len(data) == 192


def test_information_criteria():
    aic, bic = information_criteria(-100.0, 3, 50)
    assert aic == pytest.approx(206.0)
    assert bic == pytest.approx(200 + 3 * math.log(50))
    with pytest.raises(ValueError):
        information_criteria(-1.0, 1, 0)


def test_uniform_likelihood_and_losses(data):
    assert log_likelihood(UniformGuess(), None, data) == pytest.approx(-len(data) * math.log(3))
    logloss, brier = wdl_losses(UniformGuess(), None, data)
    assert logloss == pytest.approx(math.log(3))
    assert brier == pytest.approx(2 / 3)
    res = fit("uniform", data)
    assert res.n_params == 0 and res.aic == pytest.approx(2 * len(data) * math.log(3))


def test_single_game_likelihood():
    # equal ratings and a 0-0 draw contribute exactly -alpha
    rec = GameRecord(2018, "A", 1, "X", "Y", 1800.0, 1800.0, 0, 0)
    other = GameRecord(2018, "A", 1, "Z", "W", 1700.0, 1900.0, 1, 1)
    model = SimplePoisson(2.0)
    r_lo, r_hi = rescale(1700.0, 1700.0, 1900.0, 1.0), rescale(1900.0, 1700.0, 1900.0, 1.0)
    expected = -2.0 + math.log(score_pmf(model, r_lo, r_hi, (1, 1)))
    assert log_likelihood(model, 1.0, FitDataset([rec, other])) == pytest.approx(expected, rel=1e-12)


def test_zero_probability_gives_minus_inf(caplog):
    recs = [GameRecord(2018, "A", 1, "X", "Y", 1800.0, 1900.0, 1, 0),
            GameRecord(2018, "A", 1, "Z", "W", 1700.0, 1800.0, 0, 0)]
    ll = log_likelihood(OrderedLogistic(1e6, (-1.0, 1.0)), None, FitDataset(recs))
    assert ll == -math.inf
    assert "record" in caplog.text


def test_restarts_never_worse(data):
    one = fit("poisson", data, restarts=1)
    many = fit("poisson", data, restarts=5)
    assert many.log_likelihood >= one.log_likelihood - 1e-6


def test_nested_models(data):
    simple = fit("poisson", data)
    bivariate = fit("bipoisson", data)
    assert isinstance(bivariate.model, BivariatePoisson)
    # the bivariate family contains beta -> 0, so its optimum is no worse
    assert bivariate.log_likelihood >= simple.log_likelihood - 1e-3


def test_ordered_logit_fit(data):
    res = fit("olr", data)
    assert isinstance(res.model, OrderedLogistic) and res.gap is None
    assert res.model.coefficient > 0  # stronger home side wins more often
    assert res.log_likelihood > -len(data) * math.log(3)


def test_negative_binomial_fit_close_to_poisson(data):
    nb = fit("negbin", data, restarts=1)
    poisson = fit("poisson", data)
    # Poisson data: the NB fit can only gain a little on its Poisson limit
    assert nb.log_likelihood >= poisson.log_likelihood - 0.5
    assert nb.log_likelihood <= poisson.log_likelihood + 5


def test_fit_result_json(data):
    doc = fit("poisson", data).to_dict()
    assert doc["family"] == "poisson" and set(doc) >= {"alpha", "gap", "aic", "bic", "n_obs"}


def test_edition_pool_differs():
    ds = synthetic_history(FITTED_POISSON, FITTED_GAP, seed=2, editions=(2014, 2018))
    pooled, per = ds.fit_dataset("pooled"), ds.fit_dataset("edition")
    assert np.all(per.scaled(2.0)[0] >= 1.0)
    assert not np.allclose(pooled.scaled(2.0)[0], per.scaled(2.0)[0])
    with pytest.raises(ValueError):
        FitDataset(ds.records, pool="global")
