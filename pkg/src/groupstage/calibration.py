"""Maximum-likelihood calibration of the score models and model-selection metrics."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .ratings import rescale_array
from .score_models import (
    BivariatePoisson,
    NegativeBinomial,
    OrderedLogistic,
    ScoreModel,
    SimplePoisson,
    UniformGuess,
    model_to_dict,
    outcome_probs_arrays,
    score_logpmf_arrays,
)

log = logging.getLogger(__name__)

NB_R_RANGE = range(1, 101)
POOLED, PER_EDITION = "pooled", "edition"


@dataclass(frozen=True)
class GameRecord:
    edition: int
    group_id: str
    stage_round: int
    team_home: str
    team_away: str
    elo_home: float
    elo_away: float
    goals_home: int
    goals_away: int

    def __post_init__(self):
        if self.stage_round < 1:
            raise ValueError("round must be >= 1")
        if not (self.elo_home > 0 and self.elo_away > 0):
            raise ValueError("Elo ratings must be positive")
        if self.goals_home < 0 or self.goals_away < 0:
            raise ValueError("goals must be nonnegative")


class FitDataset:
    """Games used for fitting, with the rating pool used for rescaling.

    ``pool`` is ``"pooled"`` (one min/max over every game) or ``"edition"``
    (min/max within each edition).
    """

    def __init__(self, records, pool: str = POOLED):
        self.records = tuple(records)
        if not self.records:
            raise ValueError("empty dataset")
        if pool not in (POOLED, PER_EDITION):
            raise ValueError(f"unknown rescaling pool {pool!r}")
        self.pool = pool
        self.elo_home = np.array([r.elo_home for r in self.records], dtype=float)
        self.elo_away = np.array([r.elo_away for r in self.records], dtype=float)
        self.goals_home = np.array([r.goals_home for r in self.records], dtype=np.int64)
        self.goals_away = np.array([r.goals_away for r in self.records], dtype=np.int64)
        self.edition = np.array([r.edition for r in self.records])
        both = np.concatenate([self.elo_home, self.elo_away])
        self.pool_min = float(both.min())
        self.pool_max = float(both.max())
        if not self.pool_min < self.pool_max:
            raise ValueError("zero rating spread")
        # realised class: 0 = home win, 1 = draw, 2 = home loss
        self.outcome = np.where(self.goals_home > self.goals_away, 0,
                                np.where(self.goals_home == self.goals_away, 1, 2))

    def __len__(self):
        return len(self.records)

    def scaled(self, gap: float) -> tuple[np.ndarray, np.ndarray]:
        if self.pool == POOLED:
            return (rescale_array(self.elo_home, self.pool_min, self.pool_max, gap),
                    rescale_array(self.elo_away, self.pool_min, self.pool_max, gap))
        home = np.empty(len(self))
        away = np.empty(len(self))
        for ed in np.unique(self.edition):
            m = self.edition == ed
            lo = min(self.elo_home[m].min(), self.elo_away[m].min())
            hi = max(self.elo_home[m].max(), self.elo_away[m].max())
            home[m] = rescale_array(self.elo_home[m], lo, hi, gap)
            away[m] = rescale_array(self.elo_away[m], lo, hi, gap)
        return home, away

    def ratings_for(self, model: ScoreModel, gap: float | None):
        # the ordered logit regresses on the raw Elo difference
        if isinstance(model, (OrderedLogistic, UniformGuess)):
            return self.elo_home, self.elo_away
        return self.scaled(gap)


@dataclass(frozen=True)
class FitResult:
    model: ScoreModel
    gap: float | None
    log_likelihood: float
    n_params: int
    n_obs: int
    aic: float
    bic: float
    logloss: float
    brier: float
    converged: bool
    n_restarts_used: int

    def to_dict(self) -> dict:
        doc = model_to_dict(self.model, self.gap)
        doc.update(
            log_likelihood=self.log_likelihood,
            n_params=self.n_params,
            n_obs=self.n_obs,
            aic=self.aic,
            bic=self.bic,
            logloss=self.logloss,
            brier=self.brier,
            converged=self.converged,
            n_restarts_used=self.n_restarts_used,
        )
        return doc


def _nb_valid(model, home, away) -> bool:
    p = home / (home + away)
    return bool(model.alpha * max(p.max(), (1 - p).max()) < 1)


def _record_logliks(model: ScoreModel, gap, data: FitDataset) -> np.ndarray:
    home, away = data.ratings_for(model, gap)
    if isinstance(model, (OrderedLogistic, UniformGuess)):
        probs = outcome_probs_arrays(model, home, away)
        with np.errstate(divide="ignore"):
            return np.log(probs[np.arange(len(data)), data.outcome])
    if isinstance(model, NegativeBinomial) and not _nb_valid(model, home, away):
        raise ValueError("negative binomial success probability >= 1")
    return score_logpmf_arrays(model, home, away, data.goals_home, data.goals_away)


def log_likelihood(model: ScoreModel, gap, data: FitDataset) -> float:
    """Sum of log masses of the observed scores (W/D/L classes for OLR and uniform)."""
    ll = _record_logliks(model, gap, data)
    total = float(ll.sum())
    if not np.isfinite(total):
        bad = int(np.flatnonzero(~np.isfinite(ll))[0])
        log.warning("zero-probability record %d: %s", bad, data.records[bad])
        return -math.inf
    return total


def information_criteria(log_likelihood: float, n_params: int, n_obs: int) -> tuple[float, float]:
    if n_obs < 1:
        raise ValueError("n_obs must be >= 1")
    aic = 2 * n_params - 2 * log_likelihood
    bic = n_params * math.log(n_obs) - 2 * log_likelihood
    return aic, bic


def wdl_losses(model: ScoreModel, gap, data: FitDataset) -> tuple[float, float]:
    """Multiclass logloss and Brier score on the win/draw/loss outcome."""
    home, away = data.ratings_for(model, gap)
    probs = outcome_probs_arrays(model, home, away)
    onehot = np.eye(3)[data.outcome]
    brier = float(((probs - onehot) ** 2).sum(axis=1).mean())
    p_real = probs[np.arange(len(data)), data.outcome]
    if np.any(p_real <= 0):
        bad = int(np.flatnonzero(p_real <= 0)[0])
        log.warning("zero predicted probability for record %d: %s", bad, data.records[bad])
        return math.inf, brier
    return float(-np.log(p_real).mean()), brier


# Fitting --------------------------------------------------------------------

def _unpack(family: str, x, r: int | None = None):
    """Optimizer vector -> (model, gap)."""
    x = [float(v) for v in x]
    if family == "poisson":
        return SimplePoisson(math.exp(x[1])), x[0]
    if family == "bipoisson":
        return BivariatePoisson(math.exp(x[1]), math.exp(x[2])), x[0]
    if family == "negbin":
        return NegativeBinomial(x[1], r), x[0]
    if family == "olr":
        # coefficient per 100 Elo points keeps the simplex well scaled
        return OrderedLogistic(x[0] / 100.0, (x[1], x[1] + math.exp(x[2]))), None
    raise ValueError(f"unknown family {family!r}")


# finite stand-in for -inf log-likelihood; inf breaks the simplex spread test
_REJECT = 1e100


def _objective(family, data, r=None):
    def nll(x):
        try:
            model, gap = _unpack(family, x, r)
            if family == "negbin" and model.alpha <= 0:
                return _REJECT
            ll = float(_record_logliks(model, gap, data).sum())
        except (ValueError, OverflowError):
            return _REJECT
        return -ll if np.isfinite(ll) else _REJECT

    return nll


def _starts(family: str, data: FitDataset, restarts: int, r: int | None = None) -> list[np.ndarray]:
    mean_total = float((data.goals_home + data.goals_away).mean())
    gaps = [1.0, 3.0, 5.0, 2.0, 4.0, 0.0, 6.0]
    while len(gaps) < restarts:
        gaps.append(gaps[-1] + 1.0)
    out = []
    for k in range(restarts):
        g = gaps[k]
        if family == "poisson":
            out.append(np.array([g, math.log(mean_total)]))
        elif family == "bipoisson":
            out.append(np.array([g, math.log(mean_total), -3.0 - k]))
        elif family == "negbin":
            m = mean_total / 2
            out.append(np.array([g, 2 * m / (r + m)]))
        elif family == "olr":
            out.append(np.array([0.3 * (k + 1), -0.8 + 0.1 * k, math.log(1.2)]))
    return out


def _minimize(fun, x0, tolerance, max_iterations):
    res = minimize(fun, x0, method="Nelder-Mead",
                   options={"xatol": 1e-9, "fatol": tolerance, "maxiter": max_iterations,
                            "maxfev": 2 * max_iterations})
    return res


def _fit_continuous(family, data, restarts, tolerance, max_iterations, r=None):
    fun = _objective(family, data, r)
    best = None
    ok = True
    for x0 in _starts(family, data, restarts, r):
        res = _minimize(fun, x0, tolerance, max_iterations)
        ok &= bool(res.success)
        if best is None or res.fun < best.fun:
            best = res
    # polish from the best restart; a further gain above tolerance means not converged
    polish = _minimize(fun, best.x, tolerance, max_iterations)
    converged = ok and polish.success and (best.fun - polish.fun) < max(tolerance, 1e-8 * abs(best.fun))
    if polish.fun < best.fun:
        best = polish
    return best, converged


def fit(family: str, data: FitDataset, restarts: int = 3, tolerance: float = 1e-8,
        max_iterations: int = 4000) -> FitResult:
    """Maximum-likelihood fit of one model family (gap included where relevant)."""
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    if family == "uniform":
        model, gap, converged = UniformGuess(), None, True
    elif family == "negbin":
        best, best_r, converged = None, None, True
        for r in NB_R_RANGE:
            res, conv = _fit_continuous(family, data, restarts, tolerance, max_iterations, r)
            if best is None or res.fun < best.fun:
                best, best_r, converged = res, r, conv
        model, gap = _unpack(family, best.x, best_r)
    else:
        best, converged = _fit_continuous(family, data, restarts, tolerance, max_iterations)
        model, gap = _unpack(family, best.x)
    if gap is not None:
        gap = float(gap)
    ll = log_likelihood(model, gap, data)
    aic, bic = information_criteria(ll, model.n_params, len(data))
    logloss, brier = wdl_losses(model, gap, data)
    if not converged:
        log.warning("%s fit did not converge", family)
    return FitResult(model, gap, ll, model.n_params, len(data), aic, bic, logloss, brier,
                     bool(converged), restarts)
