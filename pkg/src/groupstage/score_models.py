"""Match outcome models driven by (rescaled) team ratings.

Three exact-score models (simple Poisson, bivariate Poisson, negative
binomial) and two win/draw/loss-only benchmarks (ordered logit, uniform
guess). Models are frozen dataclasses; functions dispatch on type.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np
from scipy.special import expit, gammaln

# per-team truncation for pmf sums
K_MAX = 25


class Score(NamedTuple):
    k_home: int
    k_away: int


class OutcomeTriple(NamedTuple):
    p_win: float
    p_draw: float
    p_loss: float


@dataclass(frozen=True)
class SimplePoisson:
    alpha: float
    family = "poisson"
    n_params = 2  # alpha + gap


@dataclass(frozen=True)
class BivariatePoisson:
    alpha: float
    beta: float = 0.0
    family = "bipoisson"
    n_params = 3


@dataclass(frozen=True)
class NegativeBinomial:
    alpha: float
    r: int
    family = "negbin"
    n_params = 3


@dataclass(frozen=True)
class OrderedLogistic:
    coefficient: float
    thresholds: tuple[float, float]
    family = "olr"
    n_params = 3

    def __post_init__(self):
        t1, t2 = self.thresholds
        if not t1 < t2:
            raise ValueError("ordered logit thresholds must satisfy t1 < t2")


@dataclass(frozen=True)
class UniformGuess:
    family = "uniform"
    n_params = 0


ScoreModel = Union[SimplePoisson, BivariatePoisson, NegativeBinomial, OrderedLogistic, UniformGuess]
EXACT_MODELS = (SimplePoisson, BivariatePoisson, NegativeBinomial)
FAMILIES = ("poisson", "bipoisson", "negbin", "olr", "uniform")


class NoGoalScale(TypeError):
    pass


def strength_share(r_i, r_j):
    return r_i / (r_i + r_j)


def _require_exact(model):
    if not isinstance(model, EXACT_MODELS):
        raise NoGoalScale(f"model has no goal scale: {type(model).__name__}")


def _nb_success(model: NegativeBinomial, p):
    q = model.alpha * p
    if np.any(q >= 1):
        raise ValueError("negative binomial success probability >= 1")
    return q


def expected_goals(model: ScoreModel, r_i: float, r_j: float) -> float:
    """Mean goals scored by team ``i`` against team ``j``."""
    _require_exact(model)
    p = strength_share(r_i, r_j)
    if isinstance(model, SimplePoisson):
        return model.alpha * p
    if isinstance(model, BivariatePoisson):
        return model.alpha * p + model.beta
    q = _nb_success(model, p)
    return model.r * q / (1.0 - q)


def _poisson_logpmf(k, lam):
    k = np.asarray(k, dtype=float)
    lam = np.asarray(lam, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = k * np.log(lam) - lam - gammaln(k + 1)
    # lam == 0: mass 1 at k == 0
    return np.where(lam == 0, np.where(k == 0, 0.0, -np.inf), out)


def _nb_logpmf(k, r, q):
    k = np.asarray(k, dtype=float)
    return gammaln(k + r) - gammaln(r) - gammaln(k + 1) + r * np.log1p(-q) + k * np.log(q)


def _bivariate_pmf(x, y, lam1, lam2, beta):
    """Vectorised bivariate Poisson mass, summing over the shared component."""
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    x, y, lam1, lam2 = np.broadcast_arrays(x, y, np.asarray(lam1, float), np.asarray(lam2, float))
    total = np.zeros(x.shape)
    zmax = int(np.minimum(x, y).max()) if x.size else 0
    for z in range(zmax + 1):
        ok = np.minimum(x, y) >= z
        xz = np.where(ok, x - z, 0)
        yz = np.where(ok, y - z, 0)
        term = np.exp(
            _poisson_logpmf(xz, lam1) + _poisson_logpmf(yz, lam2) + _poisson_logpmf(z, beta)
        )
        total += np.where(ok, term, 0.0)
    return total


def score_logpmf_arrays(model: ScoreModel, r_i, r_j, k_i, k_j) -> np.ndarray:
    """Log joint mass of ``(k_i, k_j)`` for arrays of games."""
    _require_exact(model)
    r_i = np.asarray(r_i, dtype=float)
    r_j = np.asarray(r_j, dtype=float)
    p = strength_share(r_i, r_j)
    if isinstance(model, SimplePoisson):
        return _poisson_logpmf(k_i, model.alpha * p) + _poisson_logpmf(k_j, model.alpha * (1 - p))
    if isinstance(model, BivariatePoisson):
        with np.errstate(divide="ignore"):
            return np.log(_bivariate_pmf(k_i, k_j, model.alpha * p, model.alpha * (1 - p), model.beta))
    q_i = _nb_success(model, p)
    q_j = _nb_success(model, 1 - p)
    return _nb_logpmf(k_i, model.r, q_i) + _nb_logpmf(k_j, model.r, q_j)


def score_pmf(model: ScoreModel, r_i: float, r_j: float, s) -> float:
    k_i, k_j = s
    if k_i < 0 or k_j < 0:
        return 0.0
    return float(np.exp(score_logpmf_arrays(model, r_i, r_j, k_i, k_j)))


def score_matrix(model: ScoreModel, r_i: float, r_j: float, k_max: int = K_MAX) -> np.ndarray:
    """Grid of joint masses, rows = goals of ``i``, columns = goals of ``j``."""
    k = np.arange(k_max + 1)
    return np.exp(score_logpmf_arrays(model, r_i, r_j, k[:, None], k[None, :]))


def sample_score(model: ScoreModel, r_i: float, r_j: float, rng: np.random.Generator) -> Score:
    _require_exact(model)
    p = strength_share(r_i, r_j)
    if isinstance(model, SimplePoisson):
        x, y = rng.poisson(model.alpha * np.array([p, 1 - p]))
        return Score(int(x), int(y))
    if isinstance(model, BivariatePoisson):
        x, y, z = rng.poisson([model.alpha * p, model.alpha * (1 - p), model.beta])
        return Score(int(x + z), int(y + z))
    q = _nb_success(model, np.array([p, 1 - p]))
    x, y = rng.negative_binomial(model.r, 1 - q)
    return Score(int(x), int(y))


def sample_scores(model: ScoreModel, r_i, r_j, rng: np.random.Generator) -> np.ndarray:
    """Sample many games at once; returns an ``(n, 2)`` integer array."""
    _require_exact(model)
    r_i = np.asarray(r_i, dtype=float)
    r_j = np.asarray(r_j, dtype=float)
    p = strength_share(r_i, r_j)
    if isinstance(model, SimplePoisson):
        return rng.poisson(model.alpha * np.stack([p, 1 - p], axis=-1))
    if isinstance(model, BivariatePoisson):
        xy = rng.poisson(model.alpha * np.stack([p, 1 - p], axis=-1))
        z = rng.poisson(model.beta, size=p.shape)
        return xy + z[..., None]
    q = _nb_success(model, np.stack([p, 1 - p], axis=-1))
    return rng.negative_binomial(model.r, 1 - q)


def outcome_probs(model: ScoreModel, r_i: float, r_j: float) -> OutcomeTriple:
    """Win/draw/loss probabilities from team ``i``'s point of view."""
    if isinstance(model, UniformGuess):
        return OutcomeTriple(1 / 3, 1 / 3, 1 / 3)
    if isinstance(model, OrderedLogistic):
        t1, t2 = model.thresholds
        eta = model.coefficient * (r_i - r_j)
        loss = float(expit(t1 - eta))
        not_win = float(expit(t2 - eta))
        return OutcomeTriple(1.0 - not_win, not_win - loss, loss)
    m = score_matrix(model, r_i, r_j)
    win = float(np.tril(m, -1).sum())
    draw = float(np.trace(m))
    loss = float(np.triu(m, 1).sum())
    total = win + draw + loss
    return OutcomeTriple(win / total, draw / total, loss / total)


def outcome_probs_arrays(model: ScoreModel, r_i, r_j) -> np.ndarray:
    """Vectorised outcome probabilities, shape ``(n, 3)`` as (win, draw, loss)."""
    r_i = np.atleast_1d(np.asarray(r_i, dtype=float))
    r_j = np.atleast_1d(np.asarray(r_j, dtype=float))
    if isinstance(model, UniformGuess):
        return np.full((r_i.size, 3), 1 / 3)
    if isinstance(model, OrderedLogistic):
        t1, t2 = model.thresholds
        eta = model.coefficient * (r_i - r_j)
        loss = expit(t1 - eta)
        not_win = expit(t2 - eta)
        return np.stack([1 - not_win, not_win - loss, loss], axis=-1)
    k = np.arange(K_MAX + 1)
    m = np.exp(score_logpmf_arrays(model, r_i[:, None, None], r_j[:, None, None], k[:, None], k[None, :]))
    lower = np.tril(np.ones((K_MAX + 1, K_MAX + 1), dtype=bool), -1)
    win = (m * lower).sum(axis=(1, 2))
    loss = (m * lower.T).sum(axis=(1, 2))
    draw = np.trace(m, axis1=1, axis2=2)
    out = np.stack([win, draw, loss], axis=-1)
    return out / out.sum(axis=-1, keepdims=True)


def model_to_dict(model: ScoreModel, gap: float | None = None) -> dict:
    doc: dict = {"family": model.family}
    if isinstance(model, (SimplePoisson, BivariatePoisson, NegativeBinomial)):
        doc["alpha"] = model.alpha
    if isinstance(model, BivariatePoisson):
        doc["beta"] = model.beta
    if isinstance(model, NegativeBinomial):
        doc["r"] = model.r
    if isinstance(model, OrderedLogistic):
        doc["coefficient"] = model.coefficient
        doc["thresholds"] = list(model.thresholds)
    if gap is not None:
        doc["gap"] = gap
    return doc


def model_from_dict(doc: dict) -> tuple[ScoreModel, float | None]:
    """Parse a parameter document; returns ``(model, gap)``."""
    family = doc.get("family")
    gap = doc.get("gap")
    gap = None if gap is None else float(gap)
    try:
        if family == "poisson":
            return SimplePoisson(float(doc["alpha"])), gap
        if family == "bipoisson":
            return BivariatePoisson(float(doc["alpha"]), float(doc.get("beta", 0.0))), gap
        if family == "negbin":
            r = doc["r"]
            if int(r) != r or r < 1:
                raise ValueError(f"negative binomial r must be a positive integer, got {r}")
            return NegativeBinomial(float(doc["alpha"]), int(r)), gap
        if family == "olr":
            t1, t2 = doc["thresholds"]
            return OrderedLogistic(float(doc["coefficient"]), (float(t1), float(t2))), gap
        if family == "uniform":
            return UniformGuess(), gap
    except KeyError as exc:
        raise ValueError(f"missing parameter {exc.args[0]!r} for family {family!r}") from None
    raise ValueError(f"unknown model family {family!r}")


# Fitted simple Poisson on World Cup group games 1998-2018 (rounds 1-2).
FITTED_POISSON = SimplePoisson(alpha=2.5156)
FITTED_GAP = 3.7581
