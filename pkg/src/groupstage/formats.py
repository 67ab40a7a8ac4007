"""Group-stage formats, last-round settings and pre-last-round simulation."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass

import numpy as np

from .classification import GD_RANGE, GroupContext
from .ratings import draw_group, pool_bounds, pot_intervals
from .score_models import EXACT_MODELS, ScoreModel, sample_scores
from .standings import PointsSystem, QualRule, compute_table

POT_NAMES = "ABCDE"


class FormatKind(enum.Enum):
    G4_TOP2 = "g4"
    G3_TOP2 = "g3"
    G5_TOP2 = "g5"
    G4_BEST3RDS = "g4best3"
    G5_BEST3RDS = "g5best3"


_LAYOUT = {
    # kind: (n_groups, group_size)
    FormatKind.G4_TOP2: (8, 4),
    FormatKind.G3_TOP2: (16, 3),
    FormatKind.G5_TOP2: (8, 5),
    FormatKind.G4_BEST3RDS: (12, 4),
    FormatKind.G5_BEST3RDS: (12, 5),
}


@dataclass(frozen=True)
class FormatSpec:
    kind: FormatKind
    slots_in_group: int = 2
    pool_slots: int = 8

    @classmethod
    def parse(cls, name: str) -> "FormatSpec":
        return cls(FormatKind(name))

    @property
    def n_groups(self) -> int:
        return _LAYOUT[self.kind][0]

    @property
    def group_size(self) -> int:
        return _LAYOUT[self.kind][1]

    @property
    def best_thirds(self) -> bool:
        return self.kind in (FormatKind.G4_BEST3RDS, FormatKind.G5_BEST3RDS)

    @property
    def last_round_games(self) -> int:
        return 1 if self.group_size == 3 else 2


@dataclass(frozen=True)
class SettingChoice:
    """Which pots meet in the last round, and which pot sits it out.

    Pots are 1-indexed, 1 = strongest. Groups of three are fully described
    by the passive pot: setting 1 rests the weakest pot, setting 3 the
    strongest.
    """

    setting: int
    passive_pot: int | None = None

    @classmethod
    def for_format(cls, fmt: FormatSpec, setting: int, passive_pot: int | None = None) -> "SettingChoice":
        if fmt.group_size == 3:
            derived = 4 - setting
            if passive_pot is not None and passive_pot != derived:
                raise ValueError(f"groups of 3: setting {setting} means passive pot {derived}, got {passive_pot}")
            passive_pot = derived
        choice = cls(setting, passive_pot)
        choice.check(fmt)
        return choice

    def check(self, fmt: FormatSpec) -> None:
        if self.setting not in (1, 2, 3):
            raise ValueError(f"setting must be 1, 2 or 3, got {self.setting}")
        odd = fmt.group_size % 2 == 1
        if odd and self.passive_pot is None:
            raise ValueError(f"format {fmt.kind.value} needs a passive pot")
        if not odd and self.passive_pot is not None:
            raise ValueError(f"format {fmt.kind.value} has no passive team")
        if odd and not 1 <= self.passive_pot <= fmt.group_size:
            raise ValueError(f"passive pot must be in 1..{fmt.group_size}")
        if fmt.group_size == 3 and self.passive_pot != 4 - self.setting:
            raise ValueError("groups of 3: passive pot must equal 4 - setting")


def parse_pot(text: str) -> int:
    """``'A'`` / ``'a'`` / ``'1'`` -> 1."""
    text = text.strip()
    if text.isdigit():
        return int(text)
    idx = POT_NAMES.find(text.upper())
    if len(text) != 1 or idx < 0:
        raise ValueError(f"unknown pot {text!r}")
    return idx + 1


# last-round pairings over four pots in strength order (0-based)
_FOUR_POT_PAIRINGS = {
    1: ((0, 3), (1, 2)),
    2: ((0, 2), (1, 3)),
    3: ((0, 1), (2, 3)),
}


@dataclass(frozen=True)
class FixturePlan:
    """Pot-level schedule: pots are 1-indexed, each game listed stronger pot first."""

    group_size: int
    pre_last: tuple[tuple[int, int], ...]
    last_round: tuple[tuple[int, int], ...]
    passive_pot: int | None = None


def schedule(fmt: FormatSpec, choice: SettingChoice) -> FixturePlan:
    choice.check(fmt)
    n = fmt.group_size
    pots = list(range(1, n + 1))
    if n == 3:
        active = [p for p in pots if p != choice.passive_pot]
        last = (tuple(active),)
    else:
        active = [p for p in pots if p != choice.passive_pot]
        last = tuple((active[a], active[b]) for a, b in _FOUR_POT_PAIRINGS[choice.setting])
    all_games = list(itertools.combinations(pots, 2))
    pre = tuple(g for g in all_games if g not in last)
    return FixturePlan(n, pre, last, choice.passive_pot)


def scenarios(ctx: GroupContext) -> tuple[int | None, ...]:
    """Parallel-game goal differences the focal teams must consider."""
    return GD_RANGE if ctx.parallel_game is not None else (None,)


def _third_place_keys(model: ScoreModel, ratings: np.ndarray, ps: PointsSystem,
                      rng: np.random.Generator) -> list[tuple[int, int]]:
    """Play full round robins honestly; third-placed (points, goal_diff) per group."""
    n_groups, size = ratings.shape
    pairs = np.array(list(itertools.combinations(range(size), 2)))
    scores = sample_scores(model, ratings[:, pairs[:, 0]], ratings[:, pairs[:, 1]], rng)
    gd = scores[..., 0] - scores[..., 1]
    pa = np.where(gd > 0, ps.win_pts, np.where(gd == 0, ps.draw_pts, ps.loss_pts))
    pb = np.where(gd < 0, ps.win_pts, np.where(gd == 0, ps.draw_pts, ps.loss_pts))
    points = np.zeros((n_groups, size), dtype=np.int64)
    diffs = np.zeros((n_groups, size), dtype=np.int64)
    for g, (a, b) in enumerate(pairs):
        points[:, a] += pa[:, g]
        points[:, b] += pb[:, g]
        diffs[:, a] += gd[:, g]
        diffs[:, b] -= gd[:, g]
    out = []
    for grp in range(n_groups):
        keys = sorted(zip(points[grp].tolist(), diffs[grp].tolist()), reverse=True)
        out.append(keys[2])
    return out


def simulate_context(fmt: FormatSpec, choice: SettingChoice, model: ScoreModel, ps: PointsSystem,
                     gap: float, rng: np.random.Generator) -> list[GroupContext]:
    """Simulate one group up to its last round; one context per last-round game.

    For best-thirds formats the group is the last one to play: the other
    groups are played out first and their thirds form the known pool.
    """
    if not isinstance(model, EXACT_MODELS):
        raise TypeError("simulation needs an exact-score model")
    plan = schedule(fmt, choice)
    partition = pot_intervals(*pool_bounds(gap), fmt.group_size)
    ratings = draw_group(partition, rng)
    names = POT_NAMES[: fmt.group_size]

    idx = np.array(plan.pre_last) - 1
    scores = sample_scores(model, ratings[idx[:, 0]], ratings[idx[:, 1]], rng)
    results = [
        (names[a], names[b], int(s[0]), int(s[1]))
        for (a, b), s in zip(idx.tolist(), scores.tolist())
    ]
    table = compute_table(results, ps, teams=names)

    if fmt.best_thirds:
        others = np.stack([draw_group(partition, rng) for _ in range(fmt.n_groups - 1)])
        pool = tuple(_third_place_keys(model, others, ps, rng))
        rule = QualRule(fmt.slots_in_group, pool, fmt.pool_slots)
    else:
        rule = QualRule(fmt.slots_in_group)

    games = [(names[a - 1], names[b - 1]) for a, b in plan.last_round]
    contexts = []
    for g, focal in enumerate(games):
        parallel = games[1 - g] if len(games) == 2 else None
        contexts.append(GroupContext(table, focal, parallel, ps, rule))
    return contexts
