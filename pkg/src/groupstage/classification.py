"""Last-round game classification.

For each team of a last-round game we tabulate its qualification status
for every own goal difference in ``-5..+5`` against every outcome of the
simultaneous parallel game. The team's target is the smallest own goal
difference that already secures its best achievable status vector; the
two targets decide whether the game is competitive, collusive or
stake-less.
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass
from typing import Sequence

from .standings import PointsSystem, QualRule, QualStatus, TeamLine, status_from_keys

MAX_GD = 5
GD_RANGE = tuple(range(-MAX_GD, MAX_GD + 1))


class Verdict(enum.Enum):
    COMPETITIVE = "competitive"
    COLLUSIVE = "collusive"
    STAKELESS = "stakeless"


class _Indifferent:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INDIFFERENT"

    def __reduce__(self):
        return (_Indifferent, ())


INDIFFERENT = _Indifferent()


@dataclass(frozen=True)
class GroupContext:
    """Standings entering the last round plus the last-round pairings.

    ``parallel_game`` is the simultaneous game whose result the focal teams
    do not know; ``None`` when there is none (one game left, or the other
    game is already finished).
    """

    table: tuple[TeamLine, ...]
    focal_game: tuple[str, str]
    parallel_game: tuple[str, str] | None
    ps: PointsSystem
    rule: QualRule

    def __post_init__(self):
        object.__setattr__(self, "table", tuple(self.table))
        object.__setattr__(self, "focal_game", tuple(self.focal_game))
        if self.parallel_game is not None:
            object.__setattr__(self, "parallel_game", tuple(self.parallel_game))
        names = [line.team for line in self.table]
        if len(set(names)) != len(names):
            raise ValueError("duplicate team in table")
        playing = list(self.focal_game) + list(self.parallel_game or ())
        if len(set(playing)) != len(playing):
            raise ValueError("last-round games must involve distinct teams")
        for t in playing:
            if t not in names:
                raise ValueError(f"team {t!r} not in table")

    def key_of(self, team: str) -> tuple[int, int]:
        for line in self.table:
            if line.team == team:
                return line.key
        raise KeyError(team)

    def scenarios(self) -> tuple[int | None, ...]:
        return GD_RANGE if self.parallel_game is not None else (None,)

    def swapped(self) -> "GroupContext":
        i, j = self.focal_game
        return GroupContext(self.table, (j, i), self.parallel_game, self.ps, self.rule)


@dataclass(frozen=True)
class ClassifiedGame:
    verdict: Verdict
    target_i: object  # int or INDIFFERENT
    target_j: object
    compatibility_zone: tuple[int, ...]
    satisfied: tuple[int, ...] | None = None  # non-indifferent team's set, stake-less games only

    def to_dict(self) -> dict:
        def tgt(t):
            return "indifferent" if t is INDIFFERENT else t

        doc = {
            "verdict": self.verdict.value,
            "target_i": tgt(self.target_i),
            "target_j": tgt(self.target_j),
            "compatibility_zone": list(self.compatibility_zone),
        }
        if self.satisfied is not None:
            doc["satisfied"] = list(self.satisfied)
        return doc


def _status_vector(own, opp, par, rest, d, ps, rule, sorted_pool):
    """Statuses of ``own`` after beating ``opp`` by ``d``, per parallel scenario."""
    gain_own, gain_opp = ps.award(d)
    own_key = (own[0] + gain_own, own[1] + d)
    opp_key = (opp[0] + gain_opp, opp[1] - d)
    if par is None:
        return (status_from_keys(own_key, (opp_key, *rest), rule, sorted_pool),)
    k, l = par
    out = []
    for s in GD_RANGE:
        gk, gl = ps.award(s)
        others = (opp_key, (k[0] + gk, k[1] + s), (l[0] + gl, l[1] - s), *rest)
        out.append(status_from_keys(own_key, others, rule, sorted_pool))
    return tuple(out)


def _target_from_keys(own, opp, par, rest, ps, rule, sorted_pool):
    top = _status_vector(own, opp, par, rest, MAX_GD, ps, rule, sorted_pool)
    if _status_vector(own, opp, par, rest, -MAX_GD, ps, rule, sorted_pool) == top:
        return INDIFFERENT
    # vectors are monotone in d, so the optimal set is an upper interval
    best = MAX_GD
    for d in range(MAX_GD - 1, -MAX_GD, -1):
        if _status_vector(own, opp, par, rest, d, ps, rule, sorted_pool) != top:
            break
        best = d
    return best


@functools.lru_cache(maxsize=1 << 17)
def _targets_cached(ki, kj, par, rest, ps, rule):
    sorted_pool = tuple(sorted(rule.thirds_pool)) if rule.thirds_pool is not None else None
    t_i = _target_from_keys(ki, kj, par, rest, ps, rule, sorted_pool)
    t_j = _target_from_keys(kj, ki, par, rest, ps, rule, sorted_pool)
    return t_i, t_j


def _split_keys(ctx: GroupContext, team: str):
    i, j = ctx.focal_game
    if team == j:
        i, j = j, i
    elif team != i:
        raise ValueError(f"team {team!r} is not in the focal game {ctx.focal_game}")
    playing = {i, j}
    par = None
    if ctx.parallel_game is not None:
        k, l = ctx.parallel_game
        playing |= {k, l}
        par = (ctx.key_of(k), ctx.key_of(l))
    rest = tuple(sorted(line.key for line in ctx.table if line.team not in playing))
    return ctx.key_of(i), ctx.key_of(j), par, rest


def value_vector(ctx: GroupContext, team: str, own_gd: int) -> tuple[QualStatus, ...]:
    """Status of ``team`` per parallel-game scenario, given its own result."""
    if not -MAX_GD <= own_gd <= MAX_GD:
        raise ValueError(f"own goal difference {own_gd} outside [-{MAX_GD}, {MAX_GD}]")
    own, opp, par, rest = _split_keys(ctx, team)
    return _status_vector(own, opp, par, rest, own_gd, ctx.ps, ctx.rule, None)


def target(ctx: GroupContext, team: str):
    """Lowest own goal difference reaching the best status vector, or INDIFFERENT."""
    own, opp, par, rest = _split_keys(ctx, team)
    return _target_from_keys(own, opp, par, rest, ctx.ps, ctx.rule, None)


def verdict_from_targets(t_i, t_j) -> ClassifiedGame:
    """Combine two targets (each in its own team's favour) into a verdict."""
    if t_i is INDIFFERENT or t_j is INDIFFERENT:
        satisfied = None
        if t_i is not INDIFFERENT:
            satisfied = tuple(d for d in GD_RANGE if d >= t_i)
        elif t_j is not INDIFFERENT:
            satisfied = tuple(d for d in GD_RANGE if d <= -t_j)
        return ClassifiedGame(Verdict.STAKELESS, t_i, t_j, (), satisfied)
    zone = tuple(d for d in GD_RANGE if t_i <= d <= -t_j)
    verdict = Verdict.COLLUSIVE if zone else Verdict.COMPETITIVE
    return ClassifiedGame(verdict, t_i, t_j, zone)


def classify(ctx: GroupContext) -> ClassifiedGame:
    """Classify the focal game; the zone is in goal differences for ``focal_game[0]``."""
    ki, kj, par, rest = _split_keys(ctx, ctx.focal_game[0])
    if par is not None:
        # swapping k and l only reverses every vector, targets are unchanged
        par = tuple(sorted(par))
    t_i, t_j = _targets_cached(ki, kj, par, rest, ctx.ps, ctx.rule)
    return verdict_from_targets(t_i, t_j)


def context_from_dict(doc: dict) -> GroupContext:
    """Parse the JSON form used by the ``classify`` command."""
    table = tuple(
        TeamLine(str(row["team"]), int(row["points"]), int(row["goal_diff"]), int(row.get("played", 0)))
        for row in doc["table"]
    )
    pts = doc.get("points", [3, 1])
    ps = PointsSystem(int(pts[0]), int(pts[1]))
    q = doc.get("qualification", {})
    pool = q.get("thirds_pool")
    rule = QualRule(
        slots_in_group=int(q.get("slots_in_group", 2)),
        thirds_pool=None if pool is None else tuple((int(p), int(g)) for p, g in pool),
        pool_slots=int(q.get("pool_slots", 8)),
    )
    par = doc.get("parallel_game")
    return GroupContext(table, tuple(doc["focal_game"]), None if par is None else tuple(par), ps, rule)


def context_to_dict(ctx: GroupContext) -> dict:
    q: dict = {"slots_in_group": ctx.rule.slots_in_group}
    if ctx.rule.thirds_pool is not None:
        q["thirds_pool"] = [list(p) for p in ctx.rule.thirds_pool]
        q["pool_slots"] = ctx.rule.pool_slots
    return {
        "table": [
            {"team": l.team, "points": l.points, "goal_diff": l.goal_diff, "played": l.played}
            for l in ctx.table
        ],
        "focal_game": list(ctx.focal_game),
        "parallel_game": None if ctx.parallel_game is None else list(ctx.parallel_game),
        "points": [ctx.ps.win_pts, ctx.ps.draw_pts],
        "qualification": q,
    }


def gijon_context() -> GroupContext:
    """West Germany v Austria, 1982, with Algeria and Chile already finished."""
    table = (
        TeamLine("Austria", 4, 3, 2),
        TeamLine("Algeria", 4, 0, 3),
        TeamLine("West Germany", 2, 2, 2),
        TeamLine("Chile", 0, -5, 3),
    )
    return GroupContext(table, ("West Germany", "Austria"), None, PointsSystem(2, 1), QualRule(2))
