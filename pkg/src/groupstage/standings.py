"""Group tables and three-level qualification status.

Teams are compared on ``(points, goal_diff)`` only. Any remaining tie is
treated as unresolved: a team is ``CLEAN`` when it qualifies however the
tie is broken, ``SHARED`` when it qualifies under some resolution.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, replace
from enum import IntEnum
from typing import Iterable, Sequence


class QualStatus(IntEnum):
    NONE = 0
    SHARED = 1
    CLEAN = 2


@dataclass(frozen=True)
class PointsSystem:
    win_pts: int = 3
    draw_pts: int = 1
    loss_pts: int = 0

    def __post_init__(self):
        if self.loss_pts != 0:
            raise ValueError("loss_pts must be 0")
        if not self.win_pts > self.draw_pts >= self.loss_pts:
            raise ValueError("points system must satisfy win > draw >= loss")

    def award(self, gd: int) -> tuple[int, int]:
        """Points for (team, opponent) given the team's goal difference."""
        if gd > 0:
            return self.win_pts, self.loss_pts
        if gd < 0:
            return self.loss_pts, self.win_pts
        return self.draw_pts, self.draw_pts

    @classmethod
    def parse(cls, text: str) -> "PointsSystem":
        w, d = (int(x) for x in text.split(","))
        return cls(w, d)


@dataclass(frozen=True)
class TeamLine:
    team: str
    points: int = 0
    goal_diff: int = 0
    played: int = 0

    @property
    def key(self) -> tuple[int, int]:
        return self.points, self.goal_diff


@dataclass(frozen=True)
class QualRule:
    """``slots_in_group`` direct places, optionally a best-thirds route.

    ``thirds_pool`` holds the ``(points, goal_diff)`` of the third-placed
    teams of every other group; ``pool_slots`` of all thirds go through.
    """

    slots_in_group: int = 2
    thirds_pool: tuple[tuple[int, int], ...] | None = None
    pool_slots: int = 8

    def __post_init__(self):
        if self.slots_in_group < 1:
            raise ValueError("slots_in_group must be >= 1")
        if self.thirds_pool is not None:
            object.__setattr__(self, "thirds_pool", tuple(tuple(p) for p in self.thirds_pool))

    def pool_counts(self, key: tuple[int, int]) -> tuple[int, int]:
        """(strictly better, equal) pool entries relative to ``key``."""
        better = sum(1 for p in self.thirds_pool if p > key)
        equal = sum(1 for p in self.thirds_pool if p == key)
        return better, equal


Table = tuple[TeamLine, ...]


def sort_table(lines: Iterable[TeamLine]) -> Table:
    # sorted() is stable, so exact ties keep their input order
    return tuple(sorted(lines, key=lambda line: line.key, reverse=True))


def compute_table(results: Sequence[tuple], ps: PointsSystem, teams: Sequence[str] | None = None) -> Table:
    """Build a sorted table from ``(team_a, team_b, goals_a, goals_b)`` results.

    ``teams`` fixes the set (and tie order) of teams, including teams that
    have not played yet.
    """
    order: list[str] = list(teams) if teams is not None else []
    pts: dict[str, int] = {t: 0 for t in order}
    gd: dict[str, int] = {t: 0 for t in order}
    played: dict[str, int] = {t: 0 for t in order}
    seen: set[frozenset] = set()
    for team_a, team_b, goals_a, goals_b in results:
        if team_a == team_b:
            raise ValueError(f"team {team_a!r} cannot play itself")
        pair = frozenset((team_a, team_b))
        if pair in seen:
            raise ValueError(f"duplicate fixture {team_a} vs {team_b}")
        seen.add(pair)
        for t in (team_a, team_b):
            if t not in pts:
                order.append(t)
                pts[t] = gd[t] = played[t] = 0
        diff = int(goals_a) - int(goals_b)
        pa, pb = ps.award(diff)
        pts[team_a] += pa
        pts[team_b] += pb
        gd[team_a] += diff
        gd[team_b] -= diff
        played[team_a] += 1
        played[team_b] += 1
    return sort_table(TeamLine(t, pts[t], gd[t], played[t]) for t in order)


def apply_hypothetical(table: Sequence[TeamLine], game: tuple[str, str], gd: int, ps: PointsSystem) -> Table:
    """New table after ``game[0]`` beats ``game[1]`` by ``gd`` (negative = loses)."""
    team_x, team_y = game
    names = {line.team for line in table}
    for t in (team_x, team_y):
        if t not in names:
            raise KeyError(f"team {t!r} not in table")
    px, py = ps.award(gd)
    out = []
    for line in table:
        if line.team == team_x:
            line = replace(line, points=line.points + px, goal_diff=line.goal_diff + gd, played=line.played + 1)
        elif line.team == team_y:
            line = replace(line, points=line.points + py, goal_diff=line.goal_diff - gd, played=line.played + 1)
        out.append(line)
    return sort_table(out)


def status_from_keys(own: tuple[int, int], others: Iterable[tuple[int, int]], rule: QualRule,
                     sorted_pool: Sequence[tuple[int, int]] | None = None) -> QualStatus:
    """Core of :func:`qual_status` on bare ``(points, goal_diff)`` keys.

    ``sorted_pool`` may pass the thirds pool pre-sorted ascending to skip
    re-scanning it on hot paths.
    """
    better = tied = 0
    for k in others:
        if k > own:
            better += 1
        elif k == own:
            tied += 1
    best_rank = better + 1
    worst_rank = better + tied + 1
    q = rule.slots_in_group
    if worst_rank <= q:
        return QualStatus.CLEAN
    if rule.thirds_pool is None or not best_rank <= q + 1 <= worst_rank:
        return QualStatus.SHARED if best_rank <= q else QualStatus.NONE
    # rank q + 1 is a reachable placement: try the thirds route there
    if sorted_pool is None:
        pool_better, pool_equal = rule.pool_counts(own)
    else:
        n = len(sorted_pool)
        lo = bisect.bisect_left(sorted_pool, own)
        hi = bisect.bisect_right(sorted_pool, own)
        pool_better, pool_equal = n - hi, hi - lo
    slots = rule.pool_slots
    if worst_rank == q + 1 and pool_better + pool_equal + 1 <= slots:
        return QualStatus.CLEAN
    if best_rank <= q or pool_better + 1 <= slots:
        return QualStatus.SHARED
    return QualStatus.NONE


def qual_status(table: Sequence[TeamLine], team: str, rule: QualRule) -> QualStatus:
    own = None
    others = []
    for line in table:
        if line.team == team:
            own = line.key
        else:
            others.append(line.key)
    if own is None:
        raise KeyError(f"team {team!r} not in table")
    return status_from_keys(own, others, rule)
