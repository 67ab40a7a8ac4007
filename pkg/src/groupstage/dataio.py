"""Historical game ingestion and the empirical / validation reports."""

from __future__ import annotations

import csv
import io
import itertools
from collections import Counter, defaultdict
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .calibration import FitDataset, GameRecord
from .classification import GroupContext, classify
from .ratings import draw_group, pot_intervals
from .score_models import ScoreModel, sample_scores
from .standings import PointsSystem, QualRule, compute_table

COLUMNS = ("edition", "group_id", "round", "team_home", "team_away",
           "elo_home", "elo_away", "goals_home", "goals_away")
EDITIONS = (1998, 2002, 2006, 2010, 2014, 2018)
REPORT_KINDS = ("edition_goals", "score_grid", "settings", "classes", "validation")


class HistoryFormatError(ValueError):
    """Malformed games file; ``errors`` lists ``(line, message)`` pairs."""

    def __init__(self, errors: list[tuple[int, str]]):
        self.errors = errors
        super().__init__("; ".join(f"line {n}: {msg}" if n else msg for n, msg in errors))


def read_games(path) -> list[GameRecord]:
    """Parse a games CSV, checking the header and every field."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in COLUMNS if c not in header]
        if missing:
            raise HistoryFormatError([(1, f"missing column(s): {', '.join(missing)}")])
        records, errors = [], []
        for lineno, row in enumerate(reader, start=2):
            try:
                records.append(_parse_row(row))
            except ValueError as exc:
                errors.append((lineno, str(exc)))
    if errors:
        raise HistoryFormatError(errors)
    return records


def _int_field(row, name):
    text = (row[name] or "").strip()
    try:
        return int(text)
    except ValueError:
        raise ValueError(f"{name} must be an integer, got {text!r}") from None


def _parse_row(row) -> GameRecord:
    try:
        elo_home = float(row["elo_home"])
        elo_away = float(row["elo_away"])
    except (TypeError, ValueError):
        raise ValueError(f"non-numeric Elo: {row['elo_home']!r}, {row['elo_away']!r}") from None
    return GameRecord(
        edition=_int_field(row, "edition"),
        group_id=row["group_id"].strip(),
        stage_round=_int_field(row, "round"),
        team_home=row["team_home"].strip(),
        team_away=row["team_away"].strip(),
        elo_home=elo_home,
        elo_away=elo_away,
        goals_home=_int_field(row, "goals_home"),
        goals_away=_int_field(row, "goals_away"),
    )


def write_games(records, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in records:
            w.writerow([r.edition, r.group_id, r.stage_round, r.team_home, r.team_away,
                        _fmt(r.elo_home), _fmt(r.elo_away), r.goals_home, r.goals_away])


def _fmt(x: float) -> str:
    return f"{x:.10g}"


@dataclass(frozen=True)
class HistoryDataset:
    records: tuple[GameRecord, ...]

    def groups(self) -> dict[tuple[int, str], list[GameRecord]]:
        out: dict = defaultdict(list)
        for r in self.records:
            out[(r.edition, r.group_id)].append(r)
        return dict(sorted(out.items()))

    def team_elo(self, edition: int, group_id: str) -> dict[str, float]:
        elo = {}
        for r in self.groups()[(edition, group_id)]:
            elo[r.team_home] = r.elo_home
            elo[r.team_away] = r.elo_away
        return elo

    def fit_dataset(self, pool: str = "pooled") -> FitDataset:
        return FitDataset([r for r in self.records if r.stage_round <= 2], pool)


def load_history(path) -> HistoryDataset:
    """Load and validate a complete group-stage history (rounds 1-3)."""
    records = read_games(path)
    ds = HistoryDataset(tuple(records))
    errors = []
    for (edition, gid), games in ds.groups().items():
        label = f"group {gid} ({edition})"
        if len(games) != 6:
            errors.append((0, f"{label} has {len(games)} games, expected 6"))
            continue
        rounds = Counter(g.stage_round for g in games)
        if set(rounds) - {1, 2, 3} or any(rounds[k] != 2 for k in (1, 2, 3)):
            errors.append((0, f"{label} must have two games in each of rounds 1-3, got {dict(rounds)}"))
        teams = {g.team_home for g in games} | {g.team_away for g in games}
        if len(teams) != 4:
            errors.append((0, f"{label} has {len(teams)} teams, expected 4"))
    if errors:
        raise HistoryFormatError(errors)
    return ds


def assemble_history(matches_path, elo_path, out_path) -> int:
    """Join a results file with start-of-tournament Elo ratings.

    ``matches_path`` columns: edition, group_id, round, team_home, team_away,
    goals_home, goals_away. ``elo_path`` columns: edition, team, elo.
    Returns the number of games written.
    """
    with open(elo_path, newline="") as fh:
        elo = {(int(row["edition"]), row["team"].strip()): float(row["elo"]) for row in csv.DictReader(fh)}
    records = []
    with open(matches_path, newline="") as fh:
        for lineno, row in enumerate(csv.DictReader(fh), start=2):
            ed = int(row["edition"])
            home, away = row["team_home"].strip(), row["team_away"].strip()
            for t in (home, away):
                if (ed, t) not in elo:
                    raise HistoryFormatError([(lineno, f"no Elo rating for {t} in {ed}")])
            records.append(GameRecord(ed, row["group_id"].strip(), int(row["round"]), home, away,
                                      elo[(ed, home)], elo[(ed, away)],
                                      int(row["goals_home"]), int(row["goals_away"])))
    write_games(records, out_path)
    return len(records)


def synthetic_history(model: ScoreModel, gap: float, seed: int, editions=EDITIONS, n_groups: int = 8,
                      elo_range=(1500.0, 2200.0)) -> HistoryDataset:
    """Full group stages drawn from ``model``; a stand-in with the real data's shape.

    Raw Elo ratings come from four equal pots over ``elo_range``; scores use
    the ratings rescaled over that same range. The round-1/2/3 schedule of
    each group is a random one of the three settings.
    """
    rng = np.random.default_rng(seed)
    lo, hi = elo_range
    partition = pot_intervals(lo, hi, 4)
    scale = np.exp(gap) / (hi - lo)
    round_of = {
        1: {(0, 3): 3, (1, 2): 3, (0, 2): 2, (1, 3): 2, (0, 1): 1, (2, 3): 1},
        2: {(0, 2): 3, (1, 3): 3, (0, 3): 2, (1, 2): 2, (0, 1): 1, (2, 3): 1},
        3: {(0, 1): 3, (2, 3): 3, (0, 3): 2, (1, 2): 2, (0, 2): 1, (1, 3): 1},
    }
    records = []
    for edition in editions:
        for g in range(n_groups):
            gid = "ABCDEFGHIJKL"[g]
            raw = np.round(draw_group(partition, rng), 1)
            scaled = 1.0 + (raw - lo) * scale
            setting = int(rng.integers(1, 4))
            names = [f"{edition}-{gid}{k + 1}" for k in range(4)]
            pairs = list(itertools.combinations(range(4), 2))
            idx = np.array(pairs)
            scores = sample_scores(model, scaled[idx[:, 0]], scaled[idx[:, 1]], rng)
            for (a, b), (ga, gb) in zip(pairs, scores.tolist()):
                records.append(GameRecord(edition, gid, round_of[setting][(a, b)], names[a], names[b],
                                          float(raw[a]), float(raw[b]), int(ga), int(gb)))
    records.sort(key=lambda r: (r.edition, r.group_id, r.stage_round))
    return HistoryDataset(tuple(records))


# Reports --------------------------------------------------------------------

def _pot_ranks(ds: HistoryDataset, key) -> dict[str, int]:
    elo = ds.team_elo(*key)
    order = sorted(elo, key=lambda t: -elo[t])
    return {t: k + 1 for k, t in enumerate(order)}


def group_setting(ds: HistoryDataset, key) -> int:
    """Setting of a historical group from the Elo ranks meeting in round 3."""
    ranks = _pot_ranks(ds, key)
    last = [g for g in ds.groups()[key] if g.stage_round == 3]
    meetings = {frozenset((ranks[g.team_home], ranks[g.team_away])) for g in last}
    for setting, pairs in {1: ({1, 4}, {2, 3}), 2: ({1, 3}, {2, 4}), 3: ({1, 2}, {3, 4})}.items():
        if meetings == {frozenset(p) for p in pairs}:
            return setting
    raise ValueError(f"group {key} round 3 is not a valid last round")


def _last_round_contexts(ds: HistoryDataset, key, ps: PointsSystem) -> list[GroupContext]:
    games = ds.groups()[key]
    teams = sorted(ds.team_elo(*key))
    early = [(g.team_home, g.team_away, g.goals_home, g.goals_away) for g in games if g.stage_round <= 2]
    table = compute_table(early, ps, teams=teams)
    last = [(g.team_home, g.team_away) for g in games if g.stage_round == 3]
    rule = QualRule(2)
    return [GroupContext(table, focal, last[1 - n], ps, rule) for n, focal in enumerate(last)]


def history_report(ds: HistoryDataset, kind: str, ps: PointsSystem = PointsSystem(3, 1)) -> list[dict]:
    """Tabular report rows for one of :data:`REPORT_KINDS` (except ``validation``)."""
    if kind == "edition_goals":
        totals: dict = defaultdict(lambda: [0, 0])
        for r in ds.records:
            if r.stage_round <= 2:
                totals[r.edition][0] += r.goals_home + r.goals_away
                totals[r.edition][1] += 1
        return [{"edition": ed, "games": n, "goals_per_game": goals / n}
                for ed, (goals, n) in sorted(totals.items())]
    if kind == "score_grid":
        grid = np.zeros((5, 5), dtype=int)
        for r in ds.records:
            if r.stage_round > 2:
                continue
            hi, lo = (r.goals_home, r.goals_away) if r.elo_home >= r.elo_away else (r.goals_away, r.goals_home)
            if hi <= 4 and lo <= 4:
                grid[hi, lo] += 1
        return [{"higher_elo_goals": i, **{str(j): int(grid[i, j]) for j in range(5)}} for i in range(5)]
    if kind == "settings":
        counts = Counter(group_setting(ds, key) for key in ds.groups())
        total = sum(counts.values())
        return [{"setting": s, "occurrences": counts.get(s, 0), "frequency": counts.get(s, 0) / total}
                for s in (1, 2, 3)]
    if kind == "classes":
        by_setting: dict = defaultdict(Counter)
        for key in ds.groups():
            setting = group_setting(ds, key)
            for ctx in _last_round_contexts(ds, key, ps):
                by_setting[setting][classify(ctx).verdict.value] += 1
        rows = []
        for s in (1, 2, 3):
            c = by_setting.get(s, Counter())
            n = sum(c.values())
            rows.append({"setting": s, "games": n,
                         **{v: (c[v] / n if n else 0.0) for v in ("competitive", "stakeless", "collusive")}})
        return rows
    raise ValueError(f"unknown report kind {kind!r}; expected one of {REPORT_KINDS}")


@dataclass
class ValidationReport:
    grid_mean: np.ndarray
    grid_std: np.ndarray
    gd_histogram: np.ndarray  # frequency of |goal difference| = 0, 1, ...
    draw_mean: float
    draw_std: float
    sample_draw_frequency: float
    n_games: int
    iterations: int

    def to_dict(self) -> dict:
        return {
            "n_games": self.n_games,
            "iterations": self.iterations,
            "score_grid_mean": self.grid_mean.round(6).tolist(),
            "score_grid_std": self.grid_std.round(6).tolist(),
            "draw_frequency_mean": self.draw_mean,
            "draw_frequency_std": self.draw_std,
            "sample_draw_frequency": self.sample_draw_frequency,
        }

    def histogram_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["abs_goal_difference", "frequency"])
        for k, f in enumerate(self.gd_histogram):
            w.writerow([k, f"{f:.8f}"])
        return buf.getvalue()


def model_validation(data: FitDataset, model: ScoreModel, gap: float, iterations: int, seed: int,
                     chunk: int = 1000) -> ValidationReport:
    """Re-simulate every game of ``data`` ``iterations`` times and compare."""
    home, away = data.scaled(gap)
    rng = np.random.Generator(np.random.Philox(seed))
    n = len(data)
    # orient every game so the higher-Elo team comes first
    swap = data.elo_home < data.elo_away
    hi_r = np.where(swap, away, home)
    lo_r = np.where(swap, home, away)
    grids = np.zeros((iterations, 5, 5))
    draws = np.zeros(iterations)
    hist = np.zeros(64)
    for start in range(0, iterations, chunk):
        m = min(chunk, iterations - start)
        s = sample_scores(model, np.broadcast_to(hi_r, (m, n)), np.broadcast_to(lo_r, (m, n)), rng)
        a, b = s[..., 0], s[..., 1]
        ok = (a <= 4) & (b <= 4)
        cell = np.where(ok, a * 5 + b, 25)
        for row in range(m):
            grids[start + row] = np.bincount(cell[row], minlength=26)[:25].reshape(5, 5)
        draws[start:start + m] = (a == b).mean(axis=1)
        d = np.minimum(np.abs(a - b), hist.size - 1)
        hist += np.bincount(d.ravel(), minlength=hist.size)
    last = int(np.flatnonzero(hist)[-1]) + 1
    hist = hist[:last] / hist.sum()
    sample_draws = float((data.goals_home == data.goals_away).mean())
    return ValidationReport(grids.mean(axis=0), grids.std(axis=0), hist, float(draws.mean()),
                            float(draws.std()), sample_draws, n, iterations)
