"""Seeded Monte Carlo experiments over formats, settings and points systems."""

from __future__ import annotations

import logging
import math
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .classification import Verdict, classify
from .formats import FormatKind, FormatSpec, SettingChoice, simulate_context
from .score_models import ScoreModel, model_to_dict
from .standings import PointsSystem

log = logging.getLogger(__name__)

VERDICTS = (Verdict.COMPETITIVE, Verdict.COLLUSIVE, Verdict.STAKELESS)
# worst-first, used to label a whole group with one verdict
_SEVERITY = {Verdict.COLLUSIVE: 2, Verdict.STAKELESS: 1, Verdict.COMPETITIVE: 0}
UNITS = ("game", "group")


def substream(master_seed: int, iteration: int) -> np.random.Generator:
    """Independent generator for one iteration.

    Philox is counter based and SeedSequence hashes (seed, iteration), so a
    stream depends only on those two numbers, never on which worker or in
    which order iterations run.
    """
    ss = np.random.SeedSequence(entropy=master_seed & (2**64 - 1), spawn_key=(iteration,))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class ExperimentConfig:
    format: FormatSpec
    choice: SettingChoice
    model: ScoreModel
    gap: float
    ps: PointsSystem
    iterations: int
    master_seed: int
    unit: str = "game"

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.unit not in UNITS:
            raise ValueError(f"unit must be one of {UNITS}")
        self.choice.check(self.format)

    def to_dict(self) -> dict:
        return {
            "format": self.format.kind.value,
            "setting": self.choice.setting,
            "passive_pot": self.choice.passive_pot,
            "points": [self.ps.win_pts, self.ps.draw_pts],
            "model": model_to_dict(self.model, self.gap),
            "iterations": self.iterations,
            "seed": self.master_seed,
            "unit": self.unit,
        }


@dataclass
class FrequencyReport:
    config: ExperimentConfig
    counts: dict[Verdict, int]
    elapsed: float = field(default=0.0, compare=False)

    @property
    def n_games(self) -> int:
        return sum(self.counts.values())

    def frequency(self, verdict: Verdict) -> float:
        return self.counts.get(verdict, 0) / self.n_games

    @property
    def frequencies(self) -> dict[Verdict, float]:
        return {v: self.frequency(v) for v in VERDICTS}

    @property
    def stderr(self) -> dict[Verdict, float]:
        n = self.n_games
        return {v: math.sqrt(f * (1 - f) / n) for v, f in self.frequencies.items()}

    def to_dict(self) -> dict:
        # no wall-clock fields: reports must be byte-identical across runs
        return {
            "config": self.config.to_dict(),
            "n_games": self.n_games,
            "counts": {v.value: self.counts.get(v, 0) for v in VERDICTS},
            "frequencies": {v.value: f for v, f in self.frequencies.items()},
            "stderr": {v.value: s for v, s in self.stderr.items()},
        }


class ExperimentError(RuntimeError):
    pass


def _run_chunk(config: ExperimentConfig, start: int, stop: int) -> Counter:
    counts: Counter = Counter()
    for it in range(start, stop):
        rng = substream(config.master_seed, it)
        try:
            verdicts = [classify(ctx).verdict for ctx in
                        simulate_context(config.format, config.choice, config.model, config.ps, config.gap, rng)]
        except Exception as exc:
            raise ExperimentError(f"iteration {it}: {exc}") from exc
        if config.unit == "group":
            counts[max(verdicts, key=_SEVERITY.__getitem__)] += 1
        else:
            counts.update(verdicts)
    return counts


def _chunks(n: int, parts: int) -> list[tuple[int, int]]:
    size = math.ceil(n / parts)
    return [(s, min(s + size, n)) for s in range(0, n, size)]


def run(config: ExperimentConfig, workers: int = 1) -> FrequencyReport:
    """Simulate ``config.iterations`` groups and count last-round verdicts."""
    t0 = time.perf_counter()
    if workers <= 1:
        counts = _run_chunk(config, 0, config.iterations)
    else:
        counts = Counter()
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = _chunks(config.iterations, workers * 4)
            for part in pool.map(_run_chunk, [config] * len(parts), *zip(*parts)):
                counts.update(part)
    counts = {v: counts.get(v, 0) for v in VERDICTS}
    elapsed = time.perf_counter() - t0
    log.debug("%s setting %s: %d games in %.1fs", config.format.kind.value, config.choice.setting,
              sum(counts.values()), elapsed)
    return FrequencyReport(config, counts, elapsed)


def sweep(configs, workers: int = 1) -> list[FrequencyReport]:
    """Run every config; output order follows input order."""
    configs = list(configs)
    if not configs:
        raise ValueError("empty sweep")
    reports, failures = [], []
    for i, cfg in enumerate(configs):
        try:
            reports.append(run(cfg, workers))
        except ExperimentError as exc:
            failures.append(f"config {i}: {exc}")
    if failures:
        raise ExperimentError("; ".join(failures))
    return reports


# Paper-table layouts --------------------------------------------------------

TABLES = ("table5", "groups3", "groups5", "uefa", "groups5best3")


def table_configs(name: str, model: ScoreModel, gap: float, iterations: int, seed: int,
                  unit: str = "game") -> list[ExperimentConfig]:
    """Configs for one published results table, in row-major table order."""

    def cfg(kind, setting, passive=None, ps=PointsSystem(3, 1)):
        fmt = FormatSpec(kind)
        return ExperimentConfig(fmt, SettingChoice.for_format(fmt, setting, passive), model, gap, ps,
                                iterations, seed, unit)

    if name == "table5":
        systems = (PointsSystem(2, 1), PointsSystem(3, 1), PointsSystem(3, 2))
        return [cfg(FormatKind.G4_TOP2, s, ps=ps) for ps in systems for s in (1, 2, 3)]
    if name == "groups3":
        return [cfg(FormatKind.G3_TOP2, s) for s in (1, 2, 3)]
    if name == "uefa":
        return [cfg(FormatKind.G4_BEST3RDS, s) for s in (1, 2, 3)]
    if name == "groups5":
        return [cfg(FormatKind.G5_TOP2, s, p) for p in range(1, 6) for s in (1, 2, 3)]
    if name == "groups5best3":
        return [cfg(FormatKind.G5_BEST3RDS, s, p) for p in range(1, 6) for s in (1, 2, 3)]
    raise ValueError(f"unknown table {name!r}; expected one of {TABLES}")
