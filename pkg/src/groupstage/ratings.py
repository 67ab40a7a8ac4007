"""Elo rescaling and pot-based random group generation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def rescale(raw: float, min_raw: float, max_raw: float, gap: float) -> float:
    """Map a raw Elo rating onto ``[1, 1 + e**gap]``.

    The weakest rating of the pool maps to 1 and the strongest to
    ``1 + e**gap``, so ``gap`` controls how strongly the rating spread
    feeds into the score models.
    """
    if not max_raw > min_raw:
        raise ValueError("zero rating spread")
    if raw < min_raw or raw > max_raw:
        raise ValueError(f"rating out of pool range: {raw} not in [{min_raw}, {max_raw}]")
    return 1.0 + math.exp(gap) * (raw - min_raw) / (max_raw - min_raw)


def rescale_array(raw, min_raw: float, max_raw: float, gap: float) -> np.ndarray:
    """Vectorised :func:`rescale` (same errors)."""
    raw = np.asarray(raw, dtype=float)
    if not max_raw > min_raw:
        raise ValueError("zero rating spread")
    if raw.size and (raw.min() < min_raw or raw.max() > max_raw):
        raise ValueError("rating out of pool range")
    return 1.0 + math.exp(gap) * (raw - min_raw) / (max_raw - min_raw)


def pool_bounds(gap: float) -> tuple[float, float]:
    """Simulation pool ``[a, b]`` on the rescaled scale for a calibrated gap."""
    return 1.0, 1.0 + math.exp(gap)


@dataclass(frozen=True)
class PotPartition:
    a: float
    b: float
    n_pots: int

    @property
    def width(self) -> float:
        return (self.b - self.a) / self.n_pots

    @property
    def intervals(self) -> tuple[tuple[float, float], ...]:
        # pot 1 is the top interval
        n, a, b = self.n_pots, self.a, self.b
        out = []
        for k in range(1, n + 1):
            hi = b if k == 1 else b - (k - 1) * (b - a) / n
            lo = a if k == n else b - k * (b - a) / n
            out.append((lo, hi))
        return tuple(out)

    def pot(self, k: int) -> tuple[float, float]:
        return self.intervals[k - 1]


def pot_intervals(a: float, b: float, n_pots: int) -> PotPartition:
    if n_pots < 2:
        raise ValueError("need at least two pots")
    if not a < b:
        raise ValueError(f"empty rating range [{a}, {b}]")
    return PotPartition(float(a), float(b), int(n_pots))


def draw_group(partition: PotPartition, rng: np.random.Generator) -> np.ndarray:
    """One rating per pot, strongest pot first.

    Each value is uniform on its pot interval, closed at the top: a draw
    landing on a shared endpoint belongs to the higher pot.
    """
    bounds = np.array(partition.intervals)
    u = rng.random(partition.n_pots)
    return bounds[:, 1] - (bounds[:, 1] - bounds[:, 0]) * u
