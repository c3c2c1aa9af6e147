"""Mergeable running estimates and seeded random streams for Monte-Carlo runs."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

CHUNK = 1 << 17


@dataclass(frozen=True)
class Estimate:
    """Sample mean with standard error, stored as mergeable sufficient statistics."""

    n: int
    total: float
    total_sq: float

    @classmethod
    def of(cls, samples: np.ndarray) -> Estimate:
        samples = np.asarray(samples, dtype=float)
        return cls(int(samples.size), float(samples.sum()), float(np.square(samples).sum()))

    @classmethod
    def empty(cls) -> Estimate:
        return cls(0, 0.0, 0.0)

    def merge(self, other: Estimate) -> Estimate:
        return Estimate(self.n + other.n, self.total + other.total, self.total_sq + other.total_sq)

    @property
    def mean(self) -> float:
        return self.total / self.n if self.n else math.nan

    @property
    def stderr(self) -> float:
        if self.n < 2:
            return math.nan
        var = max(self.total_sq / self.n - self.mean**2, 0.0) * self.n / (self.n - 1)
        return math.sqrt(var / self.n)


@dataclass(frozen=True)
class SimulationReport:
    """Revenue and average-buyer-payoff estimates from one seeded simulation."""

    n_samples: int
    seed: int
    revenue: Estimate
    buyer_payoff: Estimate

    @property
    def revenue_mean(self) -> float:
        return self.revenue.mean

    @property
    def revenue_stderr(self) -> float:
        return self.revenue.stderr

    @property
    def payoff_mean(self) -> float:
        return self.buyer_payoff.mean

    @property
    def payoff_stderr(self) -> float:
        return self.buyer_payoff.stderr


def generators(seed: int, n_streams: int) -> list[np.random.Generator]:
    """Independent PCG64 substreams spawned from one seed."""
    return [np.random.Generator(np.random.PCG64(s)) for s in np.random.SeedSequence(seed).spawn(n_streams)]


def chunk_sizes(n: int, chunk: int = CHUNK) -> list[int]:
    """Split n samples into fixed-size chunks so results do not depend on threading."""
    if n < 1:
        raise ValueError(f"need at least one sample, got {n}")
    full, rest = divmod(n, chunk)
    return [chunk] * full + ([rest] if rest else [])
