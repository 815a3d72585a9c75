"""Point estimates with standard errors: batch means for dependent sequences
and mergeable running moments for i.i.d. Monte-Carlo sampling."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

N_BATCHES = 100


@dataclass(frozen=True)
class Estimate:
    value: float
    std_error: float
    n: int

    def __float__(self) -> float:
        return float(self.value)


def batch_means_se(num: np.ndarray, den: np.ndarray | None = None, n_batches: int = N_BATCHES) -> float:
    """Standard error of ``sum(num)/sum(den)`` (or of ``mean(num)``) from
    contiguous batch ratios.

    Neighbouring rewards share a service time, so the i.i.d. formula would
    understate the error; contiguous batches absorb that short-range
    dependence.
    """
    num = np.asarray(num, dtype=float)
    n = len(num)
    b = min(n_batches, n)
    if b < 2:
        return math.nan
    edges = np.linspace(0, n, b + 1).astype(int)
    num_b = np.add.reduceat(num, edges[:-1])
    if den is None:
        ratios = num_b / np.diff(edges)
    else:
        ratios = num_b / np.add.reduceat(np.asarray(den, dtype=float), edges[:-1])
    return float(np.std(ratios, ddof=1) / math.sqrt(b))


class RunningMoments:
    """Streaming mean/variance; batches can be merged in any grouping."""

    def __init__(self):
        self.count = 0
        self.mean = 0.0
        self._m2 = 0.0

    def update(self, values: np.ndarray) -> "RunningMoments":
        values = np.asarray(values, dtype=float)
        other = RunningMoments()
        other.count = values.size
        if other.count:
            other.mean = float(values.mean())
            other._m2 = float(((values - other.mean) ** 2).sum())
        return self.merge(other)

    def merge(self, other: "RunningMoments") -> "RunningMoments":
        n = self.count + other.count
        if n == 0:
            return self
        delta = other.mean - self.mean
        self.mean += delta * other.count / n
        self._m2 += other._m2 + delta * delta * self.count * other.count / n
        self.count = n
        return self

    @property
    def variance(self) -> float:
        return self._m2 / (self.count - 1) if self.count > 1 else math.nan

    @property
    def std_error(self) -> float:
        return math.sqrt(self.variance / self.count) if self.count > 1 else math.nan
