"""Volatility-change detection over the stream of drift intervals."""

from __future__ import annotations

import math
import random
from collections import deque
from dataclasses import dataclass
from typing import Optional

from .stats import Reservoir


@dataclass(frozen=True)
class VolatilityShift:
    at_drift_count: int
    recent_pattern: tuple[float, ...]


class VolatilityDetector:
    """Relative mean-shift test between recent intervals and older ones.

    Intervals enter a sliding buffer of ``buffer_size`` values; values pushed
    out of it feed a reservoir of older intervals. Once both hold at least
    ``buffer_size`` intervals, a shift is signaled when the relative
    difference of their means exceeds ``theta``. After a shift the reference
    is reseeded from the recent buffer and the recent buffer starts empty.
    """

    def __init__(
        self,
        buffer_size: int = 32,
        reference_capacity: int = 100,
        theta: float = 0.5,
        rng: random.Random | None = None,
    ) -> None:
        if buffer_size < 1:
            raise ValueError("buffer_size must be >= 1")
        if reference_capacity < buffer_size:
            raise ValueError("reference_capacity must be >= buffer_size")
        if not theta > 0:
            raise ValueError("theta must be positive")
        self.buffer_size = buffer_size
        self.theta = theta
        self.recent: deque[float] = deque()
        self.reference = Reservoir(reference_capacity)
        self.rng = rng if rng is not None else random.Random(0)
        self.drift_count = 0

    def observe(self, interval: float) -> Optional[VolatilityShift]:
        if not (math.isfinite(interval) and interval > 0):
            raise ValueError(f"interval must be positive, got {interval!r}")
        self.drift_count += 1
        self.recent.append(float(interval))
        if len(self.recent) > self.buffer_size:
            self.reference.offer(self.recent.popleft(), self.rng)
        if len(self.recent) < self.buffer_size or len(self.reference) < self.buffer_size:
            return None
        ref_mean = self.reference.mean()
        recent_mean = math.fsum(self.recent) / len(self.recent)
        if abs(recent_mean - ref_mean) / ref_mean <= self.theta:
            return None
        shift = VolatilityShift(self.drift_count, tuple(self.recent))
        self.reference.clear()
        self.reference.extend(self.recent, self.rng)
        self.recent.clear()
        return shift

    def recent_pattern(self) -> list[float]:
        if not self.recent:
            raise ValueError("recent interval buffer is empty")
        return list(self.recent)
