"""Drift severity measured without a warning period.

At every drift the mean of the newer sub-window is compared with the same
mean stored at the previous drift; the absolute difference is the severity
of the current drift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional


@dataclass
class SnapshotState:
    snapshot: Optional[float] = None
    running_max: float = 0.0

    def on_drift(self, w2_mean: float) -> Optional[float]:
        return severity_on_drift(self, w2_mean)

    def normalize(self, raw: float) -> float:
        return normalize_severity(raw, self.running_max)


def severity_on_drift(state: SnapshotState, w2_mean: float) -> Optional[float]:
    """Record a drift's post-drift mean; return its raw severity.

    The first drift only stores the snapshot and returns None.
    """
    if not math.isfinite(w2_mean):
        raise ValueError(f"non-finite post-drift mean {w2_mean!r}")
    previous = state.snapshot
    state.snapshot = w2_mean
    if previous is None:
        return None
    raw = abs(w2_mean - previous)
    if raw > state.running_max:
        state.running_max = raw
    return raw


def normalize_severity(raw: float, running_max: float) -> float:
    if raw < 0:
        raise ValueError("severity must be non-negative")
    if running_max <= 0:
        return 0.0
    return min(raw / running_max, 1.0)
