"""Numerical primitives shared by the detectors.

Running moments, the Hoeffding-bound cut threshold used by the block-window
detector, a two-sample Kolmogorov-Smirnov test and a reservoir sampler.
"""

from __future__ import annotations

import math
import random
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Iterable, Sequence

# Asymptotic two-sample KS critical coefficients c(alpha).
KS_COEFFICIENTS = {0.10: 1.22, 0.05: 1.36, 0.01: 1.63}


@dataclass(frozen=True)
class Moments:
    """Count, sum and sum of squares of a batch of observations."""

    count: int = 0
    sum: float = 0.0
    sum_of_squares: float = 0.0

    @classmethod
    def of(cls, values: Iterable[float]) -> "Moments":
        values = list(values)
        return cls(len(values), math.fsum(values), math.fsum(v * v for v in values))

    def __add__(self, other: "Moments") -> "Moments":
        return Moments(
            self.count + other.count,
            self.sum + other.sum,
            self.sum_of_squares + other.sum_of_squares,
        )

    @property
    def mean(self) -> float:
        if self.count == 0:
            raise ValueError("mean of empty moments")
        return self.sum / self.count

    @property
    def variance(self) -> float:
        """Population variance, clamped at zero against cancellation."""
        if self.count == 0:
            return 0.0
        mean = self.sum / self.count
        return max(self.sum_of_squares / self.count - mean * mean, 0.0)


def _epsilon(m: float, variance: float, log_term: float, c: float) -> float:
    # Shared by hoeffding_epsilon and the detector's inner loop so both
    # evaluate the identical expression.
    return c * math.sqrt(2.0 / m * variance * log_term) + 2.0 / (3.0 * m) * log_term


def hoeffding_epsilon(
    n0: int,
    n1: int,
    variance: float,
    delta: float,
    n_tests: int = 1,
    c: float = 1.0,
) -> float:
    """Cut threshold for the difference of two sub-window means.

    ``c`` scales only the variance term; the range term is left as is.

    Args:
        n0, n1: instance counts of the older and newer sub-windows.
        variance: variance of the whole window (non-negative).
        delta: confidence level in (0, 1), Bonferroni-split over ``n_tests``.
        n_tests: number of partitions tested in the current check.
        c: threshold coefficient, at least 1.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    if n0 < 1 or n1 < 1 or n_tests < 1:
        raise ValueError("n0, n1 and n_tests must be positive")
    if not (math.isfinite(variance) and math.isfinite(c)):
        raise ValueError("variance and c must be finite")
    if variance < 0:
        raise ValueError(f"variance must be non-negative, got {variance}")
    if c < 1.0:
        raise ValueError(f"c must be >= 1, got {c}")
    m = 1.0 / (1.0 / n0 + 1.0 / n1)
    log_term = math.log(2.0 * n_tests / delta)
    return _epsilon(m, variance, log_term, c)


def ks_statistic(a: Sequence[float], b: Sequence[float]) -> float:
    """Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|."""
    if len(a) == 0 or len(b) == 0:
        raise ValueError("KS statistic needs two non-empty samples")
    xa = sorted(a)
    xb = sorted(b)
    na, nb = len(xa), len(xb)
    i = j = 0
    d = 0.0
    # Walk the pooled sorted values; evaluate both ECDFs after each tie group.
    while i < na and j < nb:
        x = xa[i] if xa[i] <= xb[j] else xb[j]
        while i < na and xa[i] == x:
            i += 1
        while j < nb and xb[j] == x:
            j += 1
        gap = abs(i / na - j / nb)
        if gap > d:
            d = gap
    # One sample exhausted: the other ECDF is below 1 only until its end.
    if i < na:
        d = max(d, abs(i / na - 1.0))
    elif j < nb:
        d = max(d, abs(1.0 - j / nb))
    return d


def ecdf(sample: Sequence[float], x: float) -> float:
    ordered = sorted(sample)
    return bisect_right(ordered, x) / len(ordered)


def ks_critical_value(n: int, m: int, alpha: float = 0.05) -> float:
    if n < 1 or m < 1:
        raise ValueError("sample sizes must be positive")
    try:
        coefficient = KS_COEFFICIENTS[alpha]
    except KeyError:
        raise ValueError(
            f"unsupported alpha {alpha}; choose one of {sorted(KS_COEFFICIENTS)}"
        ) from None
    return coefficient * math.sqrt((n + m) / (n * m))


def ks_same_distribution(d: float, n: int, m: int, alpha: float = 0.05) -> bool:
    """True when the KS statistic does not reject equality (boundary inclusive)."""
    # Tolerance keeps the boundary inclusive when the caller recomputes the
    # critical value with a different operation order.
    return d <= ks_critical_value(n, m, alpha) * (1.0 + 1e-12)


@dataclass
class Reservoir:
    """Fixed-capacity uniform sample of a stream (algorithm R)."""

    capacity: int
    items: list[float] = field(default_factory=list)
    seen: int = 0

    def __post_init__(self) -> None:
        if self.capacity < 1:
            raise ValueError("reservoir capacity must be positive")
        if len(self.items) != min(self.seen, self.capacity):
            raise ValueError("items length must equal min(seen, capacity)")

    def offer(self, x: float, rng: random.Random) -> None:
        self.seen += 1
        if self.seen <= self.capacity:
            self.items.append(x)
            return
        slot = rng.randrange(self.seen)
        if slot < self.capacity:
            self.items[slot] = x

    def extend(self, values: Iterable[float], rng: random.Random) -> None:
        for x in values:
            self.offer(x, rng)

    def clear(self) -> None:
        self.items.clear()
        self.seen = 0

    def mean(self) -> float:
        if not self.items:
            raise ValueError("mean of empty reservoir")
        return math.fsum(self.items) / len(self.items)

    def __len__(self) -> int:
        return len(self.items)


def reservoir_offer(r: Reservoir, x: float, rng: random.Random) -> Reservoir:
    r.offer(x, rng)
    return r
