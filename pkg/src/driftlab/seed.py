"""Block-window drift detector.

Observations are grouped into fixed-size blocks. Each time a block seals,
every split of the block list into an older and a newer sub-window is
tested; when the sub-window means differ by more than the Hoeffding cut
threshold a drift is signaled and the older side is dropped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import accumulate
from typing import Iterable, Iterator, Optional

from .stats import Moments, _epsilon


class EmptyWindowError(ValueError):
    pass


@dataclass
class SeedConfig:
    block_size: int = 32
    delta: float = 0.05
    coefficient_c: float = 1.0
    max_blocks: int = 512

    def __post_init__(self) -> None:
        if self.block_size < 1:
            raise ValueError("block_size must be >= 1")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if not self.coefficient_c >= 1.0:
            raise ValueError("coefficient_c must be >= 1")
        if self.max_blocks < 2:
            raise ValueError("max_blocks must be >= 2")


@dataclass(frozen=True)
class DriftEvent:
    """A drift signal.

    ``index`` counts the observations consumed when the signal fired, so a
    drift first visible at 0-based position ``d`` and signaled ``k`` values
    later carries ``index == d + k``.
    """

    index: int
    post_drift_mean: float
    interval: Optional[int] = None


class SeedDetector:
    def __init__(self, config: SeedConfig | None = None, **kwargs) -> None:
        self.config = config if config is not None else SeedConfig(**kwargs)
        self._c = self.config.coefficient_c
        self._sums: list[float] = []
        self._squares: list[float] = []
        self._open: list[float] = []
        self.n_seen = 0
        self.last_drift: Optional[int] = None

    @property
    def coefficient(self) -> float:
        return self._c

    def set_coefficient(self, c: float) -> None:
        if not (math.isfinite(c) and c >= 1.0):
            raise ValueError(f"threshold coefficient must be >= 1, got {c}")
        self._c = c

    @property
    def blocks(self) -> list[Moments]:
        size = self.config.block_size
        return [Moments(size, s, q) for s, q in zip(self._sums, self._squares)]

    @property
    def window_size(self) -> int:
        return len(self._sums) * self.config.block_size + len(self._open)

    def current_window_mean(self) -> float:
        n = self.window_size
        if n == 0:
            raise EmptyWindowError("detector window is empty")
        return (math.fsum(self._sums) + math.fsum(self._open)) / n

    def observe(self, x: float) -> Optional[DriftEvent]:
        x = float(x)
        if not math.isfinite(x):
            raise ValueError(f"non-finite observation {x!r}")
        self.n_seen += 1
        self._open.append(x)
        if len(self._open) < self.config.block_size:
            return None
        block, self._open = self._open, []
        return self._seal(block)

    def feed(self, values: Iterable[float]) -> Iterator[DriftEvent]:
        """Consume many values, yielding drift events as they occur.

        Equivalent to calling :meth:`observe` on each value, but handles
        whole blocks at once. The generator may be paused at any yielded
        event (e.g. to change the coefficient) before consuming more.
        """
        size = self.config.block_size
        if hasattr(values, "tolist"):
            data = values.tolist()
        else:
            data = [float(v) for v in values]
        if not all(map(math.isfinite, data)):
            raise ValueError("non-finite observation in input")
        pos = 0
        n = len(data)
        while pos < n:
            take = min(size - len(self._open), n - pos)
            self._open.extend(data[pos : pos + take])
            pos += take
            self.n_seen += take
            if len(self._open) == size:
                block, self._open = self._open, []
                event = self._seal(block)
                if event is not None:
                    yield event

    def run(self, values: Iterable[float]) -> list[DriftEvent]:
        return list(self.feed(values))

    def _seal(self, block: list[float]) -> Optional[DriftEvent]:
        self._sums.append(math.fsum(block))
        self._squares.append(math.fsum(x * x for x in block))
        if len(self._sums) > self.config.max_blocks:
            del self._sums[0], self._squares[0]
        cut = self._widest_violation()
        if cut is None:
            return None
        del self._sums[:cut], self._squares[:cut]
        newer = len(self._sums) * self.config.block_size
        event = DriftEvent(
            index=self.n_seen,
            post_drift_mean=math.fsum(self._sums) / newer,
            interval=None if self.last_drift is None else self.n_seen - self.last_drift,
        )
        self.last_drift = self.n_seen
        return event

    def _widest_violation(self) -> Optional[int]:
        """Number of older blocks in the widest violating split, if any."""
        k = len(self._sums)
        if k < 2:
            return None
        size = self.config.block_size
        prefix = list(accumulate(self._sums))
        total = prefix[-1]
        n = k * size
        mean = total / n
        variance = max(math.fsum(self._squares) / n - mean * mean, 0.0)
        log_term = math.log(2.0 * (k - 1) / self.config.delta)
        c = self._c
        for i in range(k - 1, 0, -1):
            n0 = i * size
            n1 = n - n0
            gap = abs(prefix[i - 1] / n0 - (total - prefix[i - 1]) / n1)
            m = 1.0 / (1.0 / n0 + 1.0 / n1)
            if gap > _epsilon(m, variance, log_term, c):
                return i
        return None
