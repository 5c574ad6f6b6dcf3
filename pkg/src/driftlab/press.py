"""PRESS: the block-window detector with a severity-driven threshold.

In the training phase drifts feed the volatility detector and the severity
buffer, and every volatility shift updates the pattern network. In the
predicting phase each volatility shift looks up the current pattern, turns
the network's expected severity ``phi`` into ``c = 1 + beta * phi`` and hands
``c`` to the detector, so expected-severe regimes are watched less keenly.
"""

from __future__ import annotations

import enum
import json
import random
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator, Optional, Union

from .network import PatternNetwork
from .seed import DriftEvent, SeedConfig, SeedDetector
from .severity import SnapshotState, severity_on_drift
from .volatility import VolatilityDetector


class Phase(str, enum.Enum):
    TRAINING = "training"
    PREDICTING = "predicting"


class EventKind(str, enum.Enum):
    DRIFT = "drift"
    VOLATILITY_SHIFT = "volatility_shift"
    COEFFICIENT_UPDATE = "coefficient_update"


@dataclass
class PressConfig:
    seed: SeedConfig = field(default_factory=SeedConfig)
    beta: float = 0.4
    phase: Phase = Phase.TRAINING
    continue_learning: bool = False
    ks_alpha: float = 0.05
    theta: float = 0.5
    volatility_buffer: int = 32
    reference_capacity: int = 100
    pattern_capacity: int = 100
    reservoir_capacity: int = 100
    random_seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must lie in [0, 1], got {self.beta}")
        self.phase = Phase(self.phase)


@dataclass(frozen=True)
class PressEvent:
    kind: EventKind
    index: int
    payload: Union[int, float, None]

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "index": self.index, "payload": self.payload}


class PressDetector:
    def __init__(self, config: PressConfig | None = None, **kwargs) -> None:
        self.config = config if config is not None else PressConfig(**kwargs)
        cfg = self.config
        self.seed = SeedDetector(SeedConfig(
            block_size=cfg.seed.block_size,
            delta=cfg.seed.delta,
            coefficient_c=1.0,
            max_blocks=cfg.seed.max_blocks,
        ))
        self.severity = SnapshotState()
        self.volatility = VolatilityDetector(
            buffer_size=cfg.volatility_buffer,
            reference_capacity=cfg.reference_capacity,
            theta=cfg.theta,
            rng=random.Random(2 * cfg.random_seed + 1),
        )
        self.network = PatternNetwork(
            ks_alpha=cfg.ks_alpha,
            pattern_capacity=cfg.pattern_capacity,
            reservoir_capacity=cfg.reservoir_capacity,
            rng=random.Random(2 * cfg.random_seed),
        )
        self.phase = cfg.phase

    @property
    def coefficient(self) -> float:
        return self.seed.coefficient

    @property
    def learning(self) -> bool:
        return self.phase is Phase.TRAINING or self.config.continue_learning

    def switch_phase(self, phase: Phase | str) -> None:
        """Change phase. The coefficient restarts at 1 either way."""
        self.phase = Phase(phase)
        self.seed.set_coefficient(1.0)

    def observe(self, x: float) -> list[PressEvent]:
        drift = self.seed.observe(x)
        if drift is None:
            return []
        return self._on_drift(drift)

    def feed(self, values: Iterable[float]) -> Iterator[PressEvent]:
        for drift in self.seed.feed(values):
            yield from self._on_drift(drift)

    def run(self, values: Iterable[float]) -> list[PressEvent]:
        return list(self.feed(values))

    def _on_drift(self, drift: DriftEvent) -> list[PressEvent]:
        events = [PressEvent(EventKind.DRIFT, drift.index, drift.interval)]
        raw = severity_on_drift(self.severity, drift.post_drift_mean)
        if raw is not None and self.learning:
            self.network.record_severity(raw)
        if drift.interval is None:
            return events
        shift = self.volatility.observe(drift.interval)
        if shift is None:
            return events
        if self.learning:
            node: Optional[int] = self.network.on_volatility_shift(shift.recent_pattern)
        else:
            node = self.network.match_pattern(shift.recent_pattern)
        events.append(PressEvent(EventKind.VOLATILITY_SHIFT, drift.index, node))
        if self.phase is Phase.PREDICTING:
            phi = 0.0
            if node is not None:
                phi = self.network.predicted_severity(node, self.severity.running_max)
            c = 1.0 + self.config.beta * phi
            self.seed.set_coefficient(c)
            events.append(PressEvent(EventKind.COEFFICIENT_UPDATE, drift.index, c))
        return events

    def export_network(self) -> dict:
        return self.network.to_dict(self.severity.running_max)

    def import_network(self, doc: dict) -> None:
        net, running_max = PatternNetwork.from_dict(doc, self.network.rng)
        self.network = net
        self.severity.running_max = max(self.severity.running_max, running_max)


def drift_indices(events: Iterable[PressEvent]) -> list[int]:
    return [e.index for e in events if e.kind is EventKind.DRIFT]


def write_events(events: Iterable[PressEvent], fp: IO[str]) -> None:
    for event in events:
        fp.write(json.dumps(event.to_dict()) + "\n")


def drift_event_dict(event: DriftEvent) -> dict:
    return PressEvent(EventKind.DRIFT, event.index, event.interval).to_dict()
