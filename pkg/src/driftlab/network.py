"""Probability network of volatility patterns.

Nodes are bounded samples of drift intervals, each standing for one
recurring volatility regime. Edges count observed transitions between
regimes and hold a reservoir of the severities seen around each transition.
"""

from __future__ import annotations

import json
import math
import random
from collections import deque
from dataclasses import dataclass, field
from typing import IO, Iterable, Optional, Sequence

from .severity import normalize_severity
from .stats import Reservoir, ks_same_distribution, ks_statistic

PATTERN_CAPACITY = 100
RESERVOIR_CAPACITY = 100


class UnknownPatternError(KeyError):
    pass


@dataclass
class VolatilityPattern:
    id: int
    intervals: deque = field(default_factory=lambda: deque(maxlen=PATTERN_CAPACITY))

    @classmethod
    def from_sample(cls, id: int, sample: Iterable[float], capacity: int = PATTERN_CAPACITY):
        intervals = deque(maxlen=capacity)
        for x in sample:
            if not x > 0:
                raise ValueError(f"pattern intervals must be positive, got {x!r}")
            intervals.append(float(x))
        return cls(id, intervals)

    def absorb(self, sample: Iterable[float]) -> None:
        # deque(maxlen) evicts oldest-first
        self.intervals.extend(float(x) for x in sample)


class PatternNetwork:
    def __init__(
        self,
        ks_alpha: float = 0.05,
        pattern_capacity: int = PATTERN_CAPACITY,
        reservoir_capacity: int = RESERVOIR_CAPACITY,
        rng: random.Random | None = None,
    ) -> None:
        self.ks_alpha = ks_alpha
        self.pattern_capacity = pattern_capacity
        self.reservoir_capacity = reservoir_capacity
        self.rng = rng if rng is not None else random.Random(0)
        self.nodes: dict[int, VolatilityPattern] = {}
        self.transition_counts: dict[tuple[int, int], int] = {}
        self.severity_reservoirs: dict[tuple[int, int], Reservoir] = {}
        self.current: Optional[int] = None
        self.previous: Optional[int] = None
        self.severity_buffer: list[float] = []
        self._next_id = 0

    def __len__(self) -> int:
        return len(self.nodes)

    def _require(self, node: int) -> None:
        if node not in self.nodes:
            raise UnknownPatternError(node)

    def match_pattern(self, recent: Sequence[float]) -> Optional[int]:
        """Closest stored pattern not rejected by the KS test, oldest on ties."""
        if len(recent) == 0:
            raise ValueError("recent pattern is empty")
        best: Optional[int] = None
        best_d = math.inf
        for node_id in sorted(self.nodes):
            intervals = self.nodes[node_id].intervals
            d = ks_statistic(recent, intervals)
            if not ks_same_distribution(d, len(recent), len(intervals), self.ks_alpha):
                continue
            if d < best_d:
                best, best_d = node_id, d
        return best

    def add_pattern(self, sample: Sequence[float]) -> int:
        node_id = self._next_id
        self._next_id += 1
        self.nodes[node_id] = VolatilityPattern.from_sample(
            node_id, sample, self.pattern_capacity
        )
        return node_id

    def on_volatility_shift(self, recent: Sequence[float]) -> int:
        if len(recent) == 0:
            raise ValueError("recent pattern is empty")
        matched = self.match_pattern(recent)
        if matched is None:
            node = self.add_pattern(recent)
        else:
            node = matched
            self.nodes[node].absorb(recent)
        if self.current is not None:
            edge = (self.current, node)
            self.transition_counts[edge] = self.transition_counts.get(edge, 0) + 1
            reservoir = self.severity_reservoirs.get(edge)
            if reservoir is None:
                reservoir = self.severity_reservoirs[edge] = Reservoir(self.reservoir_capacity)
            reservoir.extend(self.severity_buffer, self.rng)
        self.severity_buffer.clear()
        self.previous, self.current = self.current, node
        return node

    def record_severity(self, raw: float) -> None:
        if not raw >= 0:
            raise ValueError(f"severity must be non-negative, got {raw!r}")
        self.severity_buffer.append(float(raw))

    def successors(self, node: int) -> dict[int, int]:
        self._require(node)
        return {to: n for (frm, to), n in self.transition_counts.items() if frm == node}

    def transition_prob(self, frm: int, to: int) -> float:
        out = self.successors(frm)
        total = sum(out.values())
        if total == 0:
            return 0.0
        return out.get(to, 0) / total

    def predicted_severity(self, node: int, running_max: float) -> float:
        """Transition-weighted mean of normalized severities over successors."""
        out = self.successors(node)
        total = sum(out.values())
        if total == 0:
            return 0.0
        phi = 0.0
        for to, count in sorted(out.items()):
            reservoir = self.severity_reservoirs.get((node, to))
            if reservoir is None or len(reservoir) == 0:
                continue
            normalized = [normalize_severity(s, running_max) for s in reservoir.items]
            phi += count / total * (math.fsum(normalized) / len(normalized))
        return min(max(phi, 0.0), 1.0)

    # serialization

    def to_dict(self, running_max: float = 0.0) -> dict:
        return {
            "ks_alpha": self.ks_alpha,
            "pattern_capacity": self.pattern_capacity,
            "reservoir_capacity": self.reservoir_capacity,
            "next_id": self._next_id,
            "current": self.current,
            "previous": self.previous,
            "running_max": running_max,
            "severity_buffer": list(self.severity_buffer),
            "nodes": [
                {"id": p.id, "intervals": list(p.intervals)}
                for p in sorted(self.nodes.values(), key=lambda p: p.id)
            ],
            "edges": [
                {
                    "from": frm,
                    "to": to,
                    "count": count,
                    "reservoir": self._reservoir_dict((frm, to)),
                }
                for (frm, to), count in sorted(self.transition_counts.items())
            ],
        }

    def _reservoir_dict(self, edge: tuple[int, int]) -> dict:
        r = self.severity_reservoirs.get(edge)
        if r is None:
            return {"seen": 0, "items": []}
        return {"seen": r.seen, "items": list(r.items)}

    @classmethod
    def from_dict(cls, doc: dict, rng: random.Random | None = None) -> tuple["PatternNetwork", float]:
        net = cls(
            ks_alpha=doc["ks_alpha"],
            pattern_capacity=doc["pattern_capacity"],
            reservoir_capacity=doc["reservoir_capacity"],
            rng=rng,
        )
        for node in doc["nodes"]:
            net.nodes[node["id"]] = VolatilityPattern.from_sample(
                node["id"], node["intervals"], net.pattern_capacity
            )
        for edge in doc["edges"]:
            key = (edge["from"], edge["to"])
            net.transition_counts[key] = edge["count"]
            res = edge["reservoir"]
            net.severity_reservoirs[key] = Reservoir(
                net.reservoir_capacity, list(res["items"]), res["seen"]
            )
        net._next_id = doc["next_id"]
        net.current = doc["current"]
        net.previous = doc["previous"]
        net.severity_buffer = list(doc["severity_buffer"])
        return net, float(doc["running_max"])


def dump_network(net: PatternNetwork, fp: IO[str], running_max: float = 0.0) -> None:
    json.dump(net.to_dict(running_max), fp, indent=1)
    fp.write("\n")


def load_network(fp: IO[str], rng: random.Random | None = None) -> tuple[PatternNetwork, float]:
    return PatternNetwork.from_dict(json.load(fp), rng)
