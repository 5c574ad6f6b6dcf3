"""Synthetic indicator streams with recurrent volatility and severity.

Each value is ``mu + noise_sd * N(0, 1)``. The stream is a sequence of
concepts; concept lengths are drawn around the active volatility pattern's
mean interval and every concept boundary steps ``mu`` by a magnitude fixed
by the (previous pattern, current pattern) transition.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import IO, Optional, Sequence

import numpy as np

BENCHMARK_INSTANCES = 1_000_000
BENCHMARK_DRIFTS = 50_000
PRESET_NAMES = ("abrupt3", "abrupt5", "abrupt10", "gradual3", "gradual5", "gradual10")

# Fixed per-preset seeds for the transition matrix and severity magnitudes.
_PRESET_STRUCTURE_SEEDS = {name: 7919 * (i + 1) for i, name in enumerate(PRESET_NAMES)}


class DriftKind(str, enum.Enum):
    ABRUPT = "abrupt"
    GRADUAL = "gradual"


class SpecError(ValueError):
    def __init__(self, problems: Sequence[str]) -> None:
        self.problems = list(problems)
        super().__init__("invalid generator spec: " + "; ".join(self.problems))


@dataclass
class GeneratorSpec:
    pattern_interval_means: list[float]
    pattern_transition_matrix: list[list[float]]
    severity_map: dict[tuple[int, int], float]
    total_instances: int
    seed: int = 0
    drift_kind: DriftKind = DriftKind.ABRUPT
    ramp_length: int = 300
    interval_jitter: float = 0.1
    noise_sd: float = 1.0
    pattern_length: int = 20
    initial_pattern: int = 0
    initial_mu: float = 0.0

    @property
    def num_patterns(self) -> int:
        return len(self.pattern_interval_means)

    def problems(self) -> list[str]:
        out = []
        n = self.num_patterns
        if n < 2:
            out.append("at least 2 patterns are required")
        if any(not (m > 0 and math.isfinite(m)) for m in self.pattern_interval_means):
            out.append("pattern interval means must be positive")
        matrix = np.asarray(self.pattern_transition_matrix, dtype=float)
        if matrix.shape != (n, n):
            out.append(f"transition matrix must be {n}x{n}, got shape {matrix.shape}")
        else:
            if (matrix < 0).any():
                out.append("transition probabilities must be non-negative")
            for i, row in enumerate(matrix):
                if abs(math.fsum(row) - 1.0) > 1e-12:
                    out.append(f"transition row {i} sums to {math.fsum(row)!r}, not 1")
            missing = [
                (i, j) for i in range(n) for j in range(n)
                if matrix[i, j] > 0 and (i, j) not in self.severity_map
            ]
            if missing:
                out.append(f"severity_map lacks transitions {missing}")
        if any(not (v > 0 and math.isfinite(v)) for v in self.severity_map.values()):
            out.append("severity magnitudes must be positive")
        try:
            kind = DriftKind(self.drift_kind)
        except ValueError:
            out.append(f"unknown drift kind {self.drift_kind!r}")
            kind = None
        if self.ramp_length < 1:
            out.append("ramp_length must be >= 1")
        if not 0 <= self.interval_jitter < 1:
            out.append("interval_jitter must lie in [0, 1)")
        if not self.noise_sd >= 0:
            out.append("noise_sd must be non-negative")
        if self.total_instances < 1:
            out.append("total_instances must be positive")
        if self.pattern_length < 1:
            out.append("pattern_length must be >= 1")
        if not 0 <= self.initial_pattern < max(n, 1):
            out.append("initial_pattern out of range")
        if kind is DriftKind.GRADUAL and self.pattern_interval_means:
            shortest = min(self.pattern_interval_means) * (1 - self.interval_jitter)
            if shortest < self.ramp_length:
                out.append(
                    f"shortest concept ({shortest:.1f}) is shorter than ramp_length "
                    f"({self.ramp_length})"
                )
        return out

    def validate(self) -> None:
        problems = self.problems()
        if problems:
            raise SpecError(problems)


@dataclass
class GroundTruth:
    drift_positions: list[int] = field(default_factory=list)
    drift_magnitudes: list[float] = field(default_factory=list)
    pattern_change_positions: list[int] = field(default_factory=list)
    # pattern active in the concept each drift opens
    drift_patterns: list[int] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.drift_positions)

    def restricted(self, start: int, end: int) -> "GroundTruth":
        keep = [k for k, d in enumerate(self.drift_positions) if start <= d < end]
        return GroundTruth(
            [self.drift_positions[k] for k in keep],
            [self.drift_magnitudes[k] for k in keep],
            [p for p in self.pattern_change_positions if start <= p < end],
            [self.drift_patterns[k] for k in keep] if self.drift_patterns else [],
        )


def render_schedule(
    segments: Sequence[tuple[int, float]],
    drift_kind: DriftKind | str = DriftKind.ABRUPT,
    ramp_length: int = 300,
    noise_sd: float = 1.0,
    rng: Optional[np.random.Generator] = None,
) -> tuple[np.ndarray, GroundTruth]:
    """Turn ``(length, mu)`` concept segments into a value stream.

    Gradual drifts move ``mu`` linearly over the first ``ramp_length`` values
    of the new concept, reaching the new level on the last ramp value; the
    ground-truth position is the ramp start.
    """
    kind = DriftKind(drift_kind)
    total = sum(length for length, _ in segments)
    mu = np.empty(total, dtype=float)
    truth = GroundTruth()
    pos = 0
    previous_mu: Optional[float] = None
    for length, level in segments:
        mu[pos : pos + length] = level
        if previous_mu is not None and level != previous_mu:
            truth.drift_positions.append(pos)
            truth.drift_magnitudes.append(abs(level - previous_mu))
            if kind is DriftKind.GRADUAL:
                span = min(ramp_length, length)
                steps = np.arange(1, span + 1) / ramp_length
                mu[pos : pos + span] = previous_mu + steps * (level - previous_mu)
        previous_mu = level
        pos += length
    if noise_sd > 0:
        rng = rng if rng is not None else np.random.default_rng(0)
        mu += noise_sd * rng.standard_normal(total)
    return mu, truth


def generate(spec: GeneratorSpec) -> tuple[np.ndarray, GroundTruth]:
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    matrix = np.asarray(spec.pattern_transition_matrix, dtype=float)
    n = spec.num_patterns

    current = spec.initial_pattern
    incoming = matrix[:, current]
    if incoming.sum() > 0:
        previous = int(np.argmax(incoming))
        magnitude = spec.severity_map[(previous, current)]
    else:
        magnitude = float(np.mean(list(spec.severity_map.values())))

    segments: list[tuple[int, float]] = []
    patterns: list[int] = []
    changes: list[int] = []
    mu = spec.initial_mu
    sign = 1.0
    pos = 0
    drifts_in_pattern = 0
    while pos < spec.total_instances:
        if segments:
            if drifts_in_pattern == spec.pattern_length:
                previous, current = current, int(rng.choice(n, p=matrix[current]))
                magnitude = spec.severity_map[(previous, current)]
                drifts_in_pattern = 0
                changes.append(pos)
            mu += sign * magnitude
            sign = -sign
            drifts_in_pattern += 1
        mean = spec.pattern_interval_means[current]
        low = mean * (1 - spec.interval_jitter)
        high = mean * (1 + spec.interval_jitter)
        length = max(1, int(round(rng.uniform(low, high))))
        length = min(length, spec.total_instances - pos)
        segments.append((length, mu))
        patterns.append(current)
        pos += length

    values, truth = render_schedule(
        segments, spec.drift_kind, spec.ramp_length, spec.noise_sd, rng
    )
    truth.pattern_change_positions = changes
    truth.drift_patterns = patterns[1:]
    return values, truth


def stationary_distribution(matrix: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eig(np.asarray(matrix, dtype=float).T)
    k = int(np.argmin(np.abs(vals - 1.0)))
    pi = np.abs(np.real(vecs[:, k]))
    return pi / pi.sum()


def paper_preset(
    name: str,
    scale: float = 1.0,
    seed: int = 0,
    *,
    block_size: int = 32,
    literal_intervals: bool = False,
    train_instances: int = 0,
    interval_spread: float = 4.0,
    pattern_length: int = 20,
) -> GeneratorSpec:
    """Generator spec mirroring the synthetic benchmark datasets.

    The mean interval between drifts is 20 blocks (640 instances at block
    size 32). With ``literal_intervals`` it is 20 instances instead, i.e.
    50 000 drifts per million instances.

    ``total_instances`` is ``scale * 1e6`` plus ``train_instances`` of
    leading stream used to train a detector before evaluation.
    """
    if name not in PRESET_NAMES:
        raise ValueError(f"unknown preset {name!r}; choose one of {PRESET_NAMES}")
    if not 0 < scale <= 1:
        raise ValueError("scale must lie in (0, 1]")
    kind = DriftKind.ABRUPT if name.startswith("abrupt") else DriftKind.GRADUAL
    n = int(name[len(kind.value):])
    structure = np.random.default_rng(_PRESET_STRUCTURE_SEEDS[name])

    matrix = np.zeros((n, n))
    for i in range(n):
        others = [j for j in range(n) if j != i]
        matrix[i, others] = structure.dirichlet(np.ones(n - 1))
    severity = {
        (i, j): float(structure.uniform(0.5, 4.0))
        for i in range(n) for j in range(n) if i != j
    }

    base = BENCHMARK_INSTANCES / BENCHMARK_DRIFTS
    if not literal_intervals:
        base *= block_size
    # geometric ladder of interval factors (0.5x, 1x, 2x for 3 patterns),
    # rescaled so the drift-weighted mean interval is base
    factors = interval_spread ** (np.arange(n) / (n - 1) - 0.5)
    pi = stationary_distribution(matrix)
    means = base * factors / float(pi @ factors)

    return GeneratorSpec(
        pattern_interval_means=[float(m) for m in means],
        pattern_transition_matrix=matrix.tolist(),
        severity_map=severity,
        total_instances=int(round(scale * BENCHMARK_INSTANCES)) + train_instances,
        seed=seed,
        drift_kind=kind,
        ramp_length=max(1, int(round(0.2 * base))),
        pattern_length=pattern_length,
    )


# text I/O


class ParseError(ValueError):
    def __init__(self, path: str, line: int, text: str) -> None:
        self.path, self.line, self.text = path, line, text
        super().__init__(f"{path}:{line}: not a number: {text!r}")


def write_values(values: Sequence[float], fp: IO[str]) -> None:
    fp.writelines(f"{x!r}\n" for x in map(float, values))


def write_truth(truth: GroundTruth, fp: IO[str]) -> None:
    fp.write("index,magnitude\n")
    for d, m in zip(truth.drift_positions, truth.drift_magnitudes):
        fp.write(f"{d},{m!r}\n")


def read_values(fp: IO[str], name: str = "<values>") -> list[float]:
    out = []
    for lineno, line in enumerate(fp, start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        try:
            x = float(text)
        except ValueError:
            raise ParseError(name, lineno, text) from None
        if not math.isfinite(x):
            raise ParseError(name, lineno, text)
        out.append(x)
    return out


def read_truth(fp: IO[str], name: str = "<truth>") -> GroundTruth:
    truth = GroundTruth()
    for lineno, line in enumerate(fp, start=1):
        text = line.strip()
        if not text or text.startswith("#") or text.startswith("index"):
            continue
        parts = text.split(",")
        try:
            truth.drift_positions.append(int(parts[0]))
            truth.drift_magnitudes.append(float(parts[1]) if len(parts) > 1 else 0.0)
        except ValueError:
            raise ParseError(name, lineno, text) from None
    return truth
