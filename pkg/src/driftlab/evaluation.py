"""Prequential evaluation: match detections to ground truth, aggregate runs."""

from __future__ import annotations

import copy
import csv
import json
import math
import statistics
from bisect import bisect_left
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from itertools import product
from typing import IO, Optional, Sequence

import numpy as np

from .press import PressConfig, PressDetector, Phase, drift_indices
from .seed import SeedConfig, SeedDetector
from .streamgen import GroundTruth, generate, paper_preset

DEFAULT_DELTAS = (0.05, 0.10, 0.15, 0.20, 0.25)
DEFAULT_BETAS = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6)
TRAIN_INSTANCES = 1_000_000


def _check_increasing(seq: Sequence[int], what: str) -> None:
    for a, b in zip(seq, seq[1:]):
        if not b > a:
            raise ValueError(f"{what} must be strictly increasing ({a} then {b})")


@dataclass
class Match:
    """Outcome of matching detections to true drifts.

    ``delays[k]`` is the delay of true drift ``k`` or None when missed;
    ``false_alarms`` lists the unmatched detection indices.
    """

    delays: list[Optional[int]]
    false_alarms: list[int]

    @property
    def tp(self) -> int:
        return sum(d is not None for d in self.delays)

    @property
    def fn(self) -> int:
        return sum(d is None for d in self.delays)

    @property
    def fp(self) -> int:
        return len(self.false_alarms)

    @property
    def matched_delays(self) -> list[int]:
        return [d for d in self.delays if d is not None]


def match_detections(
    truth: Sequence[int], detections: Sequence[int], stream_end: int
) -> Match:
    """Pair each true drift with the first detection that follows it.

    Drift positions are 0-based indices of the first post-drift value;
    detection indices count the values consumed (see ``DriftEvent``), so a
    detection ``t`` has seen drift ``d`` when ``d < t``. A detection is a
    true positive for the latest drift it has seen, provided that drift is
    not matched yet; it then necessarily precedes the next drift. Every
    other detection is a false alarm.
    """
    _check_increasing(truth, "true drift positions")
    _check_increasing(detections, "detection indices")
    if truth and not (0 <= truth[0] and truth[-1] < stream_end):
        raise ValueError("true drift positions must lie in [0, stream_end)")
    if detections and not (0 < detections[0] and detections[-1] <= stream_end):
        raise ValueError("detection indices must lie in (0, stream_end]")
    delays: list[Optional[int]] = [None] * len(truth)
    false_alarms = []
    for t in detections:
        k = bisect_left(truth, t) - 1
        if k >= 0 and delays[k] is None:
            delays[k] = t - truth[k]
        else:
            false_alarms.append(t)
    return Match(delays, false_alarms)


@dataclass
class Metrics:
    fp_rate: float
    tp_rate: float
    mean_delay: float
    tp: int
    fp: int
    fn: int
    instances: int
    # tp_rate is reported as 0 when there is nothing to detect
    no_true_drifts: bool = False

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int, delays: Sequence[int], instances: int):
        n_true = tp + fn
        return cls(
            fp_rate=fp / instances if instances else 0.0,
            tp_rate=tp / n_true if n_true else 0.0,
            mean_delay=float(np.mean(delays)) if len(delays) else 0.0,
            tp=tp,
            fp=fp,
            fn=fn,
            instances=instances,
            no_true_drifts=n_true == 0,
        )


@dataclass
class DetectorSettings:
    kind: str = "press"
    delta: float = 0.05
    beta: float = 0.4
    block_size: int = 32
    random_seed: int = 0
    theta: float = 0.5
    ks_alpha: float = 0.05
    volatility_buffer: int = 32

    def __post_init__(self) -> None:
        if self.kind not in ("seed", "press"):
            raise ValueError(f"unknown detector {self.kind!r}")

    def seed_config(self) -> SeedConfig:
        return SeedConfig(block_size=self.block_size, delta=self.delta)

    def build(self):
        if self.kind == "seed":
            return SeedDetector(self.seed_config())
        return PressDetector(PressConfig(
            seed=self.seed_config(),
            beta=self.beta,
            random_seed=self.random_seed,
            theta=self.theta,
            ks_alpha=self.ks_alpha,
            volatility_buffer=self.volatility_buffer,
        ))


@dataclass
class ExperimentResult:
    metrics: Metrics
    detections: list[int]
    match: Match
    truth: list[int] = field(default_factory=list)
    magnitudes: list[float] = field(default_factory=list)


def detect(settings: DetectorSettings, values, train_instances: int = 0) -> list[int]:
    """Detection indices over the whole stream.

    PRESS learns on the first ``train_instances`` values and predicts on the
    rest; without a training segment it stays in its configured phase.
    """
    detector = settings.build()
    if settings.kind == "seed":
        return [e.index for e in detector.feed(values)]
    events = []
    if train_instances:
        events += detector.run(values[:train_instances])
        detector.switch_phase(Phase.PREDICTING)
        values = values[train_instances:]
    events += detector.run(values)
    return drift_indices(events)


def score(
    detections: Sequence[int],
    truth: GroundTruth | Sequence[int],
    stream_end: int,
    train_instances: int = 0,
) -> ExperimentResult:
    """Metrics over the part of the stream after ``train_instances``.

    Drifts before the boundary and detections at or before it are left out;
    a detection after the boundary that answers a pre-boundary drift counts
    neither way.
    """
    positions = truth.drift_positions if isinstance(truth, GroundTruth) else list(truth)
    magnitudes = truth.drift_magnitudes if isinstance(truth, GroundTruth) else []
    match = match_detections(positions, detections, stream_end)
    keep = [k for k, d in enumerate(positions) if d >= train_instances]
    delays = [match.delays[k] for k in keep]
    matched = [d for d in delays if d is not None]
    fp = sum(1 for t in match.false_alarms if t > train_instances)
    metrics = Metrics.from_counts(
        tp=len(matched),
        fp=fp,
        fn=len(delays) - len(matched),
        delays=matched,
        instances=stream_end - train_instances,
    )
    kept = Match(delays, [t for t in match.false_alarms if t > train_instances])
    return ExperimentResult(
        metrics=metrics,
        detections=[t for t in detections if t > train_instances],
        match=kept,
        truth=[positions[k] for k in keep],
        magnitudes=[magnitudes[k] for k in keep] if magnitudes else [],
    )


def run_experiment(
    settings: DetectorSettings,
    values,
    truth: GroundTruth | Sequence[int],
    train_instances: int = 0,
    train_fraction: Optional[float] = None,
) -> ExperimentResult:
    if train_fraction is not None:
        if not 0 <= train_fraction < 1:
            raise ValueError("train_fraction must lie in [0, 1)")
        train_instances = int(round(train_fraction * len(values)))
    if not 0 <= train_instances < len(values):
        raise ValueError("training segment must leave values to evaluate")
    positions = truth.drift_positions if isinstance(truth, GroundTruth) else truth
    if positions and positions[-1] >= len(values):
        raise ValueError("ground truth extends past the end of the stream")
    detections = detect(settings, values, train_instances)
    return score(detections, truth, len(values), train_instances)


def severity_terciles(result: ExperimentResult) -> list[dict]:
    """Mean delay and FN rate of true drifts binned by magnitude terciles."""
    mags = np.asarray(result.magnitudes, dtype=float)
    if mags.size < 3:
        raise ValueError("need at least three true drifts with magnitudes")
    order = np.argsort(mags, kind="stable")
    out = []
    for chunk in np.array_split(order, 3):
        delays = [result.match.delays[k] for k in chunk]
        hit = [d for d in delays if d is not None]
        out.append({
            "low": float(mags[chunk].min()),
            "high": float(mags[chunk].max()),
            "count": len(chunk),
            "mean_delay": float(np.mean(hit)) if hit else math.nan,
            "fn_rate": 1 - len(hit) / len(chunk),
        })
    return out


# sweeps


@dataclass
class SweepGrid:
    preset: str = "abrupt10"
    scale: float = 0.1
    deltas: Sequence[float] = DEFAULT_DELTAS
    betas: Sequence[float] = (0.4,)
    detector: str = "press"
    runs: int = 10
    base_seed: int = 0
    train_instances: int = TRAIN_INSTANCES
    block_size: int = 32

    def __post_init__(self) -> None:
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if not self.deltas or not self.betas:
            raise ValueError("grid must have at least one delta and one beta")
        if self.detector not in ("seed", "press"):
            raise ValueError(f"unknown detector {self.detector!r}")

    def cells(self) -> list[tuple[float, Optional[float]]]:
        if self.detector == "seed":
            return [(d, None) for d in self.deltas]
        return list(product(self.deltas, self.betas))


METRIC_FIELDS = ("fp_rate", "tp_rate", "mean_delay")


@dataclass
class SweepReport:
    grid: SweepGrid
    # per cell: metrics of each run, in seed order
    runs: dict[tuple[float, Optional[float]], list[Metrics]]

    def rows(self) -> list[dict]:
        out = []
        for delta, beta in self.grid.cells():
            metrics = self.runs[(delta, beta)]
            row = {
                "detector": self.grid.detector,
                "preset": self.grid.preset,
                "scale": self.grid.scale,
                "delta": delta,
                "beta": beta,
                "runs": len(metrics),
            }
            for name in METRIC_FIELDS:
                xs = [getattr(m, name) for m in metrics]
                row[f"{name}_mean"] = statistics.fmean(xs)
                row[f"{name}_sd"] = statistics.stdev(xs) if len(xs) > 1 else 0.0
            out.append(row)
        return out

    def cell(self, delta: float, beta: Optional[float] = None) -> dict:
        if self.grid.detector == "seed":
            beta = None
        for row in self.rows():
            if row["delta"] == delta and row["beta"] == beta:
                return row
        raise KeyError((delta, beta))

    def to_dict(self) -> dict:
        grid = asdict(self.grid)
        grid["deltas"] = list(grid["deltas"])
        grid["betas"] = list(grid["betas"])
        return {
            "grid": grid,
            "rows": self.rows(),
            "runs": [
                {"delta": d, "beta": b, "metrics": [asdict(m) for m in self.runs[(d, b)]]}
                for d, b in self.grid.cells()
            ],
        }

    def write_json(self, fp: IO[str]) -> None:
        json.dump(self.to_dict(), fp, indent=1)
        fp.write("\n")

    def write_csv(self, fp: IO[str]) -> None:
        rows = self.rows()
        writer = csv.DictWriter(fp, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)


def _sweep_one_seed(grid: SweepGrid, run: int) -> dict:
    seed = grid.base_seed + run
    spec = paper_preset(
        grid.preset, grid.scale, seed,
        block_size=grid.block_size, train_instances=grid.train_instances,
    )
    values, truth = generate(spec)
    end = len(values)
    train = grid.train_instances
    out = {}
    for delta in grid.deltas:
        base = DetectorSettings(
            kind=grid.detector, delta=delta, block_size=grid.block_size, random_seed=seed
        )
        if grid.detector == "seed":
            detections = detect(base, values)
            out[(delta, None)] = score(detections, truth, end, train).metrics
            continue
        # training never touches c, so one trained detector serves every beta
        trained = base.build()
        prefix = trained.run(values[:train]) if train else []
        for beta in grid.betas:
            detector = copy.deepcopy(trained)
            detector.config.beta = beta
            if train:
                detector.switch_phase(Phase.PREDICTING)
            events = prefix + detector.run(values[train:])
            out[(delta, beta)] = score(drift_indices(events), truth, end, train).metrics
    return out


def sweep(grid: SweepGrid, workers: int = 1) -> SweepReport:
    """Run ``grid.runs`` seeded experiments for every grid cell.

    Run ``r`` uses seed ``base_seed + r`` for both the stream and the
    detector. Results are ordered by grid and seed regardless of ``workers``.
    """
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            per_seed = list(pool.map(_sweep_one_seed, [grid] * grid.runs, range(grid.runs)))
    else:
        per_seed = [_sweep_one_seed(grid, r) for r in range(grid.runs)]
    runs = {cell: [res[cell] for res in per_seed] for cell in grid.cells()}
    return SweepReport(grid, runs)


def write_metrics(result: ExperimentResult, json_fp: IO[str] | None, csv_fp: IO[str] | None) -> None:
    doc = asdict(result.metrics)
    if json_fp is not None:
        json.dump(doc, json_fp, indent=1)
        json_fp.write("\n")
    if csv_fp is not None:
        writer = csv.DictWriter(csv_fp, fieldnames=list(doc), lineterminator="\n")
        writer.writeheader()
        writer.writerow(doc)
