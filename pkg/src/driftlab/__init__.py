"""Concept-drift detection with severity-adaptive thresholds."""

from .evaluation import (
    DetectorSettings,
    Match,
    Metrics,
    SweepGrid,
    SweepReport,
    match_detections,
    run_experiment,
    sweep,
)
from .network import PatternNetwork, VolatilityPattern
from .press import EventKind, Phase, PressConfig, PressDetector, PressEvent
from .seed import DriftEvent, SeedConfig, SeedDetector
from .severity import SnapshotState, normalize_severity, severity_on_drift
from .stats import (
    Moments,
    Reservoir,
    hoeffding_epsilon,
    ks_same_distribution,
    ks_statistic,
    reservoir_offer,
)
from .streamgen import GeneratorSpec, GroundTruth, generate, paper_preset
from .volatility import VolatilityDetector, VolatilityShift

__version__ = "0.1.0"
