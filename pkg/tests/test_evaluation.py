import io
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from driftlab.evaluation import (
    DetectorSettings,
    SweepGrid,
    match_detections,
    run_experiment,
    score,
    severity_terciles,
    sweep,
    write_metrics,
)
from driftlab.streamgen import generate, paper_preset


def test_match_examples():
    m = match_detections([1000, 2000], [1010, 1500, 2025], 3000)
    assert (m.tp, m.fp, m.fn) == (2, 1, 0)
    assert m.delays == [10, 25]
    assert np.mean(m.matched_delays) == 17.5
    m = match_detections([], [5], 10)
    assert (m.tp, m.fp) == (0, 1)
    m = match_detections([100], [], 200)
    assert (m.tp, m.fn, m.fp) == (0, 1, 0)


def test_detection_at_drift_position_has_not_seen_it():
    m = match_detections([100], [100, 101], 200)
    assert m.delays == [1]
    assert m.false_alarms == [100]


def test_late_detection_past_next_drift_is_false_alarm():
    m = match_detections([100, 200], [250], 300)
    assert m.delays == [None, 50]
    m = match_detections([100, 200], [150, 160], 300)
    assert m.delays == [50, None]
    assert m.false_alarms == [160]


def test_match_input_validation():
    with pytest.raises(ValueError):
        match_detections([5, 5], [], 10)
    with pytest.raises(ValueError):
        match_detections([], [3, 2], 10)
    with pytest.raises(ValueError):
        match_detections([20], [], 10)


@given(
    st.lists(st.integers(0, 999), unique=True).map(sorted),
    st.lists(st.integers(1, 1000), unique=True).map(sorted),
)
def test_every_detection_counted_once(truth, detections):
    m = match_detections(truth, detections, 1000)
    assert m.tp + m.fp == len(detections)
    assert m.tp + m.fn == len(truth)
    assert all(d > 0 for d in m.matched_delays)


def test_constant_stream_metrics():
    result = run_experiment(DetectorSettings(kind="seed"), np.zeros(5000), [])
    assert result.metrics.fp_rate == 0
    assert result.metrics.tp_rate == 0
    assert result.metrics.no_true_drifts


def test_step_stream_delay_32():
    values = np.array([0.0] * 64 + [1.0] * 32 + [1.0] * 64)
    result = run_experiment(DetectorSettings(kind="seed"), values, [64])
    assert result.metrics.tp == 1
    assert result.metrics.mean_delay == 32
    assert result.metrics.fp == 0


def test_press_beta_zero_metrics_equal_seed():
    values, truth = generate(paper_preset("abrupt3", 0.1, seed=2))
    seed = run_experiment(DetectorSettings(kind="seed"), values, truth, train_fraction=0.5)
    press = run_experiment(
        DetectorSettings(kind="press", beta=0.0), values, truth, train_fraction=0.5
    )
    assert press.metrics == seed.metrics


def test_training_prefix_excluded():
    truth = [100, 500, 900]
    result = score([120, 510, 515, 960], truth, 1000, train_instances=505)
    # 510 answers the pre-boundary drift 500 and counts neither way
    assert result.truth == [900]
    assert (result.metrics.tp, result.metrics.fp, result.metrics.fn) == (1, 1, 0)
    assert result.metrics.instances == 495
    assert result.metrics.fp_rate == pytest.approx(1 / 495)


def test_run_experiment_rejects_bad_inputs():
    with pytest.raises(ValueError):
        run_experiment(DetectorSettings(), np.zeros(100), [], train_instances=100)
    with pytest.raises(ValueError):
        run_experiment(DetectorSettings(), np.zeros(100), [150])


def test_severity_terciles_split_by_magnitude():
    values, truth = generate(paper_preset("abrupt10", 0.1, seed=0))
    result = run_experiment(DetectorSettings(kind="seed"), values, truth)
    low, mid, high = severity_terciles(result)
    assert low["high"] <= mid["low"] and mid["high"] <= high["low"]
    assert low["count"] + mid["count"] + high["count"] == len(truth)


def small_grid(**kw):
    base = dict(preset="abrupt3", scale=0.02, runs=1, train_instances=20_000,
                deltas=(0.05, 0.25), betas=(0.1, 0.6))
    base.update(kw)
    return SweepGrid(**base)


def test_sweep_single_run_has_zero_sd():
    report = sweep(small_grid())
    rows = report.rows()
    assert len(rows) == 4
    for row in rows:
        assert row["fp_rate_sd"] == row["tp_rate_sd"] == row["mean_delay_sd"] == 0


def test_seed_sweep_ignores_betas():
    report = sweep(small_grid(detector="seed", runs=2))
    assert [(r["delta"], r["beta"]) for r in report.rows()] == [(0.05, None), (0.25, None)]
    assert report.cell(0.25)["runs"] == 2


def test_sweep_deterministic_and_serializable():
    a, b = sweep(small_grid(runs=2)), sweep(small_grid(runs=2))
    ja, jb = io.StringIO(), io.StringIO()
    a.write_json(ja)
    b.write_json(jb)
    assert ja.getvalue() == jb.getvalue()
    doc = json.loads(ja.getvalue())
    assert len(doc["rows"]) == 4
    csv = io.StringIO()
    a.write_csv(csv)
    assert len(csv.getvalue().splitlines()) == 5


def test_sweep_workers_match_serial():
    grid = small_grid(runs=2, deltas=(0.1,), betas=(0.4,))
    assert sweep(grid, workers=2).to_dict() == sweep(grid).to_dict()


def test_write_metrics():
    result = run_experiment(DetectorSettings(kind="seed"), np.zeros(1000), [])
    j, c = io.StringIO(), io.StringIO()
    write_metrics(result, j, c)
    assert json.loads(j.getvalue())["fp"] == 0
    assert c.getvalue().splitlines()[0].startswith("fp_rate,")
