import pytest
from hypothesis import given
from hypothesis import strategies as st

from driftlab.severity import SnapshotState, normalize_severity, severity_on_drift


def test_snapshot_sequence():
    state = SnapshotState()
    assert severity_on_drift(state, 0.30) is None
    assert state.snapshot == 0.30
    assert severity_on_drift(state, 0.45) == pytest.approx(0.15)
    assert severity_on_drift(state, 0.45) == 0
    assert state.running_max == pytest.approx(0.15)


def test_normalize_examples():
    assert normalize_severity(0.15, 0.60) == pytest.approx(0.25)
    assert normalize_severity(0.60, 0.60) == 1.0
    assert normalize_severity(0.15, 0) == 0


def test_nonfinite_mean_rejected():
    with pytest.raises(ValueError):
        severity_on_drift(SnapshotState(), float("nan"))


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=50))
def test_running_max_bounds_every_severity(means):
    state = SnapshotState()
    raws = [r for m in means if (r := state.on_drift(m)) is not None]
    assert all(r >= 0 for r in raws)
    assert state.running_max == (max(raws) if raws else 0.0)
    assert all(0 <= state.normalize(r) <= 1 for r in raws)
