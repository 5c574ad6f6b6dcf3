import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from driftlab.volatility import VolatilityDetector


def primed(reference=100.0, buffer_size=32):
    det = VolatilityDetector(buffer_size=buffer_size, rng=random.Random(0))
    for _ in range(2 * buffer_size):
        assert det.observe(reference) is None
    return det


@pytest.mark.parametrize("level, shifts", [(100.0, False), (200.0, True), (140.0, False)])
def test_relative_difference_rule(level, shifts):
    det = primed()
    fired = [det.observe(level) for _ in range(32)]
    assert any(fired) is shifts


def test_recent_pattern_examples():
    det = VolatilityDetector(buffer_size=4)
    for x in (90, 110, 95):
        det.observe(x)
    assert det.recent_pattern() == [90, 110, 95]
    det = VolatilityDetector(buffer_size=32)
    for x in range(1, 41):
        det.observe(x)
    assert det.recent_pattern() == list(range(9, 41))


def test_buffer_empty_after_shift():
    det = primed()
    shift = None
    for _ in range(32):
        shift = shift or det.observe(300.0)
    assert shift is not None
    assert len(shift.recent_pattern) == 32
    with pytest.raises(ValueError):
        det.recent_pattern()
    # the reference now describes the new regime
    assert det.reference.mean() == pytest.approx(
        sum(shift.recent_pattern) / len(shift.recent_pattern)
    )


def test_doubling_detected_within_64_intervals():
    rng = random.Random(3)
    det = VolatilityDetector(rng=random.Random(1))
    for _ in range(300):
        det.observe(rng.uniform(90, 110))
    fired_at = None
    for k in range(1, 65):
        if det.observe(rng.uniform(180, 220)):
            fired_at = k
            break
    assert fired_at is not None


def test_invalid_interval():
    det = VolatilityDetector()
    for bad in (0, -1, float("nan")):
        with pytest.raises(ValueError):
            det.observe(bad)


# powers of two scale exactly in floating point
@given(st.lists(st.floats(1, 1000), min_size=1, max_size=300),
       st.sampled_from([2.0**-6, 0.5, 2.0, 1024.0]))
def test_scale_invariance(intervals, factor):
    a = VolatilityDetector(rng=random.Random(9))
    b = VolatilityDetector(rng=random.Random(9))
    fired_a = [a.observe(x) is not None for x in intervals]
    fired_b = [b.observe(x * factor) is not None for x in intervals]
    assert fired_a == fired_b
