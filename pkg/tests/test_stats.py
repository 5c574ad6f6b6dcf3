import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import chisquare

from driftlab.stats import (
    Moments,
    Reservoir,
    ecdf,
    hoeffding_epsilon,
    ks_critical_value,
    ks_same_distribution,
    ks_statistic,
    reservoir_offer,
)

# Frozen from a 40-digit mpmath evaluation of the threshold formula.
EPS_VAR0 = 0.153703310588080679285518987400029889323
EPS_VAR1 = 0.8327540684583904285309041174018248251826
EPS_VAR1_C12 = 0.9685642200324523783799811434021838123545


@pytest.mark.parametrize(
    "variance, c, expected",
    [(0.0, 1.0, EPS_VAR0), (1.0, 1.0, EPS_VAR1), (1.0, 1.2, EPS_VAR1_C12)],
)
def test_hoeffding_epsilon_examples(variance, c, expected):
    got = hoeffding_epsilon(32, 32, variance, 0.05, n_tests=1, c=c)
    assert got == pytest.approx(expected, rel=1e-13)


def test_coefficient_scales_only_first_term():
    second = hoeffding_epsilon(32, 32, 0.0, 0.05)
    first = hoeffding_epsilon(32, 32, 1.0, 0.05) - second
    assert hoeffding_epsilon(32, 32, 1.0, 0.05, c=1.2) == pytest.approx(1.2 * first + second)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(delta=0.0),
        dict(delta=1.0),
        dict(delta=-0.1),
        dict(n0=0),
        dict(n1=0),
        dict(n_tests=0),
        dict(variance=-1.0),
        dict(c=0.9),
    ],
)
def test_hoeffding_epsilon_domain_errors(kwargs):
    args = dict(n0=32, n1=32, variance=1.0, delta=0.05, n_tests=1, c=1.0)
    args.update(kwargs)
    with pytest.raises(ValueError):
        hoeffding_epsilon(**args)


counts = st.integers(min_value=1, max_value=10_000)
variances = st.floats(min_value=0.0, max_value=100.0)
deltas = st.floats(min_value=1e-6, max_value=0.999)
coefficients = st.floats(min_value=1.0, max_value=3.0)


@given(counts, counts, variances, deltas, st.integers(1, 500), coefficients)
def test_hoeffding_epsilon_monotonicity(n0, n1, var, delta, n_tests, c):
    eps = hoeffding_epsilon(n0, n1, var, delta, n_tests, c)
    assert eps > 0
    assert hoeffding_epsilon(n0 + 1, n1, var, delta, n_tests, c) <= eps * (1 + 1e-12)
    assert hoeffding_epsilon(n0, n1 + 1, var, delta, n_tests, c) <= eps * (1 + 1e-12)
    assert hoeffding_epsilon(n0, n1, var, delta, n_tests, c + 0.1) >= eps
    assert hoeffding_epsilon(n0, n1, var + 0.1, delta, n_tests, c) >= eps


def brute_force_ks(a, b):
    return max(abs(ecdf(a, x) - ecdf(b, x)) for x in list(a) + list(b))


def test_ks_examples():
    assert ks_statistic([1, 2, 3], [1, 2, 3]) == 0
    assert ks_statistic([1, 2, 3], [10, 11, 12]) == 1
    # brute force over all 8 pooled points gives 0.25
    assert ks_statistic([1, 3, 5, 7], [2, 4, 6, 8]) == 0.25
    assert brute_force_ks([1, 3, 5, 7], [2, 4, 6, 8]) == 0.25


def test_ks_empty_sample_rejected():
    with pytest.raises(ValueError):
        ks_statistic([], [1.0])
    with pytest.raises(ValueError):
        ks_statistic([1.0], [])


samples = st.lists(st.integers(-20, 20), min_size=1, max_size=40)


@given(samples, samples)
def test_ks_matches_brute_force_and_is_symmetric(a, b):
    d = ks_statistic(a, b)
    assert d == brute_force_ks(a, b)
    assert d == ks_statistic(b, a)
    assert 0 <= d <= 1


@given(samples, samples)
def test_ks_invariant_under_increasing_transform(a, b):
    def f(x):
        return math.exp(x / 7.0) + 3 * x

    assert ks_statistic(a, b) == ks_statistic([f(x) for x in a], [f(x) for x in b])


def test_ks_same_distribution_examples():
    assert ks_same_distribution(0.0, 50, 50, 0.05)
    assert not ks_same_distribution(1.0, 50, 50, 0.05)
    assert ks_critical_value(50, 50, 0.05) == pytest.approx(0.272)
    assert ks_same_distribution(0.272, 50, 50, 0.05)


def test_ks_unsupported_alpha():
    with pytest.raises(ValueError):
        ks_same_distribution(0.1, 10, 10, alpha=0.2)


def test_reservoir_below_capacity_keeps_everything():
    r = Reservoir(10)
    rng = random.Random(1)
    for x in range(5):
        reservoir_offer(r, float(x), rng)
    assert r.items == [0.0, 1.0, 2.0, 3.0, 4.0]
    assert r.seen == 5


class ForcedSlot:
    def randrange(self, n):
        return 0


def test_reservoir_forced_replacement():
    r = Reservoir(1)
    r.offer(1.0, ForcedSlot())
    r.offer(2.0, ForcedSlot())
    assert r.items == [2.0]
    assert r.seen == 2


@given(st.integers(1, 20), st.lists(st.floats(-1e6, 1e6), max_size=60), st.integers(0, 10**6))
def test_reservoir_length_invariant(capacity, xs, seed):
    r = Reservoir(capacity)
    rng = random.Random(seed)
    for i, x in enumerate(xs, start=1):
        r.offer(x, rng)
        assert len(r) == min(i, capacity)
        assert r.seen == i


def retention_counts(trials, n=100, capacity=10, seed=12345):
    rng = random.Random(seed)
    counts = [0] * n
    for _ in range(trials):
        r = Reservoir(capacity)
        for x in range(n):
            r.offer(x, rng)
        for x in r.items:
            counts[x] += 1
    return counts


@pytest.mark.slow
def test_reservoir_retention_is_uniform():
    trials = 100_000
    counts = retention_counts(trials)
    freqs = [c / trials for c in counts]
    assert all(abs(f - 0.10) <= 0.01 for f in freqs)
    assert chisquare(counts).pvalue > 0.001


def test_moments_merge_matches_concatenation():
    rng = random.Random(3)
    a = [rng.gauss(5, 2) for _ in range(700)]
    b = [rng.gauss(-1, 3) for _ in range(300)]
    merged = Moments.of(a) + Moments.of(b)
    whole = Moments.of(a + b)
    assert merged.count == whole.count
    assert merged.sum == pytest.approx(whole.sum, rel=1e-9)
    assert merged.variance == pytest.approx(whole.variance, rel=1e-9)
    assert Moments.of(a) + Moments.of(b) == Moments.of(b) + Moments.of(a)


def test_moments_variance_clamped():
    m = Moments(3, 3.0, 3.0 - 1e-15)
    assert m.variance == 0.0
    assert Moments().variance == 0.0
