import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from krummp import ConfigurationError
from krummp.evaluation import chordal_distance, match_spikes, min_separation, wrap_distance
from krummp.pencil import SpikeEstimate
from krummp.signal import SpikeGroup

unit = st.floats(0, 1, exclude_max=True)


def test_wrap_distance_examples():
    assert wrap_distance(0.1, 0.9) == pytest.approx(0.2)
    assert wrap_distance(0.0, 0.5) == 0.5
    with pytest.raises(ConfigurationError):
        wrap_distance(1.0, 0.2)


@given(unit, unit, unit)
def test_wrap_distance_is_a_metric(a, b, c):
    assert 0 <= wrap_distance(a, b) <= 0.5
    assert wrap_distance(a, b) == wrap_distance(b, a)
    assert wrap_distance(a, c) <= wrap_distance(a, b) + wrap_distance(b, c) + 1e-15


def test_min_separation():
    assert min_separation([0.3]) == float("inf")
    assert min_separation([0.05, 0.5, 0.97]) == pytest.approx(0.08)


def test_chordal_distance():
    assert chordal_distance(1, 1j) == pytest.approx(np.sqrt(2) / 2)
    with pytest.raises(ConfigurationError):
        chordal_distance(np.inf, 1)


def test_match_example_wraps_around():
    truth = SpikeGroup([0.1, 0.9], [1.0, 1.0], 0.1)
    est = SpikeEstimate(np.array([0.88, 0.12]), np.array([1.0, 1.0]))
    res = match_spikes(truth, est)
    assert res.permutation == (1, 0)
    assert res.d_max == pytest.approx(0.02)
    assert res.d_avg == pytest.approx(0.02)


def test_match_identity_and_amplitude_error():
    truth = SpikeGroup([0.2, 0.4, 0.7], [1.0, 2.0, -1.0], 0.1)
    est = SpikeEstimate(truth.locations, truth.amplitudes + np.array([0, 0.5, 0]))
    res = match_spikes(truth, est)
    assert res.d_max == 0
    assert res.permutation == (0, 1, 2)
    assert res.amplitude_error_max == pytest.approx(0.5)


def test_match_tie_rule():
    truth = SpikeGroup([0.2, 0.4], [1.0, 1.0], 0.1)
    est = SpikeEstimate(np.array([0.3, 0.5]), np.array([1.0, 1.0]))
    # truth 0 and truth 1 both sit 0.1 from estimate 0; the lowest truth index wins
    assert match_spikes(truth, est).permutation == (0, 1)


def test_match_size_mismatch():
    with pytest.raises(ConfigurationError):
        match_spikes(SpikeGroup([0.2], [1.0], 0.1), SpikeEstimate(np.array([0.1, 0.2]), np.ones(2)))


def brute_force_greedy(t, e):
    # reference: enumerate all pairs in (distance, truth, estimate) order
    pairs = sorted((wrap_distance(a, b), i, j) for (i, a), (j, b) in itertools.product(enumerate(t), enumerate(e)))
    used_i, used_j, perm = set(), set(), {}
    for _, i, j in pairs:
        if i not in used_i and j not in used_j:
            perm[i] = j
            used_i.add(i)
            used_j.add(j)
    return tuple(perm[i] for i in range(len(t)))


@given(st.integers(1, 5).flatmap(lambda k: st.tuples(
    st.lists(unit, min_size=k, max_size=k, unique=True), st.lists(unit, min_size=k, max_size=k))))
def test_match_agrees_with_reference(data):
    t, e = data
    truth = SpikeGroup(np.array(t), np.ones(len(t)), 0.1)
    est = SpikeEstimate(np.array(e), np.ones(len(e)))
    res = match_spikes(truth, est)
    assert res.permutation == brute_force_greedy(t, e)
    # greedy never beats the best assignment on d_max
    best = min(max(wrap_distance(t[i], e[p[i]]) for i in range(len(t)))
               for p in itertools.permutations(range(len(t))))
    assert res.d_max >= best - 1e-15
