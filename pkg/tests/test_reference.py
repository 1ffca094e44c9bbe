import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from ppgap import Dataset, ReferenceDistributionError, fit_reference, load_reference, save_reference
from ppgap.reference import DegenerateColumnWarning, ReferenceDistribution


def _one(values, weights=None):
    return Dataset(np.array(values, float)[:, None], ("a",), weights)


def test_cdf_of_small_column():
    ref = fit_reference(_one([1, 1, 2, 3, 4]))
    assert [ref.cdf(0, x) for x in (1, 2, 3, 4)] == [0.4, 0.6, 0.8, 1.0]
    assert ref.min_values[0] == 1.0
    assert ref.denominators[0] == 0.6
    assert ref.scores(0, 1) == 1.0
    assert ref.scores(0, 2) == 2 / 3


def test_step_evaluation():
    ref = fit_reference(_one([1, 1, 2, 3, 4]))
    assert ref.cdf(0, 2.5) == ref.cdf(0, 2)
    assert ref.cdf(0, 4) == 1.0
    assert ref.cdf(0, 0.5) == 0.0
    assert ref.scores(0, 0.5) == 1.0
    assert ref.scores(0, 10) == 0.0


def test_degenerate_column():
    with pytest.warns(DegenerateColumnWarning):
        ref = fit_reference(_one([2, 2, 2]))
    assert ref.degenerate == ("a",)
    assert ref.denominators[0] == 0.0
    assert ref.scores(0, [1, 2, 3]).tolist() == [1.0, 1.0, 0.0]


def test_replication_gives_identical_cdf():
    vals = [0, 3, 1, 1, 2, 0, 3]
    w = [1.5, 2, 1, 3, 0.5, 1, 2]
    a = fit_reference(_one(vals, w))
    b = fit_reference(_one(vals * 2, w * 2))
    assert np.array_equal(a.cum_shares[0], b.cum_shares[0])
    xs = np.arange(-1, 5)
    assert np.array_equal(a.scores(0, xs), b.scores(0, xs))


def test_exhaustive_unit_weight_oracle():
    # Every multiset of n <= 6 codes on a scale of 4, every query point.
    for n in range(1, 7):
        for column in itertools.combinations_with_replacement(range(4), n):
            ref = fit_reference(_one(column))
            ones = [1] * n
            for x in range(-1, 5):
                assert ref.cdf(0, x) == float(oracles.cdf(column, ones, x))
                assert ref.scores(0, x) == float(oracles.depth_score(column, ones, x))


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 6), st.integers(1, 9)), min_size=1, max_size=30))
def test_integer_weight_oracle(pairs):
    column = [p[0] for p in pairs]
    w = [p[1] for p in pairs]
    ref = fit_reference(_one(column, w))
    for x in range(-1, 8):
        assert ref.cdf(0, x) == float(oracles.cdf(column, w, x))
        assert ref.scores(0, x) == float(oracles.depth_score(column, w, x))


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 5), st.floats(0.01, 100.0)), min_size=1, max_size=25))
def test_fractional_weight_oracle(pairs):
    column = [p[0] for p in pairs]
    w = [p[1] for p in pairs]
    ref = fit_reference(_one(column, w))
    for x in range(-1, 7):
        assert ref.scores(0, x) == pytest.approx(float(oracles.depth_score(column, w, x)),
                                                 abs=1e-12)
        assert 0.0 <= ref.scores(0, x) <= 1.0


def test_row_order_does_not_matter():
    rng = np.random.default_rng(3)
    vals = rng.integers(0, 5, 200)
    w = rng.uniform(0.1, 5, 200)
    perm = rng.permutation(200)
    a = fit_reference(_one(vals, w))
    b = fit_reference(_one(vals[perm], w[perm]))
    assert np.array_equal(a.cum_shares[0], b.cum_shares[0])
    assert np.array_equal(a.scores(0, np.arange(6)), b.scores(0, np.arange(6)))


def test_save_load_round_trip():
    rng = np.random.default_rng(0)
    data = Dataset(rng.normal(size=(50, 2)).round(2), ("u", "v"), rng.uniform(0.5, 3, 50))
    ref = fit_reference(data, mode="anchored")
    back = load_reference(save_reference(ref))
    assert back.names == ref.names and back.mode == "anchored"
    for j in range(2):
        pts = np.concatenate([ref.supports[j], ref.supports[j] + 0.001, [-99.0]])
        assert np.array_equal(back.scores(j, pts), ref.scores(j, pts))
        assert np.array_equal(back.cdf(j, pts), ref.cdf(j, pts))


def test_tampered_document_rejected():
    doc = json.loads(save_reference(fit_reference(_one([0, 1, 2, 2]))))
    doc["indicators"][0]["cum_share"] = [0.5, 0.25, 1.0]
    with pytest.raises(ReferenceDistributionError):
        load_reference(json.dumps(doc))
    doc = json.loads(save_reference(fit_reference(_one([0, 1, 2, 2]))))
    doc["indicators"][0]["min_value"] = 7
    with pytest.raises(ReferenceDistributionError):
        load_reference(json.dumps(doc))
    with pytest.raises(ReferenceDistributionError):
        load_reference("{}")


def test_legacy_document_without_masses():
    ref = ReferenceDistribution(("a",), ([0.0, 1.0, 2.0],), ([0.25, 0.5, 1.0],), "anchored")
    assert ref.scores(0, 1) == (1 - 0.5) / 0.75


def test_anchor_ignores_new_data():
    base = _one([0, 1, 1, 2, 3])
    later = _one([3, 3, 2, 0, 0, 0])
    anchored = fit_reference(base, mode="anchored")
    fresh = fit_reference(later)
    xs = later.values[:, 0]
    assert np.array_equal(anchored.score_matrix(later)[:, 0],
                          [float(oracles.depth_score([0, 1, 1, 2, 3], [1] * 5, x)) for x in xs])
    assert not np.array_equal(anchored.score_matrix(later), fresh.score_matrix(later))


def test_pooling_modes():
    a = _one([0, 1], [1, 1])
    b = _one([2, 3, 3, 3], [1, 1, 1, 1])
    concat = fit_reference([a, b], mode="pooled")
    equal = fit_reference([a, b], mode="pooled", pooling="equal_total")
    assert concat.cdf(0, 1) == 2 / 6
    assert equal.cdf(0, 1) == 0.5


def test_below_baseline_minimum_clamps():
    ref = fit_reference(_one([2, 3, 4]), mode="anchored")
    assert ref.cdf(0, 1) == float(oracles.cdf([2, 3, 4], [1, 1, 1], 1)) == 0.0
    assert ref.scores(0, 1) == 1.0


def test_nonfinite_rejected():
    with pytest.raises(ReferenceDistributionError):
        fit_reference(Dataset(np.array([[1.0], [np.nan]]), ("a",)))
