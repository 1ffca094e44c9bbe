import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from ppgap import Dataset, build_profile, compute_measures, ordinal_specs
from ppgap.indicators import IndicatorSpec
from ppgap.measures import AFUnavailableError, af_block, normalized_gaps


def test_example_e(example_e):
    data, specs = example_e
    r = compute_measures(data, specs, k=0.5)
    assert r.H == 0.75
    assert r.A == pytest.approx(5 / 6, abs=1e-12)
    assert r.S == pytest.approx(14 / 15, abs=1e-12)
    assert r.P == pytest.approx(7 / 12, abs=1e-12)
    assert r.HA == 0.625
    np.testing.assert_allclose(r.A_i, [1, 1, 0.5, 0], atol=1e-12)
    np.testing.assert_allclose(r.S_i, [1, 5 / 6, 1, 0], atol=1e-12)
    np.testing.assert_allclose(r.P_i, [1, 5 / 6, 0.5, 0], atol=1e-12)
    assert r.H * r.A * r.S == pytest.approx(r.P, abs=1e-15)


def test_no_poor():
    specs = ordinal_specs([3, 3], [1, 1])
    r = compute_measures(Dataset(np.array([[1.0, 2], [2, 1]]), ("x1", "x2")), specs, k=0.5)
    assert (r.H, r.A, r.S, r.P) == (0.0, 0.0, 0.0, 0.0)
    assert any("no poor" in d for d in r.diagnostics)


def test_all_deprived_at_minimum():
    specs = ordinal_specs([3, 3], [2, 2])
    data = Dataset(np.array([[0.0, 0], [0, 0], [2, 2]]), ("x1", "x2"))
    r = compute_measures(data, specs, k=1.0)
    assert r.A == 1.0 and r.S == 1.0


def test_alpha():
    specs = ordinal_specs([4, 4], [3, 3])
    data = Dataset(np.array([[0.0, 1], [1, 2], [2, 3], [3, 3]]), ("x1", "x2"))
    r1 = compute_measures(data, specs, k=0.5, alpha=1.0)
    assert r1.P_alpha == r1.P
    r2 = compute_measures(data, specs, k=0.5, alpha=2.0)
    assert r2.P_alpha < r2.P
    with pytest.raises(ValueError):
        compute_measures(data, specs, k=0.5, alpha=0.5)


def test_binary_recovers_m0():
    rng = np.random.default_rng(1)
    specs = ordinal_specs([2] * 3, [1] * 3)
    for _ in range(20):
        data = Dataset(rng.integers(0, 2, (30, 3)).astype(float), ("x1", "x2", "x3"),
                       rng.integers(1, 4, 30).astype(float))
        r = compute_measures(data, specs, k=1 / 3)
        assert abs(r.P - r.M0) <= 1e-12


matrices = st.integers(1, 3).flatmap(lambda d: st.tuples(
    st.just(d),
    st.lists(st.lists(st.integers(0, 3), min_size=d, max_size=d), min_size=1, max_size=8),
    st.lists(st.integers(1, 3), min_size=d, max_size=d),
    st.lists(st.integers(1, 4), min_size=d, max_size=d),
    st.lists(st.integers(1, 3), min_size=8, max_size=8),
    st.sampled_from([0.2, 0.34, 0.5, 0.75, 1.0])))


@settings(max_examples=150, deadline=None)
@given(matrices)
def test_engine_matches_rational_oracle(case):
    d, rows, cutoffs, wts, survey, k = case
    n = len(rows)
    survey = survey[:n]
    specs = ordinal_specs([4] * d, cutoffs, [float(w) for w in wts])
    w_norm = [s.weight_w for s in specs]
    k = max(k, min(w_norm))
    data = Dataset(np.array(rows, float), tuple(s.name for s in specs), np.array(survey, float))
    r = compute_measures(data, specs, k=k)
    o = oracles.measures(rows, wts, cutoffs, k, survey)
    for key in ("H", "A", "S", "P"):
        assert getattr(r, key) == pytest.approx(float(o[key]), abs=1e-12), key
    np.testing.assert_allclose(r.P_i, [float(v) for v in o["P_i"]], atol=1e-12)
    assert abs(r.P - r.H * r.A * r.S) <= 1e-12


def test_normalized_gaps():
    assert normalized_gaps(np.array([[2.0]]), np.array([5.0]))[0, 0] == pytest.approx(0.6)
    assert normalized_gaps(np.array([[5.0]]), np.array([5.0]))[0, 0] == 0.0


def test_af_block_requires_cardinal(example_e):
    data, specs = example_e
    with pytest.raises(AFUnavailableError):
        af_block(build_profile(data, specs, k=0.5), specs)


def test_af_block_values():
    specs = [IndicatorSpec("inc", "cardinal", 10.0, 1.0), IndicatorSpec("edu", "cardinal", 5.0, 1.0)]
    from ppgap import normalize_weights
    specs = normalize_weights(specs)
    data = Dataset(np.array([[5.0, 1], [20, 2], [12, 9]]), ("inc", "edu"))
    r = compute_measures(data, specs, k=0.5)
    # Person 1: gaps 0.5 and 0.8; person 2: only edu (0.6).
    assert r.af is not None
    assert r.af.M1 == pytest.approx((0.5 * 0.5 + 0.5 * 0.8 + 0.5 * 0.6) / 3)
    assert r.af.M0 == pytest.approx(r.M0)
