import numpy as np
import pytest

from ppgap import build_profile, deprivation_matrix, deprivation_score, identify, resolve_k
from ppgap.identification import classify_k, union_k


def test_deprivation_is_strict():
    g0 = deprivation_matrix(np.array([[0.0], [1], [2], [3]]), np.array([2.0]))
    assert g0[:, 0].tolist() == [1, 1, 0, 0]
    assert deprivation_matrix(np.array([[5.0], [6]]), np.array([5.0]))[:, 0].tolist() == [0, 0]


def test_example_e_scores_and_identification(example_e):
    data, specs = example_e
    p = build_profile(data, specs, k=0.5)
    assert p.c.tolist() == [1.0, 1.0, 0.5, 0.0]
    assert p.rho.tolist() == [True, True, True, False]
    assert p.q == 3
    np.testing.assert_array_equal(p.g1_censored, [[1, 1], [2 / 3, 1], [0, 1], [0, 0]])
    p1 = build_profile(data, specs, k=1.0)
    assert p1.rho.tolist() == [True, True, False, False]


def test_extreme_scores():
    w = np.array([0.3, 0.7])
    assert deprivation_score(np.array([[0, 0], [1, 1]]), w).tolist() == [0.0, 1.0]


def test_named_rules():
    w = np.array([0.25, 0.75])
    assert resolve_k("union", w) == union_k(w) == 0.25
    assert resolve_k("intersection", w) == 1.0
    assert classify_k(0.5, w) == "intermediate"
    with pytest.raises(ValueError):
        resolve_k(0.0, w)
    with pytest.raises(ValueError):
        resolve_k(1.2, w)


def test_identify_boundary():
    c = np.array([0.5, 0.5 - 1e-15, 0.49])
    assert identify(c, 0.5).tolist() == [True, True, False]


def test_non_poor_cells_censored(example_e):
    data, specs = example_e
    p = build_profile(data, specs, k=1.0)
    # p3 is deprived in x2 but not poor at k = 1.
    assert p.g0[2, 1] == 1 and p.g0_censored[2, 1] == 0 and p.g1_censored[2, 1] == 0


def test_scores_do_not_depend_on_cutoffs(example_e):
    data, specs = example_e
    from ppgap import ordinal_specs
    alt = ordinal_specs([4, 2], [3, 1])
    a = build_profile(data, specs, k=0.5)
    b = build_profile(data, alt, k=0.5)
    assert np.array_equal(a.s, b.s)
