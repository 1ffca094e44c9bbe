import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from ppgap._summation import exact_prefix_sums, exact_sum, row_sums, weighted_mean
import ppgap._summation as summation

floats = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


@settings(max_examples=200, deadline=None)
@given(st.lists(floats, max_size=40), st.randoms())
def test_sum_is_order_independent(xs, rnd):
    ys = list(xs)
    rnd.shuffle(ys)
    assert exact_sum(xs) == exact_sum(ys) == math.fsum(xs)


@settings(max_examples=100, deadline=None)
@given(st.lists(floats, min_size=1, max_size=40))
def test_prefix_paths_agree(xs):
    ends = list(range(len(xs) + 1))
    fast = exact_prefix_sums(xs, ends)
    assert fast.tolist() == [math.fsum(xs[:e]) for e in ends]


def test_running_expansion_path(monkeypatch):
    rng = np.random.default_rng(0)
    xs = rng.normal(size=300) * 10.0 ** rng.integers(-8, 8, 300)
    ends = list(range(0, 301, 7))
    monkeypatch.setattr(summation, "_PREFIX_FSUM_BUDGET", 0)
    assert exact_prefix_sums(xs, ends).tolist() == [math.fsum(xs[:e]) for e in ends]


def test_row_sums_ignore_column_order():
    rng = np.random.default_rng(1)
    m = rng.uniform(size=(50, 6))
    perm = rng.permutation(6)
    assert np.array_equal(row_sums(m), row_sums(m[:, perm]))


def test_weighted_mean():
    assert weighted_mean([1.0, 3.0], [1.0, 3.0]) == 2.5
