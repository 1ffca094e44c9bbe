"""Order-independent summation.

Aggregates go through these helpers so that results do not depend on row
order, and a replicated sample reproduces the original bit for bit.
"""

from __future__ import annotations

import math

import numpy as np

# Above this many (boundary x element) operations, prefix sums switch from
# repeated fsum calls to a single running Shewchuk expansion.
_PREFIX_FSUM_BUDGET = 1 << 22


def exact_sum(values) -> float:
    """Correctly rounded sum of ``values`` (independent of their order)."""
    return math.fsum(np.asarray(values, dtype=float).ravel().tolist())


def exact_prefix_sums(values, ends) -> np.ndarray:
    """Correctly rounded sums of ``values[:e]`` for every ``e`` in ``ends``.

    ``ends`` must be nondecreasing. Each output equals
    ``math.fsum(values[:e])`` exactly; only the cost differs between the two
    code paths.
    """
    vals = np.asarray(values, dtype=float).tolist()
    ends = [int(e) for e in ends]
    if len(vals) * len(ends) <= _PREFIX_FSUM_BUDGET:
        return np.array([math.fsum(vals[:e]) for e in ends], dtype=float)

    partials: list[float] = []
    out = []
    pos = 0
    for end in ends:
        for x in vals[pos:end]:
            i = 0
            for y in partials:
                if abs(x) < abs(y):
                    x, y = y, x
                hi = x + y
                lo = y - (hi - x)
                if lo:
                    partials[i] = lo
                    i += 1
                x = hi
            partials[i:] = [x]
        pos = end
        out.append(math.fsum(partials))
    return np.array(out, dtype=float)


def row_sums(matrix) -> np.ndarray:
    """Per-row sums that do not depend on column order.

    Rows are sorted before reduction, so permuting columns gives identical
    bits. Used for c_i and P_i, where indicator relabeling must not move a
    person across the poverty cutoff.
    """
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2:
        raise ValueError("row_sums expects a 2-d array")
    if m.shape[1] == 0:
        return np.zeros(m.shape[0])
    return np.sort(m, axis=1).sum(axis=1)


def weighted_mean(values, weights) -> float:
    total = exact_sum(weights)
    if total <= 0:
        raise ValueError("weights must have a positive total")
    v = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float)
    return exact_sum(v * w) / total
