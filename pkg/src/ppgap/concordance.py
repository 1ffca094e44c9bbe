"""Rank concordance between positional depth and the normalized AF gap.

Pearson and Spearman use survey weights; Kendall's tau-b is unweighted.
Only point estimates are produced: design-based standard errors need
replicate weights, which are not part of the input.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Context
from typing import Sequence

import numpy as np

from ._summation import exact_sum
from .identification import DeprivationProfile
from .indicators import IndicatorSpec
from .measures import af_block, positional_gap


class ConcordanceError(ValueError):
    pass


def weighted_fractional_ranks(x, weights=None) -> np.ndarray:
    """Cumulative-weight midpoint ranks in (0, 1).

    A tie group spanning cumulative weights (a, b] gets rank (a + b) / 2 / W.
    With unit weights this is (average rank - 1/2) / n.
    """
    x = np.asarray(x, dtype=float)
    w = np.ones_like(x) if weights is None else np.asarray(weights, dtype=float)
    order = np.argsort(x, kind="stable")
    xs, ws = x[order], w[order]
    _, starts, counts = np.unique(xs, return_index=True, return_counts=True)
    total = exact_sum(ws)
    ranks = np.empty_like(x)
    before = 0.0
    for start, count in zip(starts, counts):
        span = exact_sum(ws[start:start + count])
        ranks[order[start:start + count]] = (before + span / 2.0) / total
        before += span
    return ranks


def weighted_pearson(x, y, weights=None) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    w = np.ones_like(x) if weights is None else np.asarray(weights, dtype=float)
    total = exact_sum(w)
    dx = x - exact_sum(w * x) / total
    dy = y - exact_sum(w * y) / total
    sxx, syy = exact_sum(w * dx * dx), exact_sum(w * dy * dy)
    if sxx <= 0 or syy <= 0:
        raise ConcordanceError("zero variance: correlation undefined")
    # Identical (or mirrored) centred vectors: the ratio below can miss +-1 by an ulp.
    if np.array_equal(dx, dy):
        return 1.0
    if np.array_equal(dx, -dy):
        return -1.0
    r = exact_sum(w * dx * dy) / np.sqrt(sxx * syy)
    return float(np.clip(r, -1.0, 1.0))


def weighted_spearman(x, y, weights=None) -> float:
    return weighted_pearson(weighted_fractional_ranks(x, weights),
                            weighted_fractional_ranks(y, weights), weights)


def _tied_pairs(*keys) -> int:
    """Number of pairs that agree on every key."""
    _, counts = np.unique(np.column_stack(keys), axis=0, return_counts=True)
    return int((counts * (counts - 1) // 2).sum())


def _strict_inversions(seq: np.ndarray) -> int:
    """Pairs i < j with seq[i] > seq[j], by a Fenwick tree over dense ranks."""
    _, dense = np.unique(seq, return_inverse=True)
    size = int(dense.max()) + 1
    tree = [0] * (size + 1)
    inv = 0
    for seen, r in enumerate(dense.tolist()):
        # Elements so far that are <= r; the rest are strictly greater.
        i, le = r + 1, 0
        while i > 0:
            le += tree[i]
            i -= i & -i
        inv += seen - le
        i = r + 1
        while i <= size:
            tree[i] += 1
            i += i & -i
    return inv


def tau_b_counts(x, y) -> tuple[int, int, int]:
    """Exact ``(concordant - discordant, pairs untied in x, pairs untied in y)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ConcordanceError("x and y must be equal-length vectors")
    n = x.size
    total = n * (n - 1) // 2
    x_ties, y_ties, both = _tied_pairs(x), _tied_pairs(y), _tied_pairs(x, y)
    order = np.lexsort((y, x))
    discordant = _strict_inversions(y[order])
    untied = total - x_ties - y_ties + both
    return untied - 2 * discordant, total - x_ties, total - y_ties


_DECIMAL = Context(prec=60)


def kendall_tau_b(x, y) -> float:
    """Kendall's tau-b from exact pair counts, rounded once at the end."""
    diff, nx, ny = tau_b_counts(x, y)
    if nx == 0 or ny == 0:
        raise ConcordanceError("tau-b undefined (a constant variable)")
    # 60 significant digits, then one rounding to binary64.
    ctx = _DECIMAL
    return float(ctx.divide(ctx.create_decimal(diff), ctx.sqrt(ctx.create_decimal(nx * ny))))


def binned_differences(diff, weights=None, width: float = 0.05) -> list[dict]:
    """Weighted histogram of rank differences, bins centred on multiples of ``width``."""
    diff = np.asarray(diff, dtype=float)
    w = np.ones_like(diff) if weights is None else np.asarray(weights, dtype=float)
    n_half = 1.0 / width
    if width <= 0 or abs(n_half - round(n_half)) > 1e-9:
        raise ValueError("bin width must divide 1 evenly")
    n_half = int(round(n_half))
    idx = np.clip(np.rint(diff / width).astype(int), -n_half, n_half)
    total = exact_sum(w)
    rows = []
    for b in range(-n_half, n_half + 1):
        # Integer ratios keep the bin edges free of accumulated float noise.
        rows.append(dict(center=b / n_half, lower=(2 * b - 1) / (2 * n_half),
                         upper=(2 * b + 1) / (2 * n_half), share=exact_sum(w[idx == b]) / total))
    return rows


@dataclass(frozen=True, eq=False)
class ConcordanceReport:
    n_poor: int
    pearson: float
    spearman: float
    kendall_tau_b: float
    S_i: np.ndarray
    G_i: np.ndarray
    weights: np.ndarray
    rank_S: np.ndarray
    rank_G: np.ndarray
    rank_diff: np.ndarray
    histogram: tuple
    mean_diff: float
    share_equal_rank: float
    standard_errors: str = "unavailable: point estimates only"

    def summary(self) -> dict:
        return dict(n_poor=self.n_poor, pearson=self.pearson, spearman=self.spearman,
                    kendall_tau_b=self.kendall_tau_b, mean_rank_diff=self.mean_diff,
                    share_equal_rank=self.share_equal_rank,
                    standard_errors=self.standard_errors)

    def scatter(self) -> list[dict]:
        return [dict(rank_S=a, rank_G=b, S_i=s, G_i=g, weight=w)
                for a, b, s, g, w in zip(self.rank_S, self.rank_G, self.S_i, self.G_i,
                                         self.weights)]


def concordance_from_scores(s_i, g_i, weights=None, bin_width: float = 0.05) -> ConcordanceReport:
    s_i = np.asarray(s_i, dtype=float)
    g_i = np.asarray(g_i, dtype=float)
    w = np.ones_like(s_i) if weights is None else np.asarray(weights, dtype=float)
    if s_i.size < 2:
        raise ConcordanceError("need at least two poor persons")
    pearson = weighted_pearson(s_i, g_i, w)
    r_s = weighted_fractional_ranks(s_i, w)
    r_g = weighted_fractional_ranks(g_i, w)
    spearman = weighted_pearson(r_s, r_g, w)
    tau = kendall_tau_b(s_i, g_i)
    diff = r_s - r_g
    total = exact_sum(w)
    return ConcordanceReport(
        n_poor=int(s_i.size), pearson=pearson, spearman=spearman, kendall_tau_b=tau,
        S_i=s_i, G_i=g_i, weights=w, rank_S=r_s, rank_G=r_g, rank_diff=diff,
        histogram=tuple(binned_differences(diff, w, bin_width)),
        mean_diff=exact_sum(w * diff) / total,
        share_equal_rank=exact_sum(w[diff == 0.0]) / total)


def rank_concordance(profile: DeprivationProfile, specs: Sequence[IndicatorSpec],
                     bin_width: float = 0.05) -> ConcordanceReport:
    """Compare S_i with the normalized AF gap G_i among the poor."""
    block = af_block(profile, specs)
    s_i, _ = positional_gap(profile)
    poor = profile.rho
    return concordance_from_scores(s_i[poor], block.G_i[poor], profile.survey_weight[poor],
                                   bin_width)


def intensity_depth_scatter(profile: DeprivationProfile) -> tuple[list[dict], list[dict]]:
    """Per-person (A_i, S_i) points for the poor, plus weighted mean S_i per A_i level."""
    s_i, _ = positional_gap(profile)
    poor = np.flatnonzero(profile.rho)
    a = profile.c[poor]
    s = s_i[poor]
    w = profile.survey_weight[poor]
    points = [dict(person=int(i), A_i=float(ai), S_i=float(si), weight=float(wi))
              for i, ai, si, wi in zip(poor, a, s, w)]
    means = []
    for level in np.unique(a):
        m = a == level
        means.append(dict(A_i=float(level), mean_S_i=exact_sum(w[m] * s[m]) / exact_sum(w[m]),
                          weight=exact_sum(w[m]), n=int(m.sum())))
    return points, means
