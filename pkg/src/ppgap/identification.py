"""Deprivation statuses, poverty identification and censoring."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from ._summation import exact_sum, row_sums
from .indicators import ORDINAL, Dataset, IndicatorSpec, thresholds, weight_vector
from .reference import ReferenceDistribution, ReferenceDistributionError, fit_reference

# Normalized weights need not add to exactly 1.0 in floating point (three
# weights of 1/3, say), so c_i >= k is tested with this slack.
K_TOLERANCE = 1e-12


def union_k(weights) -> float:
    return float(np.min(np.asarray(weights, dtype=float)))


def intersection_k(weights=None) -> float:
    return 1.0


def resolve_k(k, weights) -> float:
    """Turn ``'union'``, ``'intersection'`` or a number into a validated k."""
    if isinstance(k, str):
        rule = k.strip().lower()
        if rule == "union":
            return union_k(weights)
        if rule == "intersection":
            return intersection_k(weights)
        try:
            k = float(rule)
        except ValueError:
            raise ValueError(f"unknown poverty cutoff {k!r}") from None
    k = float(k)
    if not 0.0 < k <= 1.0:
        raise ValueError(f"poverty cutoff k must lie in (0, 1], got {k}")
    return k


def classify_k(k: float, weights) -> str:
    if k <= union_k(weights) + K_TOLERANCE:
        return "union"
    if k >= 1.0 - K_TOLERANCE:
        return "intersection"
    return "intermediate"


def deprivation_matrix(data, specs) -> np.ndarray:
    """g0_ij = 1 if x_ij < z_j (strict), else 0."""
    values = data.values if isinstance(data, Dataset) else np.asarray(data, dtype=float)
    z = thresholds(specs) if _is_spec_list(specs) else np.asarray(specs, dtype=float)
    return (values < z).astype(float)


def deprivation_score(g0, weights) -> np.ndarray:
    """c_i = sum_j w_j g0_ij."""
    w = weight_vector(weights) if _is_spec_list(weights) else np.asarray(weights, dtype=float)
    return row_sums(np.asarray(g0, dtype=float) * w)


def identify(c, k) -> np.ndarray:
    """Poverty status rho_i = 1{c_i >= k}."""
    k = float(k)
    if not 0.0 < k <= 1.0:
        raise ValueError(f"poverty cutoff k must lie in (0, 1], got {k}")
    return np.asarray(c, dtype=float) >= k - K_TOLERANCE


def censor(g, rho) -> np.ndarray:
    """Zero the rows of the non-poor."""
    return np.asarray(g, dtype=float) * np.asarray(rho, dtype=float)[:, None]


def censored_scores(g0, s) -> np.ndarray:
    """g1_ij = g0_ij * s_ij: depth only where the cell is deprived."""
    return np.asarray(g0, dtype=float) * np.asarray(s, dtype=float)


def _is_spec_list(obj) -> bool:
    return isinstance(obj, (list, tuple)) and bool(obj) and isinstance(obj[0], IndicatorSpec)


@dataclass(frozen=True, eq=False)
class DeprivationProfile:
    """Everything the measures need for one (data, reference, k) triple."""

    names: tuple[str, ...]
    values: np.ndarray
    thresholds: np.ndarray
    weights: np.ndarray
    survey_weight: np.ndarray
    k: float
    g0: np.ndarray
    c: np.ndarray
    rho: np.ndarray
    g0_censored: np.ndarray
    s: np.ndarray
    g1: np.ndarray
    g1_censored: np.ndarray
    diagnostics: tuple[str, ...] = ()

    @cached_property
    def total_weight(self) -> float:
        return exact_sum(self.survey_weight)

    @cached_property
    def q(self) -> float:
        """Weighted number of poor."""
        return exact_sum(self.survey_weight[self.rho])

    @property
    def n_poor(self) -> int:
        return int(np.count_nonzero(self.rho))


def build_profile(data: Dataset, specs: Sequence[IndicatorSpec],
                  ref: ReferenceDistribution | None = None, k=0.5) -> DeprivationProfile:
    """Compute g0, c, rho, depth scores and their censored versions.

    Depth scores are computed on the full, uncensored matrix and only then
    masked, so moving z_j changes which cells survive but never their values.
    Without ``ref`` an in-sample reference is fitted on ``data``.
    """
    names = tuple(s.name for s in specs)
    if names == data.names:
        values = data.values
    else:
        values = data.values[:, [data.column_index(n) for n in names]]
    w = weight_vector(specs)
    z = thresholds(specs)
    k = resolve_k(k, w)
    if ref is None:
        ref = fit_reference(data, specs, mode="in_sample", provenance=False)
    elif not ref.covers(names):
        missing = [n for n in names if n not in ref.names]
        raise ReferenceDistributionError(f"reference does not cover indicators {missing}")

    g0 = deprivation_matrix(values, z)
    c = deprivation_score(g0, w)
    rho = identify(c, k)
    s = ref.score_matrix(values, names)
    g1 = censored_scores(g0, s)

    notes = []
    for spec in specs:
        if spec.is_binary:
            notes.append(f"{spec.name}: binary indicator, depth of every deprivation is 1")
    for name in ref.degenerate:
        if name in names:
            notes.append(f"{name}: degenerate reference column (D=0)")
    if (all(sp.kind == ORDINAL and sp.threshold == sp.scale_size - 1 for sp in specs)
            and classify_k(k, w) == "union"):
        notes.append("cutoffs at scale maxima with union identification: intensity is not "
                     "meaningful in this configuration")

    return DeprivationProfile(
        names=names, values=values, thresholds=z, weights=w,
        survey_weight=data.survey_weight, k=k, g0=g0, c=c, rho=rho,
        g0_censored=censor(g0, rho), s=s, g1=g1, g1_censored=censor(g1, rho),
        diagnostics=tuple(notes))
