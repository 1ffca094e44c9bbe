"""Subgroup decomposition, indicator contributions and dominance curves.

Decomposition is exact only when every subgroup is scored against one
common reference; per-subgroup in-sample references break the identity and
must be requested explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._summation import exact_sum
from .identification import DeprivationProfile, build_profile, resolve_k
from .indicators import Dataset, IndicatorSpec, weight_vector
from .measures import MeasureReport, compute_measures, report_from_profile
from .reference import ReferenceDistribution, fit_reference


class InconsistentReferenceError(ValueError):
    """Per-subgroup references requested without opting in."""


@dataclass(frozen=True)
class SubgroupRow:
    label: str
    weight: float
    population_share: float
    H: float
    A: float
    S: float
    HA: float
    P: float
    contribution: float
    n: int


@dataclass(frozen=True, eq=False)
class DecompositionReport:
    k: float
    rows: tuple[SubgroupRow, ...]
    total: MeasureReport
    reconstruction: float
    residual: float
    shared_reference: bool

    @property
    def P(self) -> float:
        return self.total.P

    def table(self) -> list[dict]:
        out = [dict(subgroup=r.label, k=self.k, n=r.n, weight=r.weight,
                    population_share=r.population_share, H=r.H, A=r.A, S=r.S, HA=r.HA,
                    P=r.P, contribution=r.contribution) for r in self.rows]
        t = self.total
        out.append(dict(subgroup="ALL", k=self.k, n=t.n, weight=t.total_weight,
                        population_share=1.0, H=t.H, A=t.A, S=t.S, HA=t.HA, P=t.P,
                        contribution=1.0 if t.P > 0 else 0.0))
        return out


def _labels(data: Dataset, groups) -> np.ndarray:
    labels = data.subgroup if groups is None else np.asarray(groups, dtype=object)
    if labels is None:
        raise ValueError("no subgroup labels: declare a subgroup column or pass groups")
    if labels.shape != (data.n,):
        raise ValueError("one subgroup label per row is required")
    if any(lab is None or str(lab) == "" for lab in labels):
        raise ValueError("missing subgroup labels")
    return np.array([str(lab) for lab in labels], dtype=object)


def decompose_by_subgroup(data: Dataset, specs: Sequence[IndicatorSpec],
                          ref: ReferenceDistribution | None = None, k=0.5,
                          groups=None, per_subgroup_reference: bool = False,
                          allow_inconsistent: bool = False) -> DecompositionReport:
    """Break P into population-share weighted subgroup indices.

    With a shared reference (the default: one reference fitted on the whole
    of ``data`` when ``ref`` is omitted) the reconstruction
    ``sum(W_l / W * P_l)`` equals P up to rounding and ``residual`` reports
    the difference.
    """
    labels = _labels(data, groups)
    if per_subgroup_reference and not allow_inconsistent:
        raise InconsistentReferenceError(
            "per-subgroup references do not decompose; pass allow_inconsistent=True to proceed")
    if ref is None:
        ref = fit_reference(data, specs, mode="in_sample")
    total = compute_measures(data, specs, ref, k)
    W = data.total_weight
    rows = []
    parts = []
    for lab in sorted(set(labels)):
        mask = labels == lab
        if not mask.any():
            raise ValueError(f"empty subgroup {lab!r}")
        sub = data.subset(np.flatnonzero(mask))
        sub_ref = fit_reference(sub, specs, mode="in_sample") if per_subgroup_reference else ref
        rep = compute_measures(sub, specs, sub_ref, k)
        share = sub.total_weight / W
        parts.append(share * rep.P)
        rows.append(SubgroupRow(
            label=lab, weight=sub.total_weight, population_share=share, H=rep.H, A=rep.A,
            S=rep.S, HA=rep.HA, P=rep.P,
            contribution=share * rep.P / total.P if total.P > 0 else 0.0, n=sub.n))
    recon = exact_sum(parts)
    return DecompositionReport(k=total.k, rows=tuple(rows), total=total, reconstruction=recon,
                               residual=recon - total.P,
                               shared_reference=not per_subgroup_reference)


def indicator_contributions(profile: DeprivationProfile, weights=None) -> np.ndarray:
    """Share of P coming from each indicator."""
    w = profile.weights if weights is None else (
        weight_vector(weights) if isinstance(weights[0], IndicatorSpec) else np.asarray(weights))
    sw = profile.survey_weight
    parts = np.array([exact_sum(sw * w[j] * profile.g1_censored[:, j])
                      for j in range(profile.g1_censored.shape[1])])
    total = exact_sum(parts)
    if total <= 0:
        raise ValueError("P is zero: indicator contributions are undefined")
    return parts / total


def dominance_curve(data: Dataset, specs: Sequence[IndicatorSpec],
                    ref: ReferenceDistribution | None = None, k_grid=(0.25, 0.5, 0.75, 1.0),
                    groups=None) -> list[dict]:
    """Long-format (subgroup, k) table of H, H*A and P for plotting."""
    if len(k_grid) == 0:
        raise ValueError("empty k grid")
    w = weight_vector(specs)
    ks = [resolve_k(k, w) for k in k_grid]
    if any(b < a for a, b in zip(ks, ks[1:])):
        raise ValueError("k grid must be ascending")
    if ref is None:
        ref = fit_reference(data, specs, mode="in_sample")
    subsets = [("ALL", data)]
    if groups is not None or data.subgroup is not None:
        labels = _labels(data, groups)
        subsets += [(lab, data.subset(np.flatnonzero(labels == lab)))
                    for lab in sorted(set(labels))]
    rows = []
    for lab, sub in subsets:
        for k in ks:
            rep = report_from_profile(build_profile(sub, specs, ref, k), specs, af=False)
            rows.append(dict(subgroup=lab, k=k, H=rep.H, HA=rep.HA, A=rep.A, S=rep.S, P=rep.P))
    return rows
