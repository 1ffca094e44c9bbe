"""Headcount, intensity, positional gap and the adjusted index.

All aggregates are survey-weighted; unweighted data is the case of unit
weights. With q = 0 poor, A, S and P are 0 by convention.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._summation import exact_sum, row_sums
from .identification import DeprivationProfile, build_profile, classify_k
from .indicators import CARDINAL, Dataset, IndicatorSpec
from .reference import ReferenceDistribution


class AFUnavailableError(ValueError):
    """The normalized-gap comparison needs cardinal indicators with z != 0."""


def _ratio(num: float, den: float) -> float:
    return num / den if den > 0 else 0.0


def headcount(profile: DeprivationProfile) -> float:
    return profile.q / profile.total_weight


def intensity(profile: DeprivationProfile):
    """Return ``(A_i, A)``: censored deprivation shares and their mean among the poor."""
    a_i = np.where(profile.rho, profile.c, 0.0)
    a = _ratio(exact_sum(profile.survey_weight * a_i), profile.q)
    return a_i, a


def _individual_degrees(profile: DeprivationProfile) -> np.ndarray:
    return row_sums(profile.weights * profile.g1_censored)


def positional_gap(profile: DeprivationProfile):
    """Return ``(S_i, S)``.

    S_i is the weighted mean depth of i's censored deprivations (0 for the
    non-poor); S pools every censored deprivation of the poor.
    """
    a_i, _ = intensity(profile)
    p_i = _individual_degrees(profile)
    s_i = np.divide(p_i, a_i, out=np.zeros_like(p_i), where=a_i > 0)
    sw = profile.survey_weight
    s = _ratio(exact_sum(sw * p_i), exact_sum(sw * a_i))
    return s_i, s


def adjusted_index(profile: DeprivationProfile, alpha: float = 1.0):
    """Return ``(P_i, P, P_alpha)``.

    ``P_alpha`` raises each censored depth score to ``alpha`` before
    aggregation; for ``alpha == 1`` it is P itself.
    """
    alpha = float(alpha)
    if not alpha >= 1.0:
        raise ValueError(f"alpha must be >= 1, got {alpha}")
    p_i = _individual_degrees(profile)
    total = profile.total_weight
    sw = profile.survey_weight
    p = exact_sum(sw * p_i) / total
    if alpha == 1.0:
        return p_i, p, p
    powered = row_sums(profile.weights * profile.g1_censored ** alpha)
    return p_i, p, exact_sum(sw * powered) / total


@dataclass(frozen=True, eq=False)
class AFBlock:
    """Normalized-gap comparison block for all-cardinal indicator sets."""

    gaps: np.ndarray
    G_i: np.ndarray
    G: float
    M0: float
    M1: float


def normalized_gaps(values, thresholds) -> np.ndarray:
    """(z - x)/|z| on the internal scale, clamped to [0, 1]."""
    z = np.asarray(thresholds, dtype=float)
    return np.clip((z - np.asarray(values, dtype=float)) / np.abs(z), 0.0, 1.0)


def af_block(profile: DeprivationProfile, specs: Sequence[IndicatorSpec]) -> AFBlock:
    bad = [s.name for s in specs if s.kind != CARDINAL]
    if bad:
        raise AFUnavailableError(f"normalized gaps are undefined for ordinal indicators {bad}")
    zero = [s.name for s in specs if s.threshold == 0.0]
    if zero:
        raise AFUnavailableError(f"normalized gaps need a nonzero cutoff: {zero}")
    gaps = normalized_gaps(profile.values, profile.thresholds) * profile.g0_censored
    a_i, _ = intensity(profile)
    gap_rows = row_sums(profile.weights * gaps)
    g_i = np.divide(gap_rows, a_i, out=np.zeros_like(gap_rows), where=a_i > 0)
    sw = profile.survey_weight
    total = profile.total_weight
    return AFBlock(
        gaps=gaps, G_i=g_i,
        G=_ratio(exact_sum(sw * gap_rows), exact_sum(sw * a_i)),
        M0=exact_sum(sw * a_i) / total,
        M1=exact_sum(sw * gap_rows) / total)


def af_available(specs: Sequence[IndicatorSpec]) -> bool:
    return all(s.kind == CARDINAL and s.threshold != 0.0 for s in specs)


@dataclass(frozen=True, eq=False)
class MeasureReport:
    k: float
    alpha: float
    H: float
    A: float
    S: float
    P: float
    P_alpha: float
    M0: float
    A_i: np.ndarray
    S_i: np.ndarray
    P_i: np.ndarray
    identification: str = "intermediate"
    af: AFBlock | None = None
    diagnostics: tuple[str, ...] = ()
    n: int = 0
    total_weight: float = 0.0
    q: float = 0.0
    label: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def HA(self) -> float:
        return self.M0

    def row(self) -> dict:
        """Flat record for one (k, alpha) line of a results table."""
        out = {
            "dataset": self.label, "k": self.k, "identification": self.identification,
            "alpha": self.alpha, "H": self.H, "A": self.A, "S": self.S, "HA": self.M0,
            "P": self.P, "P_alpha": self.P_alpha,
            "G": self.af.G if self.af else "", "P_AF": self.af.M1 if self.af else "",
            "n": self.n, "q": self.q, "warnings": "; ".join(self.diagnostics),
        }
        return out

    def to_dict(self, individual: bool = False) -> dict:
        d = self.row()
        d["warnings"] = list(self.diagnostics)
        d["M0"] = self.M0
        d["M1"] = self.af.M1 if self.af else None
        d["G"] = self.af.G if self.af else None
        d["P_AF"] = d["M1"]
        if individual:
            d["A_i"] = self.A_i.tolist()
            d["S_i"] = self.S_i.tolist()
            d["P_i"] = self.P_i.tolist()
        return d


def report_from_profile(profile: DeprivationProfile, specs: Sequence[IndicatorSpec],
                        alpha: float = 1.0, af: bool | None = None,
                        label: str = "") -> MeasureReport:
    a_i, a = intensity(profile)
    s_i, s = positional_gap(profile)
    p_i, p, p_alpha = adjusted_index(profile, alpha)
    h = headcount(profile)
    block = None
    if af is None:
        af = af_available(specs)
    if af:
        block = af_block(profile, specs)
    notes = list(profile.diagnostics)
    if profile.n_poor == 0:
        notes.append("no poor at this k: A, S and P set to 0")
    sw = profile.survey_weight
    return MeasureReport(
        k=profile.k, alpha=float(alpha), H=h, A=a, S=s, P=p, P_alpha=p_alpha,
        M0=exact_sum(sw * a_i) / profile.total_weight,
        A_i=a_i, S_i=s_i, P_i=p_i,
        identification=classify_k(profile.k, profile.weights),
        af=block, diagnostics=tuple(notes), n=len(sw),
        total_weight=profile.total_weight, q=profile.q, label=label)


def compute_measures(data: Dataset, specs: Sequence[IndicatorSpec],
                     ref: ReferenceDistribution | None = None, k=0.5,
                     alpha: float = 1.0, af: bool | None = None) -> MeasureReport:
    """Full measure stack for one dataset at one poverty cutoff."""
    profile = build_profile(data, specs, ref, k)
    return report_from_profile(profile, specs, alpha=alpha, af=af, label=data.label)
