"""Counting poverty measures with positional depth scores for ordinal indicators.

The engine follows the usual dual-cutoff pipeline (deprivation cutoffs z,
poverty cutoff k) and replaces cardinal normalized gaps with depth scores
read off weighted empirical CDFs, so ordinal indicators get a meaningful
depth component.
"""

from .concordance import (ConcordanceError, ConcordanceReport, intensity_depth_scatter,
                          kendall_tau_b, rank_concordance, weighted_fractional_ranks,
                          weighted_pearson, weighted_spearman)
from .decomposition import (DecompositionReport, InconsistentReferenceError,
                            decompose_by_subgroup, dominance_curve, indicator_contributions)
from .identification import (DeprivationProfile, build_profile, censor, deprivation_matrix,
                             deprivation_score, identify, intersection_k, resolve_k, union_k)
from .indicators import (Dataset, IndicatorSpec, IngestionError, SpecDocument, SpecError,
                         encode_dataset, load_dataset, load_spec, normalize_weights,
                         ordinal_specs, parse_spec, parse_spec_document)
from .measures import (AFUnavailableError, MeasureReport, adjusted_index, af_block,
                       compute_measures, headcount, intensity, positional_gap)
from .reference import (ReferenceDistribution, ReferenceDistributionError, cdf_value,
                        fit_reference, load_reference, positional_depth_score, save_reference)

__version__ = "0.1.0"

__all__ = [
    "AFUnavailableError", "ConcordanceError", "ConcordanceReport", "Dataset",
    "DecompositionReport", "DeprivationProfile", "InconsistentReferenceError", "IndicatorSpec",
    "IngestionError", "MeasureReport", "ReferenceDistribution", "ReferenceDistributionError",
    "SpecDocument", "SpecError", "adjusted_index", "af_block", "build_profile", "cdf_value",
    "censor", "compute_measures", "decompose_by_subgroup", "deprivation_matrix",
    "deprivation_score", "dominance_curve", "encode_dataset", "fit_reference", "headcount",
    "identify", "indicator_contributions", "intensity", "intensity_depth_scatter",
    "intersection_k", "kendall_tau_b", "load_dataset", "load_reference", "load_spec",
    "normalize_weights", "ordinal_specs", "parse_spec", "parse_spec_document",
    "positional_depth_score", "positional_gap", "rank_concordance", "resolve_k",
    "save_reference", "union_k", "weighted_fractional_ranks", "weighted_pearson",
    "weighted_spearman",
]
