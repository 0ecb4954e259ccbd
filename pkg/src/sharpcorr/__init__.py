"""Rearrangement correlation and comparator dependence measures."""

__version__ = "0.1.0"

from .measures import (  # noqa: E402
    MeasureId,
    MeasureScore,
    additivity,
    chatterjee_xi,
    compute_all,
    concordance,
    distance_correlation,
    hsic,
    kendall,
    pearson,
    rearrangement_correlation,
    spearman,
)
from .sampling import PairedSample, Sample, oriented_rearranged_covariance  # noqa: E402

__all__ = [
    "MeasureId",
    "MeasureScore",
    "PairedSample",
    "Sample",
    "additivity",
    "chatterjee_xi",
    "compute_all",
    "concordance",
    "distance_correlation",
    "hsic",
    "kendall",
    "oriented_rearranged_covariance",
    "pearson",
    "rearrangement_correlation",
    "spearman",
]
