"""Stuttering (batch-arrival compound) Poisson distributions.

Exact PMFs via the batch-rate recursion plus an independent series oracle,
cumulant and moment algebra, characterization of discrete laws as
(generalized) batch-Poisson, cumulant-matching estimation on count
histograms, and Pearson-style goodness-of-fit reporting.
"""

from .characterize import (
    Classification,
    GspdExtraction,
    LawKind,
    Pmf,
    classify,
    compound_spd,
    divide,
    gspd_from_pmf,
    log_pgf_coefficients,
    nbd_as_spd,
)
from .distribution import (
    GspdParams,
    NegativeProbabilityWarning,
    SpdParams,
    central_moments,
    cumulant,
    cumulants_from_moments,
    moments_from_cumulants,
    pgf,
    pmf,
    pmf_oracle,
    sample,
    upper_tail_bound,
)
from .estimate import (
    CountHistogram,
    FitResult,
    NegativeRateWarning,
    SampleMoments,
    fit_nbd,
    fit_poisson,
    fit_spd,
    nbd_pmf,
    sample_cumulants,
    sample_moments,
    vandermonde_solve,
)
from .gof import (
    GofReport,
    chi2_quantile,
    chi2_upper_tail,
    expected_counts,
    gof_report,
    merge_bins,
    pearson_eta,
)
from .series import PowerSeries, ps_exp, ps_log, ps_mul, ps_pow

__version__ = "0.1.0"

__all__ = [
    "PowerSeries",
    "ps_mul",
    "ps_pow",
    "ps_exp",
    "ps_log",
    "SpdParams",
    "GspdParams",
    "NegativeProbabilityWarning",
    "pmf",
    "pmf_oracle",
    "pgf",
    "cumulant",
    "moments_from_cumulants",
    "cumulants_from_moments",
    "central_moments",
    "sample",
    "upper_tail_bound",
    "Pmf",
    "LawKind",
    "Classification",
    "GspdExtraction",
    "log_pgf_coefficients",
    "classify",
    "gspd_from_pmf",
    "nbd_as_spd",
    "compound_spd",
    "divide",
    "CountHistogram",
    "SampleMoments",
    "FitResult",
    "NegativeRateWarning",
    "sample_moments",
    "sample_cumulants",
    "vandermonde_solve",
    "fit_spd",
    "fit_poisson",
    "fit_nbd",
    "nbd_pmf",
    "GofReport",
    "expected_counts",
    "pearson_eta",
    "chi2_upper_tail",
    "chi2_quantile",
    "merge_bins",
    "gof_report",
]
