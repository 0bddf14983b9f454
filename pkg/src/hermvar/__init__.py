"""Numerical laboratory for Hermite power variations of fractional Brownian
motion across the three Hurst regimes around the threshold H = 1 - 1/(2q)."""

from .distances import RateFit, SampleSet, coupled_l2, ks_distance, ks_distance_two_sample, rate_fit, wasserstein1
from .fgn import (
    FactorizationError,
    FgnPath,
    Hurst,
    Seed,
    aggregate,
    covariance_matrix,
    increment_cov,
    rho,
    sample_fgn,
    sample_fgn_batch,
)
from .hermite import hermite_eval, hermite_transform
from .kernel_norms import (
    BracketTerm,
    DiscrepancyReport,
    bracket,
    bracket_table,
    cross_gram,
    discrepancy,
    fn_norm_sq,
    inner_uv,
    middle_term,
    third_term,
    tv_rate_curve,
)
from .malliavin_bound import BoundEstimate, CriticalSpec, berry_estimate, ds_norm_sq, one_minus_a_top, variance_sn
from .variations import (
    Regime,
    RegimeSpec,
    Statistic,
    normalize,
    sample_zn,
    sigma_critical,
    sigma_subcritical,
    statistic,
    v_n,
    variance_zn_exact,
)

__version__ = "0.1.0"

__all__ = [
    "BoundEstimate",
    "BracketTerm",
    "CriticalSpec",
    "DiscrepancyReport",
    "FactorizationError",
    "FgnPath",
    "Hurst",
    "RateFit",
    "Regime",
    "RegimeSpec",
    "SampleSet",
    "Seed",
    "Statistic",
    "aggregate",
    "berry_estimate",
    "bracket",
    "bracket_table",
    "coupled_l2",
    "covariance_matrix",
    "cross_gram",
    "discrepancy",
    "ds_norm_sq",
    "fn_norm_sq",
    "hermite_eval",
    "hermite_transform",
    "increment_cov",
    "inner_uv",
    "ks_distance",
    "ks_distance_two_sample",
    "middle_term",
    "normalize",
    "one_minus_a_top",
    "rate_fit",
    "rho",
    "sample_fgn",
    "sample_fgn_batch",
    "sample_zn",
    "sigma_critical",
    "sigma_subcritical",
    "statistic",
    "third_term",
    "tv_rate_curve",
    "v_n",
    "variance_sn",
    "variance_zn_exact",
    "wasserstein1",
]
