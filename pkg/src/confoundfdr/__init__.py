"""Multiple hypothesis testing when the theoretical null may be confounded.

Provides per-gene testing, pi0/q-value estimation with BH rejection,
mean-shift sensitivity analysis, empirical-null fitting with local fdr,
James-Stein double-shrinkage association estimates with bootstrap confidence
intervals, and a known-truth mixture simulator for validation.
"""

from .empirical_null import (
    DensityEstimate,
    EmpiricalNull,
    estimate_marginal_density,
    fit_empirical_null,
    local_fdr,
    null_scale_from_known_nulls,
    stratified_tests,
)
from .fdr import (
    DEFAULT_LAMBDA_GRID,
    Pi0Estimate,
    QValueSet,
    RejectionSet,
    bh_procedure,
    estimate_pi0,
    qvalues,
)
from .sensitivity import SensitivityParams, SensitivityRow, adjust_results, sensitivity_sweep
from .shrinkage import CiTable, ShrinkageResult, bootstrap_cis, double_shrink, top_k_report
from .simulation import SimConfig, SimulatedData, confusion_counts, empirical_fdr, simulate
from .stats_core import (
    ExpressionMatrix,
    TestResult,
    normal_two_sided_p,
    unpooled_t_tests,
    variance_filter,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_LAMBDA_GRID",
    "CiTable",
    "DensityEstimate",
    "EmpiricalNull",
    "ExpressionMatrix",
    "Pi0Estimate",
    "QValueSet",
    "RejectionSet",
    "SensitivityParams",
    "SensitivityRow",
    "ShrinkageResult",
    "SimConfig",
    "SimulatedData",
    "TestResult",
    "adjust_results",
    "bh_procedure",
    "bootstrap_cis",
    "confusion_counts",
    "double_shrink",
    "empirical_fdr",
    "estimate_marginal_density",
    "estimate_pi0",
    "fit_empirical_null",
    "local_fdr",
    "normal_two_sided_p",
    "null_scale_from_known_nulls",
    "qvalues",
    "sensitivity_sweep",
    "simulate",
    "stratified_tests",
    "top_k_report",
    "unpooled_t_tests",
    "variance_filter",
]
