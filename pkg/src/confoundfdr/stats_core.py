"""Per-hypothesis effect estimates, Wald statistics, and p-values.

Turns a genes x samples measurement matrix with a binary phenotype into
per-gene difference-in-means estimates, unpooled (Welch-style) standard
errors, Wald statistics, and two-sided p-values against a standard normal
reference.  Includes the variance pre-filter applied before testing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DegenerateDataError, MatrixError

__all__ = [
    "ExpressionMatrix",
    "TestResult",
    "variance_filter",
    "unpooled_t_tests",
    "normal_two_sided_p",
]


@dataclass(frozen=True)
class ExpressionMatrix:
    """Measurement matrix: G genes (rows) x n samples (columns) with 0/1 labels.

    Invariants checked at construction: shape consistency, unique gene ids,
    finite values, and both phenotype classes present.
    """

    values: np.ndarray
    gene_ids: tuple[str, ...]
    labels: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        labels = np.asarray(self.labels, dtype=int)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "gene_ids", tuple(self.gene_ids))
        object.__setattr__(self, "labels", labels)
        if values.ndim != 2:
            raise MatrixError("values must be a 2-d array")
        g, n = values.shape
        if len(self.gene_ids) != g:
            raise MatrixError(f"{len(self.gene_ids)} gene ids for {g} rows")
        if labels.shape != (n,):
            raise MatrixError(f"{labels.size} labels for {n} sample columns")
        if not np.all(np.isfinite(values)):
            raise MatrixError("matrix contains non-finite values; missing data are not supported")
        if not np.all((labels == 0) | (labels == 1)):
            raise MatrixError("labels must be 0 or 1")
        if np.sum(labels == 0) == 0 or np.sum(labels == 1) == 0:
            raise MatrixError("both phenotype classes must be present")
        if len(set(self.gene_ids)) != g:
            counts: dict[str, int] = {}
            for gid in self.gene_ids:
                counts[gid] = counts.get(gid, 0) + 1
            dups = sorted(k for k, v in counts.items() if v > 1)
            raise MatrixError(f"duplicate gene ids: {', '.join(dups)}")

    @property
    def n_genes(self) -> int:
        return self.values.shape[0]

    @property
    def n_samples(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class TestResult:
    """One gene's effect estimate (class-1 mean minus class-0 mean) and test."""

    gene_id: str
    beta_star: float
    se: float
    t: float
    p: float


def normal_two_sided_p(t) -> float | np.ndarray:
    """Two-sided p-value of a Wald statistic under the standard normal.

    Computes 2*(1 - Phi(|t|)) = erfc(|t|/sqrt(2)), accurate to well below
    1e-12 absolute error.  Accepts a scalar or an array.
    """
    t = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t)):
        raise ValueError("test statistic must be finite")
    p = special.erfc(np.abs(t) / math.sqrt(2.0))
    return float(p) if p.ndim == 0 else p


def variance_filter(matrix: ExpressionMatrix, threshold: float) -> ExpressionMatrix:
    """Drop rows whose sample variance across all columns falls below threshold.

    Variance is pooled over all n samples with denominator n-1.  Rows with
    variance >= threshold are kept in their original order.
    """
    if not threshold > 0:
        raise ValueError(f"variance threshold must be positive, got {threshold}")
    variances = np.var(matrix.values, axis=1, ddof=1)
    keep = variances >= threshold
    if not np.any(keep):
        raise DegenerateDataError("no hypotheses remain after variance filtering")
    idx = np.flatnonzero(keep)
    return ExpressionMatrix(
        values=matrix.values[idx],
        gene_ids=tuple(matrix.gene_ids[i] for i in idx),
        labels=matrix.labels,
    )


def unpooled_t_tests(matrix: ExpressionMatrix) -> list[TestResult]:
    """Unpooled two-sample tests of class 1 versus class 0 for every row.

    Per row: beta_star = mean(class 1) - mean(class 0), se combines per-class
    sample variances (denominator n_k - 1) as sqrt(s1^2/n1 + s0^2/n0), the
    Wald statistic t = beta_star/se is referred to N(0, 1) for a two-sided
    p-value.  Rows with se == 0 raise instead of emitting infinite statistics.
    """
    mask1 = matrix.labels == 1
    x0 = matrix.values[:, ~mask1]
    x1 = matrix.values[:, mask1]
    n0, n1 = x0.shape[1], x1.shape[1]
    if n0 < 2 or n1 < 2:
        raise MatrixError(
            f"unpooled tests need at least 2 samples per class, got {n0} and {n1}"
        )

    mean0 = x0.mean(axis=1)
    mean1 = x1.mean(axis=1)
    var0 = x0.var(axis=1, ddof=1)
    var1 = x1.var(axis=1, ddof=1)

    beta = mean1 - mean0
    se = np.sqrt(var1 / n1 + var0 / n0)
    zero = se == 0
    if np.any(zero):
        bad = [matrix.gene_ids[i] for i in np.flatnonzero(zero)]
        raise DegenerateDataError(
            f"zero standard error (no within-class variation) for: {', '.join(bad)}"
        )
    t = beta / se
    p = normal_two_sided_p(t)
    return [
        TestResult(gene_id=gid, beta_star=float(b), se=float(s), t=float(tt), p=float(pp))
        for gid, b, s, tt, pp in zip(matrix.gene_ids, beta, se, t, p)
    ]
