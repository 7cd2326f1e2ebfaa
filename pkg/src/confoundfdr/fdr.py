"""pi0 estimation, q-values, and the Benjamini-Hochberg step-up procedure.

The pi0 estimator counts p-values above each lambda in a grid, smooths the
resulting curve with a cubic smoothing spline (fixed effective df of 3 for
reproducibility), and extrapolates to lambda = 1.  Q-values follow the
standard descending-min recursion; BH is the usual step-up rule.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._spline import SmoothingSpline

__all__ = [
    "DEFAULT_LAMBDA_GRID",
    "Pi0Estimate",
    "QValueSet",
    "RejectionSet",
    "raw_pi0",
    "estimate_pi0",
    "qvalues",
    "bh_procedure",
]

# 0.05, 0.10, ..., 0.95
DEFAULT_LAMBDA_GRID = tuple(np.linspace(0.05, 0.95, 19))

SPLINE_DF = 3.0


@dataclass(frozen=True)
class Pi0Estimate:
    """Grid of raw pi0(lambda) values plus the spline value extrapolated to 1."""

    lambda_grid: np.ndarray
    raw: np.ndarray
    pi0: float
    clamped: bool


@dataclass(frozen=True)
class QValueSet:
    """Per-hypothesis q-values, index-aligned with the input p-values."""

    q: np.ndarray
    pi0_used: float


@dataclass(frozen=True)
class RejectionSet:
    """Indices rejected by BH at level alpha; k_hat of them, the smallest p's."""

    rejected: frozenset[int]
    k_hat: int
    alpha: float


def _check_pvalues(pvalues) -> np.ndarray:
    p = np.asarray(pvalues, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("p-values must be a non-empty 1-d array")
    if np.any(~np.isfinite(p)) or np.any(p < 0) or np.any(p > 1):
        raise ValueError("p-values must lie in [0, 1]")
    return p


def raw_pi0(pvalues, lam: float) -> float:
    """Counting estimate #{p > lambda} / (G * (1 - lambda))."""
    p = np.asarray(pvalues, dtype=float)
    return np.count_nonzero(p > lam) / (p.size * (1.0 - lam))


def estimate_pi0(pvalues, lambda_grid=DEFAULT_LAMBDA_GRID) -> Pi0Estimate:
    """Estimate the proportion of true nulls from a collection of p-values.

    Parameters
    ----------
    pvalues : array_like
        At least 10 p-values in [0, 1].
    lambda_grid : array_like
        At least 4 strictly increasing values in [0, 0.95].

    Returns
    -------
    Pi0Estimate
        Raw counting estimates per grid point and the smoothing-spline value
        at lambda = 1, clamped into [1/G, 1].
    """
    p = _check_pvalues(pvalues)
    if p.size < 10:
        raise ValueError(f"need at least 10 p-values, got {p.size}")
    grid = np.asarray(lambda_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 4:
        raise ValueError("lambda grid needs at least 4 points for the spline")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("lambda grid must be strictly increasing")
    if grid[0] < 0 or grid[-1] > 0.95:
        raise ValueError("lambda grid must lie within [0, 0.95]")

    raw = np.array([raw_pi0(p, lam) for lam in grid])
    spline = SmoothingSpline(grid, raw, df=SPLINE_DF)
    extrapolated = float(spline(1.0))

    lo = 1.0 / p.size
    clamped = not lo <= extrapolated <= 1.0
    pi0 = min(1.0, max(lo, extrapolated))
    return Pi0Estimate(lambda_grid=grid, raw=raw, pi0=pi0, clamped=clamped)


def qvalues(pvalues, pi0: float) -> QValueSet:
    """Q-values from p-values and a pi0 estimate.

    The largest p-value gets q = pi0 * p; descending through the order
    statistics, q_(i) = min(pi0 * G * p_(i) / i, q_(i+1)).  The result is
    mapped back to the input order, so tied p-values share a q-value.
    """
    p = _check_pvalues(pvalues)
    if not 0.0 < pi0 <= 1.0:
        raise ValueError(f"pi0 must be in (0, 1], got {pi0}")
    g = p.size
    order = np.argsort(p, kind="stable")
    p_sorted = p[order]
    ranks = np.arange(1, g + 1)
    # g/ranks is exactly 1 at the top rank, so q for the largest p is pi0 * p
    q_sorted = np.minimum.accumulate((pi0 * p_sorted * (g / ranks))[::-1])[::-1]
    q = np.empty(g)
    q[order] = q_sorted
    return QValueSet(q=q, pi0_used=float(pi0))


def bh_procedure(pvalues, alpha: float) -> RejectionSet:
    """Benjamini-Hochberg step-up rule at level alpha.

    Finds k_hat = max{k : p_(k) <= alpha * k / G} and rejects the hypotheses
    holding the k_hat smallest p-values (ties broken by input order).
    """
    p = _check_pvalues(pvalues)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    g = p.size
    order = np.argsort(p, kind="stable")
    p_sorted = p[order]
    thresholds = alpha * np.arange(1, g + 1) / g
    passing = np.flatnonzero(p_sorted <= thresholds)
    k_hat = int(passing[-1] + 1) if passing.size else 0
    rejected = frozenset(int(i) for i in order[:k_hat])
    return RejectionSet(rejected=rejected, k_hat=k_hat, alpha=float(alpha))
