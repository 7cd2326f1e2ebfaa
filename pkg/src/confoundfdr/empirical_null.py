"""Empirical null estimation from the bulk of the observed test statistics.

The marginal density of the statistics is estimated by Poisson regression on
histogram counts with a polynomial log-linear basis (Lindsey's method).  Under
the zero assumption -- statistics near the center come from the null
component -- the log density is locally quadratic, and matching a quadratic
over a central window yields the empirical null mean, scale, and null
proportion.  The residual (1 - pi0) * f1 follows by subtraction.  Also here:
local fdr evaluation, a robust genomic-control scale estimate from known-null
statistics, and phenotype testing within user-supplied strata.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DegenerateDataError, WindowError
from .stats_core import ExpressionMatrix, TestResult, unpooled_t_tests

__all__ = [
    "DensityEstimate",
    "EmpiricalNull",
    "estimate_marginal_density",
    "fit_empirical_null",
    "local_fdr",
    "null_scale_from_known_nulls",
    "stratified_tests",
]

# median(|Z|) for Z ~ N(0, 1), i.e. the 0.75 normal quantile
_NORMAL_MEDIAN_ABS = 0.6744897501960817

_IRLS_MAX_ITER = 100
_IRLS_TOL = 1e-10


@dataclass(frozen=True)
class DensityEstimate:
    """A density evaluated on a fixed grid; trapezoid integral must be ~1."""

    grid: np.ndarray
    f: np.ndarray
    bin_width: float

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        f = np.asarray(self.f, dtype=float)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "f", f)
        if grid.ndim != 1 or grid.shape != f.shape:
            raise ValueError("grid and f must be 1-d arrays of equal length")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        if np.any(f < 0):
            raise ValueError("density values must be nonnegative")
        if not self.bin_width > 0:
            raise ValueError("bin width must be positive")
        total = float(np.trapezoid(f, grid))
        if not 0.99 <= total <= 1.01:
            raise ValueError(f"density integrates to {total:.6f}, outside [0.99, 1.01]")

    def __call__(self, t) -> np.ndarray:
        """Linear interpolation on the grid; zero outside its range."""
        return np.interp(np.asarray(t, dtype=float), self.grid, self.f, left=0.0, right=0.0)


@dataclass(frozen=True)
class EmpiricalNull:
    """Fitted null N(delta0, sigma0^2), null proportion, and component densities.

    The stored marginal f is the reconstruction pi0*f0 + (1-pi0)*f1, so the
    mixture identity holds on the grid by construction even where the raw
    residual had to be truncated at zero.
    """

    delta0: float
    sigma0: float
    pi0: float
    f0: DensityEstimate
    f1: DensityEstimate
    f: DensityEstimate
    pi0_clamped: bool = False

    def __post_init__(self):
        if not self.sigma0 > 0:
            raise ValueError("sigma0 must be positive")
        if not 0.0 < self.pi0 <= 1.0:
            raise ValueError("pi0 must be in (0, 1]")
        mix = self.pi0 * self.f0.f + (1.0 - self.pi0) * self.f1.f
        if np.max(np.abs(mix - self.f.f)) > 1e-9:
            raise ValueError("mixture identity pi0*f0 + (1-pi0)*f1 == f violated")


def _poisson_deviance(counts: np.ndarray, mu: np.ndarray) -> float:
    with np.errstate(divide="ignore", invalid="ignore"):
        term = np.where(counts > 0, counts * np.log(counts / mu), 0.0)
    return float(2.0 * np.sum(term - (counts - mu)))


def estimate_marginal_density(stats, n_bins: int = 120, poly_degree: int = 7) -> DensityEstimate:
    """Estimate the marginal density of the statistics by Lindsey's method.

    The statistics are binned into ``n_bins`` equal-width bins spanning the
    observed range widened by 10% on each side.  Bin counts are modeled as
    Poisson with log-linear mean polynomial in the bin midpoint, fitted by
    iteratively reweighted least squares; the fitted curve is normalized to
    integrate to one over the midpoint grid.

    Parameters
    ----------
    stats : array_like
        At least 100 finite test statistics.
    n_bins : int
        Number of histogram bins, at least 20.
    poly_degree : int
        Degree of the log-density polynomial, between 2 and 10.

    Returns
    -------
    DensityEstimate
        Density on the grid of bin midpoints.
    """
    t = np.asarray(stats, dtype=float)
    if t.ndim != 1 or t.size < 100:
        raise ValueError(f"need at least 100 statistics, got {t.size}")
    if not np.all(np.isfinite(t)):
        raise ValueError("statistics must be finite")
    if n_bins < 20:
        raise ValueError(f"n_bins must be at least 20, got {n_bins}")
    if not 2 <= poly_degree <= 10:
        raise ValueError(f"poly_degree must be in [2, 10], got {poly_degree}")

    t_min, t_max = float(t.min()), float(t.max())
    span = t_max - t_min
    if span == 0.0:
        raise DegenerateDataError("all statistics are identical; density range is degenerate")
    lo, hi = t_min - 0.1 * span, t_max + 0.1 * span
    edges = np.linspace(lo, hi, n_bins + 1)
    width = (hi - lo) / n_bins
    mids = 0.5 * (edges[:-1] + edges[1:])
    counts = np.histogram(t, bins=edges)[0].astype(float)

    # standardized midpoints keep the Vandermonde columns well conditioned
    xs = (mids - mids.mean()) / mids.std()
    design = np.vander(xs, poly_degree + 1, increasing=True)

    beta = np.linalg.lstsq(design, np.log(counts + 0.5), rcond=None)[0]
    deviance = math.inf
    for _ in range(_IRLS_MAX_ITER):
        eta = np.clip(design @ beta, -50.0, 50.0)
        mu = np.exp(eta)
        z = eta + (counts - mu) / mu
        sw = np.sqrt(mu)
        beta = np.linalg.lstsq(design * sw[:, None], z * sw, rcond=None)[0]
        new_deviance = _poisson_deviance(counts, np.exp(np.clip(design @ beta, -50.0, 50.0)))
        if abs(deviance - new_deviance) < _IRLS_TOL * (abs(new_deviance) + 1.0):
            deviance = new_deviance
            break
        deviance = new_deviance
    else:
        raise ConvergenceError(
            f"Poisson IRLS did not converge in {_IRLS_MAX_ITER} iterations "
            f"(last deviance {deviance:.6g})",
            deviance=deviance,
        )

    fitted = np.exp(np.clip(design @ beta, -50.0, 50.0)) / (t.size * width)
    fitted = fitted / np.trapezoid(fitted, mids)
    return DensityEstimate(grid=mids, f=fitted, bin_width=width)


def fit_empirical_null(
    stats,
    center_window: tuple[float, float] | None = None,
    n_bins: int = 120,
    poly_degree: int = 7,
) -> EmpiricalNull:
    """Fit a normal empirical null by central matching under the zero assumption.

    The log of the estimated marginal density is matched to a quadratic over a
    central window assumed to contain only null statistics.  The quadratic's
    vertex and curvature give the null mean and scale; its height gives the
    null proportion, capped so that pi0 * f0 never exceeds the marginal at
    its mode.  The alternative component is the truncated, renormalized
    residual.

    Parameters
    ----------
    stats : array_like
        Test statistics.
    center_window : (float, float), optional
        Interval assumed pure-null.  Defaults to mode +/- 1.0 where the mode
        is the argmax of the estimated marginal density.  Must contain the
        mode and at least 10% of the statistics.
    n_bins, poly_degree : int
        Passed through to the marginal density estimate.
    """
    t = np.asarray(stats, dtype=float)
    marginal = estimate_marginal_density(t, n_bins=n_bins, poly_degree=poly_degree)
    grid = marginal.grid
    mode = float(grid[np.argmax(marginal.f)])

    if center_window is None:
        low, high = mode - 1.0, mode + 1.0
    else:
        low, high = float(center_window[0]), float(center_window[1])
        if not low < high:
            raise ValueError("window low must be below window high")
    inside = np.count_nonzero((t >= low) & (t <= high))
    if inside < 0.10 * t.size:
        raise WindowError(
            f"window [{low:.4g}, {high:.4g}] holds {inside}/{t.size} statistics, below 10%"
        )
    if not low <= mode <= high:
        raise WindowError(
            f"window [{low:.4g}, {high:.4g}] does not straddle the marginal mode {mode:.4g}"
        )

    sel = (grid >= low) & (grid <= high)
    if np.count_nonzero(sel) < 5:
        raise WindowError("window covers fewer than 5 density grid points")
    c2, c1, c0 = np.polyfit(grid[sel], np.log(marginal.f[sel]), 2)
    if not c2 < 0:
        raise WindowError("window does not contain a density peak")

    sigma0 = math.sqrt(-1.0 / (2.0 * c2))
    delta0 = -c1 / (2.0 * c2)
    log_pi0 = c0 + math.log(sigma0 * math.sqrt(2.0 * math.pi)) + delta0**2 / (2.0 * sigma0**2)
    pi0_raw = math.exp(log_pi0)

    f0_vals = np.exp(-0.5 * ((grid - delta0) / sigma0) ** 2) / (sigma0 * math.sqrt(2.0 * math.pi))
    f0 = DensityEstimate(grid=grid, f=f0_vals, bin_width=marginal.bin_width)

    mode_idx = int(np.argmax(marginal.f))
    cap_at_mode = float(marginal.f[mode_idx] / f0_vals[mode_idx]) if f0_vals[mode_idx] > 0 else 1.0
    pi0 = min(pi0_raw, 1.0, cap_at_mode)
    clamped = pi0 != pi0_raw

    residual = np.clip(marginal.f - pi0 * f0_vals, 0.0, None)
    mass = float(np.trapezoid(residual, grid))
    if mass > 0.0:
        f1_vals = residual / mass
    else:
        # nothing left over the null: fall back to a flat density on the grid
        f1_vals = np.full(grid.size, 1.0 / (grid[-1] - grid[0]))
    f1 = DensityEstimate(grid=grid, f=f1_vals, bin_width=marginal.bin_width)

    f_mix = DensityEstimate(
        grid=grid, f=pi0 * f0_vals + (1.0 - pi0) * f1_vals, bin_width=marginal.bin_width
    )
    return EmpiricalNull(
        delta0=float(delta0),
        sigma0=float(sigma0),
        pi0=float(pi0),
        f0=f0,
        f1=f1,
        f=f_mix,
        pi0_clamped=clamped,
    )


def local_fdr(t_values, null: EmpiricalNull) -> np.ndarray:
    """Posterior null probability min(1, pi0 * f0(t) / f(t)) per statistic.

    Densities are linearly interpolated on the fitted grid; values outside
    the grid, or at points where the marginal vanishes, are clamped to 1.
    """
    t = np.asarray(t_values, dtype=float)
    grid = null.f.grid
    f0_at = np.interp(t, grid, null.f0.f)
    f_at = np.interp(t, grid, null.f.f)

    out = np.ones_like(t, dtype=float)
    ok = (t >= grid[0]) & (t <= grid[-1]) & (f_at > 0)
    out[ok] = np.minimum(1.0, null.pi0 * f0_at[ok] / f_at[ok])

    n_zero = int(np.count_nonzero((t >= grid[0]) & (t <= grid[-1]) & (f_at == 0)))
    if n_zero:
        warnings.warn(
            f"marginal density is zero at {n_zero} interior point(s); local fdr clamped to 1",
            RuntimeWarning,
            stacklevel=2,
        )
    return out


def null_scale_from_known_nulls(known_null_stats) -> float:
    """Robust scale from statistics known to be null: median(|U|) / Phi^-1(0.75).

    Dividing observed statistics by the returned sigma rescales them to the
    reference null, the genomic-control correction.
    """
    u = np.asarray(known_null_stats, dtype=float)
    if u.ndim != 1 or u.size < 20:
        raise ValueError(f"need at least 20 known-null statistics, got {u.size}")
    if not np.all(np.isfinite(u)):
        raise ValueError("known-null statistics must be finite")
    sigma = float(np.median(np.abs(u))) / _NORMAL_MEDIAN_ABS
    if sigma == 0.0:
        raise DegenerateDataError("median absolute statistic is zero; scale is degenerate")
    return sigma


def stratified_tests(matrix: ExpressionMatrix, strata) -> dict[int, list[TestResult]]:
    """Run the unpooled two-sample tests separately within each stratum.

    Strata are user-supplied integer labels, one per sample column.  Each
    stratum must contain at least two samples of each phenotype class.
    Returns a dict keyed by stratum label in sorted order.
    """
    s = np.asarray(strata, dtype=int)
    if s.shape != (matrix.n_samples,):
        raise ValueError(f"{s.size} stratum labels for {matrix.n_samples} samples")
    results: dict[int, list[TestResult]] = {}
    for label in sorted(np.unique(s).tolist()):
        cols = s == label
        for cls in (0, 1):
            n_cls = int(np.count_nonzero(matrix.labels[cols] == cls))
            if n_cls < 2:
                raise ValueError(
                    f"stratum {label} has {n_cls} sample(s) of class {cls}; need at least 2"
                )
        sub = ExpressionMatrix(
            values=matrix.values[:, cols],
            gene_ids=matrix.gene_ids,
            labels=matrix.labels[cols],
        )
        results[label] = unpooled_t_tests(sub)
    return results
