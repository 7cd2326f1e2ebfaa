"""Natural cubic smoothing spline with a fixed effective-degrees-of-freedom target.

Implements the classical penalized least-squares formulation (Green & Silverman
banded construction): minimize ||y - g||^2 + alpha * integral(g'')^2 over natural
cubic splines with knots at the data points.  The penalty weight is chosen by
root finding so that the trace of the smoother matrix hits a requested
effective df.  Evaluation outside the knot range is linear, which is the
natural spline's boundary behavior (zero second derivative at the end knots).
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import brentq


def _band_matrices(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Build the n x (n-2) difference matrix Q and (n-2) x (n-2) penalty R."""
    n = x.size
    h = np.diff(x)
    q = np.zeros((n, n - 2))
    r = np.zeros((n - 2, n - 2))
    for j in range(n - 2):
        q[j, j] = 1.0 / h[j]
        q[j + 1, j] = -1.0 / h[j] - 1.0 / h[j + 1]
        q[j + 2, j] = 1.0 / h[j + 1]
        r[j, j] = (h[j] + h[j + 1]) / 3.0
        if j + 1 < n - 2:
            r[j, j + 1] = h[j + 1] / 6.0
            r[j + 1, j] = h[j + 1] / 6.0
    return q, r


class SmoothingSpline:
    """Cubic smoothing spline g fitted to (x, y) with tr(smoother) == df.

    Parameters
    ----------
    x : array_like
        Strictly increasing knot locations, length >= 4.
    y : array_like
        Responses, same length as x.
    df : float
        Target effective degrees of freedom, in (2, n).  df -> 2 is the
        least-squares line, df -> n interpolates.
    """

    def __init__(self, x, y, df: float = 3.0):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.ndim != 1 or x.size != y.size:
            raise ValueError("x and y must be 1-d arrays of equal length")
        if x.size < 4:
            raise ValueError("smoothing spline needs at least 4 points")
        if np.any(np.diff(x) <= 0):
            raise ValueError("x must be strictly increasing")
        n = x.size
        if not 2.0 < df < n:
            raise ValueError(f"df must lie in (2, {n}), got {df}")

        q, r = _band_matrices(x)
        qtq = q.T @ q

        def edf(log10_alpha: float) -> float:
            a = 10.0**log10_alpha
            m = np.linalg.solve(r + a * qtq, qtq)
            return n - a * np.trace(m)

        # df(alpha) decreases monotonically from n to 2; bracket then bisect.
        lo, hi = -18.0, 18.0
        while edf(lo) < df and lo > -300:
            lo -= 18.0
        while edf(hi) > df and hi < 300:
            hi += 18.0
        log10_alpha = brentq(lambda t: edf(t) - df, lo, hi, xtol=1e-12)
        alpha = 10.0**log10_alpha

        gamma = np.linalg.solve(r + alpha * qtq, q.T @ y)
        g = y - alpha * (q @ gamma)

        self.x = x
        self.values = g
        # second derivatives at all knots; natural boundary => zero at the ends
        self.second_deriv = np.concatenate(([0.0], gamma, [0.0]))
        self.alpha = alpha
        self.effective_df = edf(log10_alpha)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        x, g, gam = self.x, self.values, self.second_deriv
        h = np.diff(x)
        out = np.empty_like(t)

        i = np.clip(np.searchsorted(x, t, side="right") - 1, 0, x.size - 2)
        hi_ = h[i]
        dl = t - x[i]
        dr = x[i + 1] - t
        out = (
            gam[i] * dr**3 / (6.0 * hi_)
            + gam[i + 1] * dl**3 / (6.0 * hi_)
            + (g[i] / hi_ - gam[i] * hi_ / 6.0) * dr
            + (g[i + 1] / hi_ - gam[i + 1] * hi_ / 6.0) * dl
        )

        left = t < x[0]
        if np.any(left):
            slope0 = (g[1] - g[0]) / h[0] - h[0] * gam[1] / 6.0
            out[left] = g[0] + slope0 * (t[left] - x[0])
        right = t > x[-1]
        if np.any(right):
            slope1 = (g[-1] - g[-2]) / h[-1] + h[-1] * gam[-2] / 6.0
            out[right] = g[-1] + slope1 * (t[right] - x[-1])

        return float(out[0]) if scalar else out
