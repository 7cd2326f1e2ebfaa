"""Independent reference implementations used to derive frozen expected values.

Everything here is deliberately scalar / brute force and shares no code with
the package, so the tests check two separate derivations against each other.
"""

import math
import statistics

import mpmath


def scalar_unpooled(sample0, sample1):
    """Pure-python difference in means, unpooled se, and Wald statistic."""
    m0 = statistics.fmean(sample0)
    m1 = statistics.fmean(sample1)
    v0 = statistics.variance(sample0)
    v1 = statistics.variance(sample1)
    beta = m1 - m0
    se = math.sqrt(v1 / len(sample1) + v0 / len(sample0))
    return beta, se, beta / se


def two_sided_normal_p(t):
    """High-precision 2 * (1 - Phi(|t|)) via mpmath."""
    with mpmath.workdps(40):
        return float(2 * (1 - mpmath.ncdf(abs(mpmath.mpf(t)))))


def bh_bruteforce(pvalues, alpha):
    """Step-up BH by scanning k = G..1 over the stably sorted p-values."""
    g = len(pvalues)
    order = sorted(range(g), key=lambda i: (pvalues[i], i))
    for k in range(g, 0, -1):
        if pvalues[order[k - 1]] <= alpha * k / g:
            return set(order[:k])
    return set()


def qvalues_by_hand(pvalues, pi0):
    """Literal descending-min recursion over the order statistics."""
    g = len(pvalues)
    order = sorted(range(g), key=lambda i: (pvalues[i], i))
    q_sorted = [0.0] * g
    q_sorted[g - 1] = pi0 * pvalues[order[g - 1]]
    for i in range(g - 2, -1, -1):
        q_sorted[i] = min(pi0 * g * pvalues[order[i]] / (i + 1), q_sorted[i + 1])
    q = [0.0] * g
    for rank, idx in enumerate(order):
        q[idx] = q_sorted[rank]
    return q


def raw_pi0_counting(pvalues, lam):
    """#{p > lambda} / (G (1 - lambda)) by explicit counting."""
    count = sum(1 for p in pvalues if p > lam)
    return count / (len(pvalues) * (1.0 - lam))
