"""Mixture-model simulator with known ground truth, plus oracle bookkeeping.

Generates test statistics from a two-component mixture where the null
component can be the theoretical N(0,1), rescaled, mean-shifted, both, or
stratified (per-stratum shift).  Ground truth (which hypotheses are
alternatives, each statistic's generating mean) is recorded so tests can
compute realized false discovery proportions and confusion counts exactly.
All draws come from a counter-based generator in a fixed vectorized order,
so a seed fully determines the output.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "NULL_MODELS",
    "SimConfig",
    "SimulatedData",
    "simulate",
    "empirical_fdr",
    "confusion_counts",
]

NULL_MODELS = ("theoretical", "scaled", "shifted", "shifted_scaled", "stratified")


@dataclass(frozen=True)
class SimConfig:
    """Configuration of one simulated dataset; the seed determines everything."""

    G: int
    pi0: float
    null_model: str = "theoretical"
    alt_mean: float = 3.0
    alt_sd: float = 1.0
    sigma: float = 1.0
    theta: float = 0.0
    delta0: float = 0.0
    sigma0: float = 1.0
    n_strata: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.G < 1:
            raise ValueError(f"G must be positive, got {self.G}")
        if not 0.0 <= self.pi0 <= 1.0:
            raise ValueError(f"pi0 must be in [0, 1], got {self.pi0}")
        if self.null_model not in NULL_MODELS:
            raise ValueError(f"unknown null model {self.null_model!r}; choose from {NULL_MODELS}")
        for name in ("alt_sd", "sigma", "sigma0"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.null_model == "stratified" and self.n_strata < 1:
            raise ValueError("stratified model needs n_strata >= 1")


@dataclass(frozen=True)
class SimulatedData:
    """Statistics with their ground truth: alternative flags and true means."""

    stats: np.ndarray
    truth: np.ndarray
    true_means: np.ndarray
    strata: np.ndarray | None = None


def simulate(config: SimConfig) -> SimulatedData:
    """Draw G statistics from the configured mixture.

    H_i ~ Bernoulli(1 - pi0) marks alternatives; alternatives come from
    N(alt_mean, alt_sd^2) and nulls from the configured null component.
    """
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(config.seed)))
    g = config.G
    truth = rng.random(g) >= config.pi0
    strata = rng.integers(0, config.n_strata, size=g) if config.null_model == "stratified" else None
    z = rng.standard_normal(g)

    if config.null_model == "theoretical":
        null_mean = np.zeros(g)
        null_sd = 1.0
    elif config.null_model == "scaled":
        null_mean = np.zeros(g)
        null_sd = config.sigma
    elif config.null_model == "shifted":
        null_mean = np.full(g, config.theta)
        null_sd = 1.0
    elif config.null_model == "shifted_scaled":
        null_mean = np.full(g, config.delta0)
        null_sd = config.sigma0
    else:  # stratified
        null_mean = strata * config.theta
        null_sd = 1.0

    true_means = np.where(truth, config.alt_mean, null_mean)
    sds = np.where(truth, config.alt_sd, null_sd)
    stats = true_means + sds * z
    return SimulatedData(stats=stats, truth=truth, true_means=true_means, strata=strata)


def empirical_fdr(rejected, truth) -> float:
    """Realized false discovery proportion V/Q of a rejection set; 0 if Q == 0."""
    truth = np.asarray(truth, dtype=bool)
    rejected = set(rejected)
    if rejected and (min(rejected) < 0 or max(rejected) >= truth.size):
        raise IndexError("rejected index out of range")
    q = len(rejected)
    if q == 0:
        return 0.0
    v = sum(1 for i in rejected if not truth[i])
    return v / q


def confusion_counts(rejected, truth) -> tuple[int, int, int, int]:
    """Cross-classification (U, V, T, S) of truth against the rejection set.

    U: true nulls accepted; V: true nulls rejected; T: alternatives accepted;
    S: alternatives rejected.  U + V + T + S == G.
    """
    truth = np.asarray(truth, dtype=bool)
    rej = np.zeros(truth.size, dtype=bool)
    idx = list(rejected)
    if idx and (min(idx) < 0 or max(idx) >= truth.size):
        raise IndexError("rejected index out of range")
    rej[idx] = True
    u = int(np.count_nonzero(~truth & ~rej))
    v = int(np.count_nonzero(~truth & rej))
    t = int(np.count_nonzero(truth & ~rej))
    s = int(np.count_nonzero(truth & rej))
    return u, v, t, s
