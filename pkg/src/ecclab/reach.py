"""Retention-failure population model and profiling tradeoff analytics.

Each cell fails with a normal CDF in the effective refresh interval; the
per-cell standard deviations are lognormally distributed across the
population. Temperature enters as an exponential scaling of the effective
interval (about 10x per 10 degC at the default vendor factor), so profiling
hotter and profiling longer are interchangeable knobs. On top of the
population model sit the closed-form analytics: tolerable raw error rate
for a target uncorrectable rate, profile longevity, profiling runtime, and
the end-to-end throughput discount.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import betainc, ndtr

from .errmodel import counter_rng

__all__ = [
    "VENDOR_TEMP_FACTORS",
    "TARGET_FAIL_THRESHOLD",
    "CellPopulation",
    "ReachOutcome",
    "make_population",
    "fail_prob",
    "evaluate_reach",
    "uber",
    "tolerable_rber",
    "longevity",
    "rdwr_seconds",
    "profile_runtime",
    "ipc_real",
]

# measured exponential temperature-dependence fits, per vendor class
VENDOR_TEMP_FACTORS = {"A": 0.22, "B": 0.20, "C": 0.26}

# a cell counts as failing at the target when its failure probability
# exceeds this (a strict >0 rule would drag 10-sigma tails into the set)
TARGET_FAIL_THRESHOLD = 1e-6

_STREAM_REACH = 31


@dataclass(frozen=True)
class CellPopulation:
    """Per-cell normal-CDF failure parameters, in seconds."""

    mu: np.ndarray
    sigma: np.ndarray
    temp_factor: float = VENDOR_TEMP_FACTORS["A"]

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=np.float64)
        sigma = np.asarray(self.sigma, dtype=np.float64)
        if mu.shape != sigma.shape or mu.ndim != 1:
            raise ValueError("mu and sigma must be matching 1-D arrays")
        if (mu <= 0).any() or (sigma <= 0).any():
            raise ValueError("mu and sigma must be positive")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)

    def __len__(self) -> int:
        return self.mu.size


@dataclass(frozen=True)
class ReachOutcome:
    coverage: float
    false_positive_rate: float
    runtime_seconds: float
    target_failing: int
    found: int

    def __post_init__(self):
        if not 0.0 <= self.coverage <= 1.0:
            raise ValueError("coverage out of range")
        if not 0.0 <= self.false_positive_rate <= 1.0:
            raise ValueError("false positive rate out of range")


def make_population(n_cells: int, seed: int, target_trefw: float = 1.0,
                    weak_frac: float = 0.30, margin_frac: float = 0.12,
                    temp_factor: float = VENDOR_TEMP_FACTORS["A"]) -> CellPopulation:
    """Synthetic population calibrated around a nominal target interval.

    Per-cell sigmas are lognormal (most under ~0.2 s); means fall into three
    bands relative to the target: "weak" cells that fail there with
    probability >= ~2%, a "margin" band that is safely below the failing
    threshold at the target but becomes visible a quarter second later (the
    false-positive source for reach profiling), and "strong" cells that stay
    invisible everywhere reasonable. The gap between bands keeps the
    failing-at-target set free of astronomically-rare cells that no finite
    profiling run could find.
    """
    rng = counter_rng(seed, 0, 0, _STREAM_REACH)
    n_weak = int(n_cells * weak_frac)
    n_margin = int(n_cells * margin_frac)
    n_strong = n_cells - n_weak - n_margin

    # wide sigmas here keep the reach-vs-brute-force iteration ratio in the
    # few-x range; the other two bands keep the population majority under 0.2 s
    sig_weak = np.clip(0.30 * np.exp(rng.normal(0.0, 0.25, n_weak)), 0.03, 0.35)
    mu_weak = target_trefw + sig_weak * rng.uniform(-2.5, 2.0, n_weak)

    sig_margin = np.clip(0.04 * np.exp(rng.normal(0.0, 0.2, n_margin)), 0.02, 0.055)
    mu_margin = target_trefw + 0.25 + sig_margin * rng.uniform(1.0, 2.5, n_margin)

    sig_strong = np.clip(0.08 * np.exp(rng.normal(0.0, 0.3, n_strong)), 0.03, 0.12)
    mu_strong = rng.uniform(target_trefw + 0.8, target_trefw + 1.6, n_strong)

    mu = np.concatenate([mu_weak, mu_margin, mu_strong])
    sigma = np.concatenate([sig_weak, sig_margin, sig_strong])
    return CellPopulation(mu=mu, sigma=sigma, temp_factor=temp_factor)


def fail_prob(pop: CellPopulation, t_refw: float, delta_t: float = 0.0) -> np.ndarray:
    """Per-cell failure probability at a refresh interval and temperature delta.

    Temperature scales the effective interval: t_eff = t_refw * e^(k dT).
    """
    if t_refw <= 0:
        raise ValueError("refresh interval must be positive")
    t_eff = t_refw * float(np.exp(pop.temp_factor * delta_t))
    return ndtr((t_eff - pop.mu) / pop.sigma)


def evaluate_reach(pop: CellPopulation, target: tuple[float, float], reach: tuple[float, float],
                   iterations: int, seed: int, n_dp: int = 1,
                   t_rdwr: float = 0.125) -> ReachOutcome:
    """Profile at reach conditions and score against the target conditions.

    A cell belongs to the target-failing set when its failure probability at
    the target exceeds TARGET_FAIL_THRESHOLD; profiling observes each cell as
    a Bernoulli draw at its reach-condition probability once per iteration.
    """
    if len(pop) == 0:
        raise ValueError("population is empty")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    if reach[0] < target[0] and reach[1] < target[1]:
        raise ValueError("reach conditions must meet or exceed the target in some coordinate")
    p_target = fail_prob(pop, *target)
    p_reach = fail_prob(pop, *reach)
    failing = p_target > TARGET_FAIL_THRESHOLD

    rng = counter_rng(seed, 1, 0, _STREAM_REACH)
    found = np.zeros(len(pop), dtype=bool)
    for _ in range(iterations):
        found |= rng.random(len(pop)) < p_reach

    n_failing = int(failing.sum())
    n_found = int(found.sum())
    coverage = float((found & failing).sum() / n_failing) if n_failing else 1.0
    fpr = float((found & ~failing).sum() / n_found) if n_found else 0.0
    runtime = profile_runtime(reach[0], t_rdwr, n_dp, iterations)
    return ReachOutcome(coverage=coverage, false_positive_rate=fpr,
                        runtime_seconds=runtime, target_failing=n_failing, found=n_found)


def uber(word_bits: int, correctable: int, rber: float) -> float:
    """Uncorrectable bit error rate of a w-bit word with k-error correction.

    (1/w) * sum_{n=k+1}^{w} C(w,n) R^n (1-R)^(w-n), evaluated through the
    regularized incomplete beta function (the exact binomial tail).
    """
    if word_bits < 1:
        raise ValueError("word size must be >= 1")
    if not 0 <= correctable < word_bits:
        raise ValueError("correction capability must lie in [0, word_bits)")
    if not 0.0 <= rber <= 1.0:
        raise ValueError("rber must lie in [0, 1]")
    if rber == 0.0:
        return 0.0
    return float(betainc(correctable + 1, word_bits - correctable, rber)) / word_bits


def tolerable_rber(word_bits: int, correctable: int, uber_target: float) -> float:
    """Largest raw error rate keeping the word's UBER at the target.

    Root of uber(w, k, R) = uber_target by bisection on log10 R, relative
    tolerance 1e-6.
    """
    if not 0.0 < uber_target < 1.0:
        raise ValueError("uber target must lie in (0, 1)")

    lo, hi = -30.0, 0.0

    def g(x: float) -> float:
        val = uber(word_bits, correctable, 10.0 ** x)
        return np.log(val) - np.log(uber_target) if val > 0 else -np.inf

    if g(lo) > 0 or g(hi) < 0:
        raise ValueError("no tolerable-rber root in [1e-30, 1]")
    x = brentq(g, lo, hi, xtol=1e-9)
    return float(10.0 ** x)


def longevity(tolerable_failures: float, missed_by_coverage: float,
              accumulation_per_hour: float) -> float:
    """Hours until accumulated new failures exhaust the error budget."""
    if accumulation_per_hour <= 0:
        raise ValueError("accumulation rate must be positive")
    if tolerable_failures < missed_by_coverage:
        raise ValueError("coverage insufficient: more failures missed than tolerable")
    return (tolerable_failures - missed_by_coverage) / accumulation_per_hour


def rdwr_seconds(capacity_gb: float, base_seconds: float = 0.125, base_gb: float = 2.0) -> float:
    """DRAM read-or-write pass time, scaled linearly from 0.125 s per 2 GB."""
    if capacity_gb <= 0:
        raise ValueError("capacity must be positive")
    return base_seconds * capacity_gb / base_gb


def profile_runtime(t_refw: float, t_rdwr: float, n_dp: int, n_it: int) -> float:
    """One-shot profiling runtime: (t_refw + 2 t_rdwr) * n_dp * n_it seconds.

    Each iteration writes the pattern, waits out the lengthened refresh
    window, then reads back and compares, for every data pattern.
    """
    if t_refw <= 0 or t_rdwr <= 0:
        raise ValueError("times must be positive")
    if n_dp < 0 or n_it < 0:
        raise ValueError("counts must be nonnegative")
    return (t_refw + 2.0 * t_rdwr) * n_dp * n_it


def ipc_real(ipc_ideal: float, profiling_overhead: float) -> float:
    """Throughput after discounting the fraction of time spent profiling."""
    if not 0.0 <= profiling_overhead <= 1.0:
        raise ValueError("overhead must lie in [0, 1]")
    return ipc_ideal * (1.0 - profiling_overhead)
