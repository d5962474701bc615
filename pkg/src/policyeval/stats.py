"""Bayesian success-rate estimation and comparison of policies.

Task success is modeled as Bernoulli with unknown rate p under a Beta
prior, so the posterior after s successes and f failures is
Beta(alpha+s, beta+f). The probability that one policy beats another is
computed by deterministic numerical integration; Monte Carlo sampling is
used only for the credible interval of the rate difference, with a
seeded, portable generator (numpy PCG64) so results reproduce across
platforms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy import integrate
from scipy import stats as sp_stats


class StatsError(ValueError):
    pass


@dataclass(frozen=True)
class BetaPosterior:
    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise StatsError("shape parameters must be positive")
        if not (math.isfinite(self.alpha) and math.isfinite(self.beta)):
            raise StatsError("shape parameters must be finite")

    @property
    def mean(self) -> float:
        return self.alpha / (self.alpha + self.beta)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.beta(self.alpha, self.beta, size=size)


@dataclass(frozen=True)
class ComparisonResult:
    prob_second_better: float
    diff_interval: tuple[float, float]  # equal-tailed credible interval of p2 - p1
    level: float
    excludes_zero: bool
    n_samples: int
    seed: int


def posterior(
    prior_alpha: float, prior_beta: float, successes: int, failures: int
) -> BetaPosterior:
    """Conjugate Beta-Bernoulli update."""
    if successes < 0 or failures < 0:
        raise StatsError("counts must be nonnegative")
    return BetaPosterior(prior_alpha + successes, prior_beta + failures)


def prob_superior(a: BetaPosterior, b: BetaPosterior) -> float:
    """P(p_b > p_a) for independent Beta posteriors.

    Deterministic quadrature of the Beta densities to an absolute
    tolerance well below 1e-6.
    """
    da = sp_stats.beta(a.alpha, a.beta)
    db = sp_stats.beta(b.alpha, b.beta)
    value, _ = integrate.quad(
        lambda x: da.pdf(x) * db.sf(x), 0.0, 1.0, epsabs=1e-10, epsrel=1e-10, limit=200
    )
    return min(max(value, 0.0), 1.0)


def compare(
    a_data: tuple[int, int],
    b_data: tuple[int, int],
    prior: tuple[float, float] = (1.0, 1.0),
    level: float = 0.95,
    n_samples: int = 100_000,
    seed: int = 0,
) -> ComparisonResult:
    """Compare two policies' success data (successes, failures).

    The rate-difference interval comes from seeded posterior sampling;
    prob_second_better comes from the exact integral, not the samples.
    """
    if not 0 < level < 1:
        raise StatsError("level must be in (0, 1)")
    if n_samples < 1000:
        raise StatsError("n_samples must be >= 1000 (interval too noisy to report)")
    post_a = posterior(prior[0], prior[1], *a_data)
    post_b = posterior(prior[0], prior[1], *b_data)
    rng = np.random.Generator(np.random.PCG64(seed))
    diff = post_b.sample(rng, n_samples) - post_a.sample(rng, n_samples)
    tail = (1.0 - level) / 2.0
    lo, hi = np.quantile(diff, [tail, 1.0 - tail])
    return ComparisonResult(
        prob_second_better=prob_superior(post_a, post_b),
        diff_interval=(float(lo), float(hi)),
        level=level,
        excludes_zero=not (lo <= 0.0 <= hi),
        n_samples=n_samples,
        seed=seed,
    )


def clopper_pearson(successes: int, failures: int, level: float = 0.95) -> tuple[float, float]:
    """Exact frequentist interval for a binomial proportion via Beta quantiles."""
    n = successes + failures
    if n < 1:
        raise StatsError("need at least one trial")
    tail = (1.0 - level) / 2.0
    lo = 0.0 if successes == 0 else float(sp_stats.beta.ppf(tail, successes, n - successes + 1))
    hi = 1.0 if successes == n else float(sp_stats.beta.ppf(1.0 - tail, successes + 1, n - successes))
    return lo, hi


@dataclass(frozen=True)
class ShiftReport:
    pooled: ComparisonResult
    per_ic: Mapping[int, ComparisonResult]
    shared_ics: tuple[int, ...]


def shift_report(
    before: Mapping[int, tuple[int, int]],
    after: Mapping[int, tuple[int, int]],
    prior: tuple[float, float] = (1.0, 1.0),
    level: float = 0.95,
    n_samples: int = 100_000,
    seed: int = 0,
) -> ShiftReport:
    """Compare matched-IC performance between two sessions.

    Both maps go from IC id to (successes, failures). The pooled
    comparison is restricted to the shared ICs; per-IC comparisons are
    produced wherever both sides have at least one trial. prob_second_better
    is the probability the *after* session performs better.
    """
    extra = sorted(set(after) - set(before))
    if extra:
        raise StatsError(f"after-session ICs not present in before-session: {extra}")
    shared = sorted(set(before) & set(after))
    if not shared:
        raise StatsError("no shared initial conditions to compare")
    pooled_before = tuple(sum(before[ic][i] for ic in shared) for i in (0, 1))
    pooled_after = tuple(sum(after[ic][i] for ic in shared) for i in (0, 1))
    pooled = compare(pooled_before, pooled_after, prior, level, n_samples, seed)
    per_ic = {
        ic: compare(before[ic], after[ic], prior, level, n_samples, seed)
        for ic in shared
        if sum(before[ic]) >= 1 and sum(after[ic]) >= 1
    }
    return ShiftReport(pooled=pooled, per_ic=per_ic, shared_ics=tuple(shared))
