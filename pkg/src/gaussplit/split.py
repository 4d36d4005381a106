"""The good/bad mixture decomposition of a standard Gaussian around a body K.

With w(x) = exp(-sigma(d(x, K))) in (0, 1], the standard normal splits as

    mu = (1 - delta') * nu_good + delta' * nu_bad,
    nu_bad  has density proportional to w(x)       against mu,
    nu_good has density proportional to 1 - w(x)   against mu,

where delta' = E_mu[w].  Both components are sampled exactly by rejection
(w is a bona fide acceptance probability), and delta' is estimated by Monte
Carlo with a CLT confidence interval; the mass bound delta' <= 2 * delta is
what the verification suite certifies, not something assumed here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .bodies import SymmetricConvexBody
from .cutoff import CutoffSigma, build_sigma
from .rng import RngStream

_CHUNK = 1 << 18


class SamplingBudgetError(RuntimeError):
    """Rejection sampling exhausted its proposal budget."""

    def __init__(self, message: str, accepted: int, proposals: int):
        super().__init__(message)
        self.accepted = accepted
        self.proposals = proposals


@dataclass(frozen=True)
class GoodBadSplit:
    """The assembled decomposition (K, sigma, n, delta) in whitened coordinates.

    Constructed via make_split, which enforces the consistency invariants;
    direct construction is left unchecked for tests that need degenerate
    cutoffs.
    """

    body: SymmetricConvexBody
    sigma: CutoffSigma
    n: float
    delta: float

    @property
    def dim(self) -> int:
        return self.body.dim

    @property
    def c_thm(self) -> float:
        """Support-scaling constant 32 n^2/(n^2-1); equals 4 * sigma.c_bound."""
        return 32.0 * self.n * self.n / (self.n * self.n - 1.0)

    # -- pointwise weights -------------------------------------------------
    def weight_bad(self, x):
        """exp(-sigma(d(x, K))), the nu_bad acceptance probability, in (0, 1]."""
        xa = np.asarray(x, dtype=float)
        if xa.ndim == 1:
            return float(np.exp(-self.sigma.eval(self.body.distance(xa))))
        return np.exp(-self.sigma.eval(self.body.distance_many(xa)))

    def weight_good(self, x):
        """1 - weight_bad(x); exactly complementary, and exactly 0 far from K."""
        return 1.0 - self.weight_bad(x)

    def log_density_ratio_bad_dilated(self, x):
        """log d(nu_bad)/d(mu dilated by n) at x up to an additive constant:
        -sigma(d(x)) - ((n^2-1)/(2 n^2)) ||x||^2."""
        xa = np.asarray(x, dtype=float)
        coef = (self.n * self.n - 1.0) / (2.0 * self.n * self.n)
        if xa.ndim == 1:
            return float(-self.sigma.eval(self.body.distance(xa)) - coef * np.dot(xa, xa))
        return -self.sigma.eval(self.body.distance_many(xa)) - coef * np.sum(xa * xa, axis=1)


def make_split(body: SymmetricConvexBody, delta: float, n: float) -> GoodBadSplit:
    """Build the decomposition, constructing the cutoff from (delta, n)."""
    sigma = build_sigma(delta, n)
    split = GoodBadSplit(body=body, sigma=sigma, n=float(n), delta=float(delta))
    _validate_split(split)
    return split


def _validate_split(split: GoodBadSplit):
    if not split.n > 1.0:
        raise ValueError("dilation factor n must be > 1")
    expected = math.log(1.0 / split.delta)
    if abs(split.sigma.plateau - expected) > 1e-12 * max(1.0, expected):
        raise ValueError("cutoff plateau must equal log(1/delta)")
    if abs(split.c_thm - 4.0 * split.sigma.c_bound) > 1e-12 * split.c_thm:
        raise ValueError("support constant must equal 4 * sigma.c_bound")


@dataclass(frozen=True)
class DeltaPrimeEstimate:
    """Monte Carlo estimate of delta' = E_mu[weight_bad] with a CLT interval."""

    point_estimate: float
    ci_low: float
    ci_high: float
    sample_count: int

    def __post_init__(self):
        if not self.ci_low <= self.point_estimate <= self.ci_high:
            raise ValueError("confidence interval must bracket the point estimate")


def estimate_delta_prime(
    split: GoodBadSplit,
    sample_count: int,
    confidence: float = 0.99,
    rng: RngStream = RngStream(0),
) -> DeltaPrimeEstimate:
    """Mean of weight_bad over standard-normal samples; weights are bounded in
    (0, 1], so the normal-approximation interval is valid."""
    if sample_count < 10**3:
        raise ValueError("sample_count must be at least 1000")
    if not 0.0 < confidence < 1.0:
        raise ValueError("confidence must lie in (0, 1)")
    gen = rng.generator()
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < sample_count:
        m = min(_CHUNK, sample_count - done)
        w = split.weight_bad(gen.standard_normal((m, split.dim)))
        total += float(w.sum())
        total_sq += float(np.square(w).sum())
        done += m
    mean = total / sample_count
    var = max(total_sq / sample_count - mean * mean, 0.0) * sample_count / max(sample_count - 1, 1)
    half = stats.norm.ppf(0.5 * (1.0 + confidence)) * math.sqrt(var / sample_count)
    return DeltaPrimeEstimate(
        point_estimate=mean,
        ci_low=mean - half,
        ci_high=mean + half,
        sample_count=sample_count,
    )


def _rejection_sample(split, count, rng, accept_fn, rate_hint, budget):
    gen = rng.generator()
    out = []
    accepted = 0
    proposals = 0
    max_rows = max(4096, int(1.6e7) // split.dim)
    while accepted < count:
        want = int(math.ceil(1.2 * (count - accepted) / rate_hint))
        m = int(min(max_rows, max(want, 4096), budget - proposals))
        if m <= 0:
            raise SamplingBudgetError(
                f"rejection sampler exceeded its proposal budget of {budget} "
                f"({accepted}/{count} accepted)",
                accepted,
                proposals,
            )
        z = gen.standard_normal((m, split.dim))
        u = gen.random(m)
        keep = u < accept_fn(z)
        out.append(z[keep])
        accepted += int(keep.sum())
        proposals += m
    return np.concatenate(out, axis=0)[:count]


def sample_bad(
    split: GoodBadSplit,
    count: int,
    rng: RngStream,
    delta_prime_hint: float | None = None,
) -> np.ndarray:
    """Exact nu_bad samples: propose from mu, accept with probability weight_bad.

    The proposal budget is 10 * count / hint; the default hint 1.5 * delta sits
    inside the guaranteed range delta <= delta' <= 2 * delta, so the budget is
    always a comfortable multiple of the expected 1/delta' proposals per accept.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    hint = 1.5 * split.delta if delta_prime_hint is None else float(delta_prime_hint)
    budget = int(math.ceil(10.0 * count / hint))
    return _rejection_sample(split, count, rng, split.weight_bad, hint, budget)


def sample_good(
    split: GoodBadSplit,
    count: int,
    rng: RngStream,
    delta_prime_hint: float | None = None,
) -> np.ndarray:
    """Exact nu_good samples by rejection with acceptance 1 - weight_bad."""
    if count < 1:
        raise ValueError("count must be >= 1")
    hint = 1.5 * split.delta if delta_prime_hint is None else float(delta_prime_hint)
    rate = 1.0 - hint
    budget = int(math.ceil(10.0 * count / rate))
    return _rejection_sample(split, count, rng, split.weight_good, rate, budget)
