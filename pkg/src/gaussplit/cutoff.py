"""The C^2 cutoff driving the bad-component weight exp(-sigma(distance)).

The cutoff is a plateau followed by a quintic-smoothstep ramp down to zero:

    sigma(x) = plateau                         for x in [0, 1]
    sigma(x) = plateau * (1 - s((x-1)/L))      for x in (1, 1+L)
    sigma(x) = 0                               for x >= 1+L

with s(t) = 6t^5 - 15t^4 + 10t^3, the minimal-degree polynomial whose first
and second derivatives vanish at both ends.  The ramp length L is chosen so
that both derivative budgets hold:

    |sigma'(x)|  <= (x - 1) / c_bound   for x >= 1
    |sigma''(x)| <= 1 / c_bound        everywhere

The second budget is the binding one; it needs L^2 >= (10/sqrt(3)) * c_bound
* plateau, i.e. L >= 2.4028... * sqrt(c_bound * plateau).  We take the ramp
coefficient 2.404, slightly above, so the budget holds with a small margin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

RAMP_COEFF = 2.404  # > sqrt(10/sqrt(3)) ~ 2.40281, so the curvature budget binds with margin

_DELTA_STAR_TOL = 1e-12


class HypothesisError(ValueError):
    """An admissibility precondition on (delta, n) fails; message names the inequality."""


def admissibility_slack(delta: float) -> float:
    """Slack of the smallness condition on delta: 1/delta - pi*(2*log(1/delta) + 8)."""
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    return 1.0 / delta - math.pi * (2.0 * math.log(1.0 / delta) + 8.0)


def delta_star() -> float:
    """Largest delta satisfying the smallness condition, by bisection to 1e-12.

    The slack is strictly decreasing until delta ~ 0.159 and stays negative
    beyond, so the root in (0, 0.5) is unique.
    """
    lo, hi = 1e-8, 0.5
    while hi - lo > _DELTA_STAR_TOL:
        mid = 0.5 * (lo + hi)
        if admissibility_slack(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _smoothstep(t):
    return t * t * t * (t * (6.0 * t - 15.0) + 10.0)


def _smoothstep_complement(t):
    # 1 - s(t), computed as s(1 - t) to avoid cancellation when s(t) ~ 1
    return _smoothstep(1.0 - np.asarray(t, dtype=float))


def _smoothstep_d1(t):
    u = t * (1.0 - t)
    return 30.0 * u * u


def _smoothstep_d2(t):
    return 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t)


@dataclass(frozen=True)
class CutoffSigma:
    """Explicit plateau/ramp/tail cutoff with analytic derivatives.

    plateau   value on [0, 1]; equals log(1/delta) when built for a split
    c_bound   derivative budget constant (8 n^2 / (n^2 - 1) when built for a split)
    ramp_len  width of the smoothstep ramp
    """

    plateau: float
    c_bound: float
    ramp_len: float

    def __post_init__(self):
        if not (self.plateau > 0.0 and self.c_bound > 0.0 and self.ramp_len > 0.0):
            raise ValueError("plateau, c_bound and ramp_len must all be > 0")

    @property
    def r_scale(self) -> float:
        """Radius scale: sqrt of the plateau value."""
        return math.sqrt(self.plateau)

    @property
    def ramp_end(self) -> float:
        return 1.0 + self.ramp_len

    @property
    def support_end(self) -> float:
        """The cutoff is required to vanish from 3 * c_bound * r_scale on."""
        return 3.0 * self.c_bound * self.r_scale

    def eval(self, x):
        """sigma(x); accepts a scalar or an array, x >= 0."""
        xa = np.asarray(x, dtype=float)
        if np.any(xa < 0.0):
            raise ValueError("sigma is defined on [0, inf) only")
        t = np.clip((xa - 1.0) / self.ramp_len, 0.0, 1.0)
        out = np.where(
            xa <= 1.0,
            self.plateau,
            np.where(xa >= self.ramp_end, 0.0, self.plateau * _smoothstep_complement(t)),
        )
        return float(out) if xa.ndim == 0 else out

    __call__ = eval

    def derivs(self, x):
        """(sigma'(x), sigma''(x)), analytic and piecewise; zero on plateau and tail."""
        xa = np.asarray(x, dtype=float)
        if np.any(xa < 0.0):
            raise ValueError("sigma is defined on [0, inf) only")
        t = np.clip((xa - 1.0) / self.ramp_len, 0.0, 1.0)
        on_ramp = (xa > 1.0) & (xa < self.ramp_end)
        d1 = np.where(on_ramp, -self.plateau * _smoothstep_d1(t) / self.ramp_len, 0.0)
        d2 = np.where(on_ramp, -self.plateau * _smoothstep_d2(t) / self.ramp_len**2, 0.0)
        if xa.ndim == 0:
            return float(d1), float(d2)
        return d1, d2


def build_sigma(delta: float, n: float) -> CutoffSigma:
    """Construct the cutoff for a given mass bound delta and dilation factor n.

    Requires delta < 0.5 with pi*(2*log(1/delta) + 8) <= 1/delta, and n > 1.
    """
    if not n > 1.0:
        raise HypothesisError(f"dilation factor must satisfy n > 1, got n = {n}")
    if not 0.0 < delta < 0.5:
        raise HypothesisError(f"delta must satisfy 0 < delta < 0.5, got delta = {delta}")
    slack = admissibility_slack(delta)
    if slack < 0.0:
        raise HypothesisError(
            f"delta = {delta} violates pi*(2*log(1/delta) + 8) <= 1/delta "
            f"(slack {slack:.6g}; largest admissible delta is {delta_star():.6g})"
        )
    plateau = math.log(1.0 / delta)
    c_bound = 8.0 * n * n / (n * n - 1.0)
    ramp_len = RAMP_COEFF * math.sqrt(plateau) * math.sqrt(c_bound)
    sig = CutoffSigma(plateau=plateau, c_bound=c_bound, ramp_len=ramp_len)
    assert sig.ramp_end <= sig.support_end, "ramp must finish inside the required support"
    return sig
