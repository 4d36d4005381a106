"""Centered Gaussian measures on R^d and their dilations.

A measure is represented by a lower-triangular Cholesky factor L of its
covariance (standard normal when L = I).  Whitening maps samples of a general
centered Gaussian to standard-normal coordinates, which is where every other
module in this package operates.  The dilated measure scales a base measure by
a factor n: it is the law of n*Z, i.e. it assigns a Borel set B the base mass
of B/n.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .rng import RngStream

_LOG_2PI = float(np.log(2.0 * np.pi))


class FactorizationError(ValueError):
    """Covariance is not symmetric positive definite.

    ``minor_index`` is the order of the first leading principal minor that
    fails to be positive definite (d for a full-rank but too-ill-conditioned
    matrix).
    """

    def __init__(self, message: str, minor_index: int):
        super().__init__(message)
        self.minor_index = minor_index


def _offending_minor(cov: np.ndarray) -> int:
    for k in range(1, cov.shape[0] + 1):
        try:
            np.linalg.cholesky(cov[:k, :k])
        except np.linalg.LinAlgError:
            return k
    return cov.shape[0]


@dataclass(frozen=True)
class WhiteningTransform:
    """Invertible map x -> L^{-1} x sending N(0, L L^T) to N(0, I)."""

    cov_factor: np.ndarray  # lower triangular, positive diagonal

    @property
    def dim(self) -> int:
        return self.cov_factor.shape[0]

    def apply(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            return scipy.linalg.solve_triangular(self.cov_factor, x, lower=True)
        return scipy.linalg.solve_triangular(self.cov_factor, x.T, lower=True).T

    def unapply(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        if z.ndim == 1:
            return self.cov_factor @ z
        return z @ self.cov_factor.T


def whiten(cov: np.ndarray, tol_spd: float = 1e-10) -> WhiteningTransform:
    """Factor an SPD covariance and return the whitening transform.

    Rejects matrices whose smallest eigenvalue is below tol_spd relative to
    the largest, raising FactorizationError naming the offending leading
    minor.
    """
    cov = np.asarray(cov, dtype=float)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise FactorizationError("covariance must be a square matrix", 0)
    if not np.allclose(cov, cov.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(cov).max())):
        raise FactorizationError("covariance must be symmetric", 0)
    eigs = np.linalg.eigvalsh(cov)
    if eigs[0] <= tol_spd * max(eigs[-1], 0.0):
        raise FactorizationError(
            f"covariance is not SPD at tolerance {tol_spd:g}: "
            f"{_offending_minor(cov)}-th leading minor is not positive definite "
            f"(eigenvalue range [{eigs[0]:.3e}, {eigs[-1]:.3e}])",
            _offending_minor(cov),
        )
    L = scipy.linalg.cholesky(cov, lower=True)
    return WhiteningTransform(cov_factor=L)


@dataclass(frozen=True)
class GaussianMeasure:
    """Centered Gaussian on R^dim with covariance L L^T."""

    dim: int
    cov_factor: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be a positive integer")
        L = self.cov_factor
        if L is None:
            L = np.eye(self.dim)
        L = np.asarray(L, dtype=float)
        if L.shape != (self.dim, self.dim):
            raise ValueError("cov_factor must be dim x dim")
        if np.any(np.diag(L) <= 0.0):
            raise FactorizationError("cov_factor needs a strictly positive diagonal", 0)
        object.__setattr__(self, "cov_factor", L)

    @classmethod
    def standard(cls, dim: int) -> "GaussianMeasure":
        return cls(dim=dim)

    @classmethod
    def from_covariance(cls, cov: np.ndarray, tol_spd: float = 1e-10) -> "GaussianMeasure":
        t = whiten(cov, tol_spd=tol_spd)
        return cls(dim=t.dim, cov_factor=t.cov_factor)

    def whitening(self) -> WhiteningTransform:
        return WhiteningTransform(self.cov_factor)

    def sample(self, count: int, rng: RngStream) -> np.ndarray:
        z = sample_std_normal(self.dim, count, rng)
        return z @ self.cov_factor.T

    def log_density(self, x: np.ndarray) -> np.ndarray | float:
        x = np.asarray(x, dtype=float)
        z = self.whitening().apply(x)
        quad = np.sum(np.square(z), axis=-1)
        logdet = float(np.sum(np.log(np.diag(self.cov_factor))))
        out = -0.5 * self.dim * _LOG_2PI - logdet - 0.5 * quad
        return float(out) if x.ndim == 1 else out


@dataclass(frozen=True)
class DilatedGaussian:
    """Law of n*Z for Z ~ base; assigns a Borel set B the base mass of B/n.

    n = 1 (the base measure itself) is allowed as a degenerate case for
    testing; the density-ratio machinery below requires n > 1.
    """

    base: GaussianMeasure
    n: float

    def __post_init__(self):
        if not self.n >= 1.0:
            raise ValueError("dilation factor n must be >= 1")

    @property
    def dim(self) -> int:
        return self.base.dim

    def log_density(self, x: np.ndarray) -> np.ndarray | float:
        x = np.asarray(x, dtype=float)
        return self.base.log_density(x / self.n) - self.dim * np.log(self.n)


def sample_std_normal(dim: int, count: int, rng: RngStream) -> np.ndarray:
    """count i.i.d. standard-normal vectors in R^dim, rows of a (count, dim) array."""
    if dim < 1 or count < 1:
        raise ValueError("dim and count must be positive")
    return rng.generator().standard_normal((count, dim))


def sample_dilated(d: DilatedGaussian, count: int, rng: RngStream) -> np.ndarray:
    return d.n * d.base.sample(count, rng)


def dilation_log_ratio(x: np.ndarray, n: float) -> np.ndarray | float:
    """Log of d(mu)/d(mu dilated by n) at x, up to a constant (0 at x = 0).

    Equals -((n^2 - 1) / (2 n^2)) * ||x||^2; defined for n > 1 only.
    """
    if not n > 1.0:
        raise ValueError("dilation log-ratio requires n > 1")
    x = np.asarray(x, dtype=float)
    coef = (n * n - 1.0) / (2.0 * n * n)
    out = -coef * np.sum(np.square(x), axis=-1)
    return float(out) if x.ndim == 1 else out
