"""Origin-symmetric closed convex bodies with membership / projection oracles.

Every body exposes the same small oracle set: membership (with a fixed
boundary tolerance), Euclidean projection, distance, exact inradius, the
Minkowski gauge, and scaling.  Scalar calls take a (d,) vector; the *_many
variants take an (N, d) array and are the performance path for Monte Carlo
work.

Projections are exact (closed form) for balls and boxes, solved by a
safeguarded Newton iteration for ellipsoids, and by Dykstra's alternating
projection scheme for slab intersections.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

BOUNDARY_TOL = 1e-9

_DYKSTRA_TOL = 1e-10
_DYKSTRA_MAX_ITER = 10**5


class ConvergenceError(RuntimeError):
    """Iterative projection ran out of iterations.

    Carries the last iterate and the worst constraint residual so callers
    can inspect how close the failure was.
    """

    def __init__(self, message: str, last_iterate: np.ndarray, residual: float):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual = residual


def _as_batch(x) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        return x[None, :], True
    if x.ndim == 2:
        return x, False
    raise ValueError("expected a (d,) vector or an (N, d) batch")


class SymmetricConvexBody:
    """Common oracle interface; concrete variants implement the batch methods."""

    dim: int

    def _check_dim(self, X: np.ndarray):
        if X.shape[-1] != self.dim:
            raise ValueError(f"dimension mismatch: body is {self.dim}-dimensional, point has {X.shape[-1]}")

    # -- batch oracles (implemented by variants) --------------------------
    def contains_many(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def project_many(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def gauge_many(self, X: np.ndarray) -> np.ndarray:
        """Minkowski functional: smallest t >= 0 with x in t*K (0 if the ray never exits)."""
        raise NotImplementedError

    def distance_many(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        self._check_dim(X)
        return np.linalg.norm(X - self.project_many(X), axis=1)

    # -- scalar wrappers ---------------------------------------------------
    def contains(self, x) -> bool:
        X, _ = _as_batch(x)
        self._check_dim(X)
        return bool(self.contains_many(X)[0])

    def project(self, x) -> np.ndarray:
        X, scalar = _as_batch(x)
        self._check_dim(X)
        P = self.project_many(X)
        return P[0] if scalar else P

    def distance(self, x) -> float:
        X, _ = _as_batch(x)
        self._check_dim(X)
        return float(self.distance_many(X)[0])

    def gauge(self, x) -> float:
        X, _ = _as_batch(x)
        self._check_dim(X)
        return float(self.gauge_many(X)[0])

    def inradius(self) -> float:
        raise NotImplementedError

    def scale(self, t: float) -> "SymmetricConvexBody":
        if not t > 0.0:
            raise ValueError("scale factor must be > 0")
        return ScaledBody(inner=self, t=float(t))


@dataclass(frozen=True)
class L2Ball(SymmetricConvexBody):
    radius: float
    dim: int

    def __post_init__(self):
        if not self.radius > 0.0:
            raise ValueError("radius must be > 0")

    def contains_many(self, X):
        X = np.asarray(X, dtype=float)
        self._check_dim(X)
        return np.linalg.norm(X, axis=1) <= self.radius + BOUNDARY_TOL

    def project_many(self, X):
        X = np.asarray(X, dtype=float)
        self._check_dim(X)
        nrm = np.linalg.norm(X, axis=1)
        f = np.where(nrm > self.radius, self.radius / np.maximum(nrm, 1e-300), 1.0)
        return X * f[:, None]

    def distance_many(self, X):
        X = np.asarray(X, dtype=float)
        self._check_dim(X)
        return np.maximum(np.linalg.norm(X, axis=1) - self.radius, 0.0)

    def gauge_many(self, X):
        X = np.asarray(X, dtype=float)
        self._check_dim(X)
        return np.linalg.norm(X, axis=1) / self.radius

    def inradius(self) -> float:
        return self.radius


@dataclass(frozen=True)
class LpBall(SymmetricConvexBody):
    """l1 cross-polytope or l-infinity box of the given radius."""

    p: float
    radius: float
    dim: int

    def __post_init__(self):
        if self.p not in (1.0, math.inf):
            raise ValueError("p must be 1 or inf")
        if not self.radius > 0.0:
            raise ValueError("radius must be > 0")

    def _norms(self, X):
        if self.p == 1.0:
            return np.abs(X).sum(axis=1)
        return np.abs(X).max(axis=1)

    def contains_many(self, X):
        X = np.asarray(X, dtype=float)
        self._check_dim(X)
        return self._norms(X) <= self.radius + BOUNDARY_TOL

    def project_many(self, X):
        X = np.asarray(X, dtype=float)
        self._check_dim(X)
        if self.p == math.inf:
            return np.clip(X, -self.radius, self.radius)
        return _project_l1_ball(X, self.radius)

    def gauge_many(self, X):
        X = np.asarray(X, dtype=float)
        self._check_dim(X)
        return self._norms(X) / self.radius

    def inradius(self) -> float:
        if self.p == math.inf:
            return self.radius
        return self.radius / math.sqrt(self.dim)


def _project_l1_ball(X: np.ndarray, radius: float) -> np.ndarray:
    """Row-wise Euclidean projection onto the l1 ball (sort-based threshold rule)."""
    A = np.abs(X)
    inside = A.sum(axis=1) <= radius
    out = X.copy()
    if np.all(inside):
        return out
    B = A[~inside]
    S = -np.sort(-B, axis=1)  # descending
    css = np.cumsum(S, axis=1) - radius
    k = np.arange(1, X.shape[1] + 1)
    cond = S - css / k > 0.0
    rho = cond.shape[1] - 1 - np.argmax(cond[:, ::-1], axis=1)
    theta = css[np.arange(len(B)), rho] / (rho + 1.0)
    shrunk = np.maximum(B - theta[:, None], 0.0) * np.sign(X[~inside])
    out[~inside] = shrunk
    return out


@dataclass(frozen=True, eq=False)
class Ellipsoid(SymmetricConvexBody):
    """Body {x : x^T A x <= 1} for SPD A."""

    A: np.ndarray
    _eigvals: np.ndarray = field(init=False, repr=False, compare=False)
    _eigvecs: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("A must be square")
        if not np.allclose(A, A.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(A).max())):
            raise ValueError("A must be symmetric")
        lam, Q = np.linalg.eigh(A)
        if lam[0] <= 0.0:
            raise ValueError("A must be positive definite")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "_eigvals", lam)
        object.__setattr__(self, "_eigvecs", Q)

    @property
    def dim(self) -> int:  # type: ignore[override]
        return self.A.shape[0]

    def _quad(self, X):
        Y = X @ self._eigvecs
        return (self._eigvals * Y * Y).sum(axis=1)

    def contains_many(self, X):
        X = np.asarray(X, dtype=float)
        self._check_dim(X)
        return self._quad(X) <= 1.0 + BOUNDARY_TOL

    def gauge_many(self, X):
        X = np.asarray(X, dtype=float)
        self._check_dim(X)
        return np.sqrt(self._quad(X))

    def project_many(self, X):
        """KKT system in the eigenbasis: u = y/(1 + t*lam) with the unique t >= 0
        solving sum(lam * u^2) = 1; Newton on t with a bisection safeguard."""
        X = np.asarray(X, dtype=float)
        self._check_dim(X)
        lam = self._eigvals
        Y = X @ self._eigvecs
        q0 = (lam * Y * Y).sum(axis=1)
        outside = q0 > 1.0
        if not np.any(outside):
            return X.copy()
        Yo = Y[outside]

        def g_and_dg(t):
            den = 1.0 + t[:, None] * lam
            w = lam * Yo * Yo / (den * den)
            return w.sum(axis=1) - 1.0, -2.0 * (w * lam / den).sum(axis=1)

        t = np.zeros(len(Yo))
        lo = np.zeros(len(Yo))
        hi = np.ones(len(Yo))
        while True:
            g_hi, _ = g_and_dg(hi)
            grow = g_hi > 0.0
            if not grow.any():
                break
            hi[grow] *= 2.0
        for _ in range(200):
            g, dg = g_and_dg(t)
            lo = np.where(g > 0.0, t, lo)
            hi = np.where(g < 0.0, t, hi)
            t_new = t - g / dg
            bad = ~((t_new > lo) & (t_new < hi))
            t_new = np.where(bad, 0.5 * (lo + hi), t_new)
            if np.all(np.abs(t_new - t) <= 1e-15 * (1.0 + np.abs(t))):
                t = t_new
                break
            t = t_new
        U = Yo / (1.0 + t[:, None] * lam)
        P = Y.copy()
        P[outside] = U
        return P @ self._eigvecs.T

    def inradius(self) -> float:
        return 1.0 / math.sqrt(self._eigvals[-1])


@dataclass(frozen=True, eq=False)
class SymmetricPolytope(SymmetricConvexBody):
    """Intersection of symmetric slabs {x : |<a_i, x>| <= b_i}."""

    rows: np.ndarray
    bounds: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.rows, dtype=float))
        b = np.atleast_1d(np.asarray(self.bounds, dtype=float))
        if A.shape[0] != b.shape[0]:
            raise ValueError("rows and bounds must have matching lengths")
        norms = np.linalg.norm(A, axis=1)
        if np.any(norms == 0.0):
            raise ValueError("every slab normal must be nonzero")
        if np.any(b <= 0.0):
            raise ValueError("slab bounds must be > 0")
        object.__setattr__(self, "rows", A)
        object.__setattr__(self, "bounds", b)

    @property
    def dim(self) -> int:  # type: ignore[override]
        return self.rows.shape[1]

    def _residuals(self, X):
        # worst slab violation in Euclidean units
        norms = np.linalg.norm(self.rows, axis=1)
        return ((np.abs(X @ self.rows.T) - self.bounds) / norms).max(axis=1)

    def contains_many(self, X):
        X = np.asarray(X, dtype=float)
        self._check_dim(X)
        return self._residuals(X) <= BOUNDARY_TOL

    def gauge_many(self, X):
        X = np.asarray(X, dtype=float)
        self._check_dim(X)
        return (np.abs(X @ self.rows.T) / self.bounds).max(axis=1)

    def project_many(self, X):
        X = np.asarray(X, dtype=float)
        self._check_dim(X)
        inside = self._residuals(X) <= 0.0
        P = X.copy()
        idx = np.flatnonzero(~inside)
        chunk = max(2048, 10**7 // (len(self.bounds) * self.dim))
        for s in range(0, len(idx), chunk):
            sel = idx[s : s + chunk]
            P[sel] = _dykstra_batch(self.rows, self.bounds, X[sel], _DYKSTRA_TOL, _DYKSTRA_MAX_ITER)
        return P

    def inradius(self) -> float:
        return float((self.bounds / np.linalg.norm(self.rows, axis=1)).min())


@dataclass(frozen=True)
class ScaledBody(SymmetricConvexBody):
    """The dilation t*K of an inner body K; all oracles pass through x/t."""

    inner: SymmetricConvexBody
    t: float

    def __post_init__(self):
        if not self.t > 0.0:
            raise ValueError("scale factor must be > 0")

    @property
    def dim(self) -> int:  # type: ignore[override]
        return self.inner.dim

    def contains_many(self, X):
        return self.inner.contains_many(np.asarray(X, dtype=float) / self.t)

    def project_many(self, X):
        return self.t * self.inner.project_many(np.asarray(X, dtype=float) / self.t)

    def distance_many(self, X):
        return self.t * self.inner.distance_many(np.asarray(X, dtype=float) / self.t)

    def gauge_many(self, X):
        return self.inner.gauge_many(np.asarray(X, dtype=float)) / self.t

    def inradius(self) -> float:
        return self.t * self.inner.inradius()

    def scale(self, t: float) -> "SymmetricConvexBody":
        if not t > 0.0:
            raise ValueError("scale factor must be > 0")
        return ScaledBody(inner=self.inner, t=self.t * t)


def _slab_project(Y: np.ndarray, a: np.ndarray, b: float, norm2: float) -> np.ndarray:
    al = Y @ a
    clipped = np.clip(al, -b, b)
    return Y - np.outer((al - clipped) / norm2, a)


def _dykstra_batch(A, b, X0, tol, max_iter):
    norms2 = (A * A).sum(axis=1)
    X = X0.copy()
    Q = np.zeros((len(b),) + X.shape)
    norms = np.sqrt(norms2)
    for sweep in range(max_iter):
        X_prev = X
        for i in range(len(b)):
            Y = X + Q[i]
            X = _slab_project(Y, A[i], b[i], norms2[i])
            Q[i] = Y - X
        change = np.abs(X - X_prev).max()
        if change < tol:
            resid = float(((np.abs(X @ A.T) - b) / norms).max())
            if resid < 10.0 * tol:
                return X
    resid = float(((np.abs(X @ A.T) - b) / norms).max())
    raise ConvergenceError(
        f"Dykstra projection did not converge in {max_iter} sweeps (residual {resid:.3e})",
        X[0] if len(X) == 1 else X,
        resid,
    )


def dykstra_project(
    poly: SymmetricPolytope,
    x,
    tol: float = _DYKSTRA_TOL,
    max_iter: int = _DYKSTRA_MAX_ITER,
) -> np.ndarray:
    """Project x onto a slab intersection by Dykstra's alternating scheme.

    Each slab is projected in closed form; raises ConvergenceError (with the
    last iterate and residual attached) if max_iter sweeps are exhausted.
    """
    if not tol > 0.0:
        raise ValueError("tol must be > 0")
    X, scalar = _as_batch(x)
    poly._check_dim(X)
    P = _dykstra_batch(poly.rows, poly.bounds, X, tol, max_iter)
    return P[0] if scalar else P
