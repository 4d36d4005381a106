"""Scenario configs: JSON ingestion, validation, and assembly into a split.

A scenario fixes the measure (identity / diagonal / full covariance), the
body, delta, the dilation factor n, per-check sample budgets, the seed and
the confidence level.  General covariances are whitened once at ingestion
and the body is pulled back through the whitening map, so every downstream
module works against a standard normal.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .bodies import Ellipsoid, L2Ball, LpBall, SymmetricConvexBody, SymmetricPolytope
from .cutoff import admissibility_slack
from .gaussian import FactorizationError, whiten
from .split import GoodBadSplit, make_split
from .verify import CHECK_IDS, DEFAULT_BUDGETS, complement_mass

BODY_KINDS = ("l2_ball", "l1_ball", "linf_ball", "ellipsoid", "polytope")
COVARIANCE_KINDS = ("identity", "diagonal", "full")


class ConfigError(ValueError):
    """Invalid scenario config; carries the offending field path."""

    def __init__(self, field_path: str, message: str):
        super().__init__(f"{field_path}: {message}")
        self.field_path = field_path


@dataclass(frozen=True)
class Scenario:
    name: str
    dim: int
    delta: float
    n: float
    seed: int
    body: dict
    covariance: dict = field(default_factory=lambda: {"kind": "identity"})
    confidence: float = 0.99
    budgets: dict = field(default_factory=dict)
    checks: tuple | None = None

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "dim": self.dim,
            "delta": self.delta,
            "n": self.n,
            "seed": self.seed,
            "body": self.body,
            "covariance": self.covariance,
            "confidence": self.confidence,
            "budgets": self.budgets,
        }
        if self.checks is not None:
            out["checks"] = list(self.checks)
        return out


def _require(cfg: dict, key: str, types, path: str):
    if key not in cfg:
        raise ConfigError(f"{path}{key}", "missing required field")
    v = cfg[key]
    if not isinstance(v, types) or isinstance(v, bool):
        raise ConfigError(f"{path}{key}", f"expected {types}, got {type(v).__name__}")
    return v


def parse_scenario_dict(cfg: dict) -> Scenario:
    if not isinstance(cfg, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    name = cfg.get("name", "scenario")
    if not isinstance(name, str):
        raise ConfigError("name", "must be a string")
    dim = _require(cfg, "dim", int, "")
    if dim < 1:
        raise ConfigError("dim", "must be a positive integer")
    delta = float(_require(cfg, "delta", (int, float), ""))
    if not 0.0 < delta < 0.5:
        raise ConfigError("delta", f"must lie in (0, 0.5), got {delta}")
    if admissibility_slack(delta) < 0.0:
        raise ConfigError(
            "delta",
            f"violates the smallness condition pi*(2*log(1/delta)+8) <= 1/delta (delta = {delta})",
        )
    n = float(_require(cfg, "n", (int, float), ""))
    if not n > 1.0:
        raise ConfigError("n", f"dilation requires n > 1, got {n}")
    seed = _require(cfg, "seed", int, "")
    confidence = float(cfg.get("confidence", 0.99))
    if not 0.0 < confidence < 1.0:
        raise ConfigError("confidence", "must lie in (0, 1)")

    cov = cfg.get("covariance", {"kind": "identity"})
    if not isinstance(cov, dict) or cov.get("kind") not in COVARIANCE_KINDS:
        raise ConfigError("covariance.kind", f"must be one of {COVARIANCE_KINDS}")
    if cov["kind"] == "diagonal":
        vals = _require(cov, "values", list, "covariance.")
        if len(vals) != dim or any(not isinstance(v, (int, float)) or v <= 0 for v in vals):
            raise ConfigError("covariance.values", f"needs {dim} positive numbers")
    if cov["kind"] == "full":
        mat = _require(cov, "matrix", list, "covariance.")
        if len(mat) != dim or any(len(row) != dim for row in mat):
            raise ConfigError("covariance.matrix", f"needs a {dim}x{dim} matrix")

    body = _require(cfg, "body", dict, "")
    kind = body.get("kind")
    if kind not in BODY_KINDS:
        raise ConfigError("body.kind", f"must be one of {BODY_KINDS}")
    if kind in ("l2_ball", "l1_ball", "linf_ball"):
        r = _require(body, "radius", (int, float), "body.")
        if r <= 0:
            raise ConfigError("body.radius", "must be > 0")
    elif kind == "ellipsoid":
        mat = _require(body, "matrix", list, "body.")
        if len(mat) != dim or any(len(row) != dim for row in mat):
            raise ConfigError("body.matrix", f"needs a {dim}x{dim} matrix")
    elif kind == "polytope":
        rows = _require(body, "rows", list, "body.")
        bounds = _require(body, "bounds", list, "body.")
        if len(rows) != len(bounds) or not rows:
            raise ConfigError("body.rows", "rows and bounds need equal positive lengths")
        if any(len(row) != dim for row in rows):
            raise ConfigError("body.rows", f"every row needs {dim} entries")
        if any(b <= 0 for b in bounds):
            raise ConfigError("body.bounds", "must be > 0")
    if "scale" in body and (not isinstance(body["scale"], (int, float)) or body["scale"] <= 0):
        raise ConfigError("body.scale", "must be > 0")
    if kind == "l1_ball" and cov["kind"] != "identity":
        raise ConfigError(
            "body.kind",
            "l1_ball supports identity covariance only (its whitened pullback is not a supported variant)",
        )

    budgets = cfg.get("budgets", {})
    if not isinstance(budgets, dict):
        raise ConfigError("budgets", "must be an object of check -> sample count")
    for k, v in budgets.items():
        if k not in DEFAULT_BUDGETS:
            raise ConfigError(f"budgets.{k}", f"unknown budget; known: {sorted(DEFAULT_BUDGETS)}")
        if not isinstance(v, int) or v <= 0:
            raise ConfigError(f"budgets.{k}", "must be a positive integer")

    checks = cfg.get("checks")
    if checks is not None:
        if not isinstance(checks, list) or any(c not in CHECK_IDS for c in checks):
            raise ConfigError("checks", f"must be a list drawn from {CHECK_IDS}")
        checks = tuple(checks)

    return Scenario(
        name=name,
        dim=dim,
        delta=delta,
        n=n,
        seed=seed,
        body=dict(body),
        covariance=dict(cov),
        confidence=confidence,
        budgets=dict(budgets),
        checks=checks,
    )


def load_scenario(path: str) -> Scenario:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except FileNotFoundError:
        raise ConfigError("<file>", f"config not found: {path}")
    except json.JSONDecodeError as e:
        raise ConfigError("<file>", f"invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}")
    return parse_scenario_dict(cfg)


def _raw_body(s: Scenario) -> SymmetricConvexBody:
    b = s.body
    kind = b["kind"]
    if kind == "l2_ball":
        body = L2Ball(radius=float(b["radius"]), dim=s.dim)
    elif kind == "l1_ball":
        body = LpBall(p=1.0, radius=float(b["radius"]), dim=s.dim)
    elif kind == "linf_ball":
        body = LpBall(p=math.inf, radius=float(b["radius"]), dim=s.dim)
    elif kind == "ellipsoid":
        body = Ellipsoid(A=np.asarray(b["matrix"], dtype=float))
    else:
        body = SymmetricPolytope(
            rows=np.asarray(b["rows"], dtype=float),
            bounds=np.asarray(b["bounds"], dtype=float),
        )
    if "scale" in b:
        body = body.scale(float(b["scale"]))
    return body


def _covariance_factor(s: Scenario) -> np.ndarray | None:
    cov = s.covariance
    if cov["kind"] == "identity":
        return None
    if cov["kind"] == "diagonal":
        return np.diag(np.sqrt(np.asarray(cov["values"], dtype=float)))
    try:
        return whiten(np.asarray(cov["matrix"], dtype=float)).cov_factor
    except FactorizationError as e:
        raise ConfigError("covariance.matrix", str(e))


def _pullback(body: SymmetricConvexBody, L: np.ndarray) -> SymmetricConvexBody:
    """Body L^{-1} K, so that whitened membership matches original membership."""
    from .bodies import ScaledBody

    if isinstance(body, ScaledBody):
        return _pullback(body.inner, L).scale(body.t)
    if isinstance(body, L2Ball):
        return Ellipsoid(A=(L.T @ L) / body.radius**2)
    if isinstance(body, Ellipsoid):
        return Ellipsoid(A=L.T @ body.A @ L)
    if isinstance(body, LpBall) and body.p == math.inf:
        return SymmetricPolytope(rows=L.copy(), bounds=np.full(body.dim, body.radius))
    if isinstance(body, SymmetricPolytope):
        return SymmetricPolytope(rows=body.rows @ L, bounds=body.bounds.copy())
    raise ConfigError("body.kind", f"no whitened pullback for {type(body).__name__}")


def build_split(s: Scenario) -> tuple[GoodBadSplit, tuple[float, bool]]:
    """Whiten the scenario and assemble the decomposition.

    Returns the split (in whitened coordinates) and the body's complement
    mass (value, is_exact) under the scenario measure.
    """
    body = _raw_body(s)
    L = _covariance_factor(s)
    if L is not None:
        body = _pullback(body, L)
    split = make_split(body, s.delta, s.n)
    return split, complement_mass(body)


# -- helpers for building scenario bodies with a prescribed complement mass --


def ball_radius_for_mass(dim: int, mass: float) -> float:
    """Radius of the centered ball with standard-normal complement mass `mass`."""
    from scipy import stats

    return float(np.sqrt(stats.chi2.ppf(1.0 - mass, df=dim)))


def box_radius_for_mass(dim: int, mass: float) -> float:
    """Half-width of the centered cube with complement mass exactly `mass`."""
    from scipy import stats

    per_coord = (1.0 - mass) ** (1.0 / dim)
    return float(-stats.norm.ppf(0.5 * (1.0 - per_coord)))


def polytope_scaled_to_mass(rows: np.ndarray, mass: float) -> SymmetricPolytope:
    """Scale slab bounds so the union bound on the complement mass equals `mass`."""
    from scipy import stats

    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    norms = np.linalg.norm(rows, axis=1)

    def union(t):
        return float((2.0 * stats.norm.sf(t / norms)).sum())

    lo, hi = 1e-6, 1.0
    while union(hi) > mass:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if union(mid) > mass:
            lo = mid
        else:
            hi = mid
    return SymmetricPolytope(rows=rows, bounds=np.full(len(rows), hi))


def reference_scenario(**overrides) -> Scenario:
    """The bundled d=3 ball scenario: delta = 0.01, n = 2, ball at the
    chi-square(3) 0.99-quantile radius."""
    base = Scenario(
        name="d3_ball_delta001_n2",
        dim=3,
        delta=0.01,
        n=2.0,
        seed=20260810,
        body={"kind": "l2_ball", "radius": ball_radius_for_mass(3, 0.01)},
    )
    return replace(base, **overrides) if overrides else base
