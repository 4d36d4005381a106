import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import minimize

from gaussplit.bodies import (
    ConvergenceError,
    Ellipsoid,
    L2Ball,
    LpBall,
    ScaledBody,
    SymmetricPolytope,
    dykstra_project,
)


def all_variants():
    gen = np.random.default_rng(123)
    rows = gen.standard_normal((5, 3))
    return [
        L2Ball(radius=1.7, dim=3),
        LpBall(p=math.inf, radius=1.2, dim=3),
        LpBall(p=1.0, radius=2.0, dim=3),
        Ellipsoid(A=np.diag([1.0, 4.0, 0.25])),
        SymmetricPolytope(rows=rows, bounds=np.abs(gen.standard_normal(5)) + 0.8),
        ScaledBody(inner=L2Ball(radius=0.9, dim=3), t=2.5),
    ]


# -- membership -------------------------------------------------------------


def test_contains_center_and_outside():
    ball = L2Ball(radius=1.0, dim=2)
    assert ball.contains(np.zeros(2))
    assert not ball.contains(np.array([2.0, 0.0]))


def test_contains_box_boundary():
    box = SymmetricPolytope(rows=np.eye(2), bounds=np.ones(2))
    assert box.contains(np.array([1.0, 1.0]))


def test_dimension_mismatch():
    with pytest.raises(ValueError, match="dimension mismatch"):
        L2Ball(radius=1.0, dim=3).contains(np.zeros(2))


# -- projection -------------------------------------------------------------


def test_project_ball_radial():
    p = L2Ball(radius=1.0, dim=2).project(np.array([3.0, 0.0]))
    np.testing.assert_allclose(p, [1.0, 0.0], atol=1e-14)


def test_project_ellipsoid_known_point():
    # boundary grid-search oracle over {(cos t, sin t / 2)} puts the argmin at (1, 0)
    e = Ellipsoid(A=np.diag([1.0, 4.0]))
    t = np.linspace(0, 2 * np.pi, 400_000)
    boundary = np.stack([np.cos(t), 0.5 * np.sin(t)], axis=1)
    q = np.array([2.0, 0.0])
    oracle = boundary[np.argmin(np.linalg.norm(boundary - q, axis=1))]
    p = e.project(q)
    np.testing.assert_allclose(p, oracle, atol=1e-4)
    np.testing.assert_allclose(p, [1.0, 0.0], atol=1e-9)


def test_project_box_clamp():
    box = LpBall(p=math.inf, radius=1.0, dim=2)
    np.testing.assert_allclose(box.project(np.array([2.0, 3.0])), [1.0, 1.0], atol=1e-14)


def test_project_is_idempotent_and_feasible():
    gen = np.random.default_rng(7)
    for body in all_variants():
        x = gen.standard_normal((100, 3)) * 4.0
        p = body.project_many(x)
        assert body.contains_many(p).all()
        np.testing.assert_allclose(body.project_many(p), p, atol=1e-9)


def test_projection_dominates_random_feasible_points():
    gen = np.random.default_rng(11)
    for body in all_variants():
        q = gen.standard_normal(3) * 6.0
        p = body.project(q)
        # any feasible point is no closer to q than the projection
        y = gen.uniform(-3, 3, size=(3000, 3))
        y = y[body.contains_many(y)]
        assert len(y) > 10
        assert np.all(np.linalg.norm(y - q, axis=1) >= np.linalg.norm(p - q) - 1e-9)


def test_projection_matches_slsqp():
    gen = np.random.default_rng(5)
    for body in all_variants():
        if isinstance(body, LpBall) and body.p == math.inf:
            continue
        q = gen.standard_normal(3) * 5.0
        p = body.project(q)

        cons = [{"type": "ineq", "fun": lambda z: 1.0 + 1e-12 - body.gauge(z) ** 2}]
        res = minimize(
            lambda z: float(((z - q) ** 2).sum()),
            p,
            constraints=cons,
            method="SLSQP",
            options={"ftol": 1e-14, "maxiter": 300},
        )
        np.testing.assert_allclose(p, res.x, atol=1e-5)


# -- distance ---------------------------------------------------------------


def test_distance_zero_inside():
    for body in all_variants():
        assert body.distance(np.zeros(3)) == 0.0


def test_distance_radial_case():
    assert L2Ball(radius=1.0, dim=3).distance(np.array([3.0, 0.0, 0.0])) == pytest.approx(2.0, abs=1e-14)


def test_distance_box_corner():
    # clamp oracle: projection of (2, 2) onto [-1, 1]^2 is (1, 1)
    box = LpBall(p=math.inf, radius=1.0, dim=2)
    assert box.distance(np.array([2.0, 2.0])) == pytest.approx(math.sqrt(2.0), abs=1e-14)


def test_distance_zero_iff_contains():
    gen = np.random.default_rng(3)
    for body in all_variants():
        x = gen.standard_normal((500, 3)) * 3.0
        d = body.distance_many(x)
        inside = body.contains_many(x)
        assert np.all(d[inside] <= 1e-9)
        assert np.all(d[~inside] > 0.0)


# -- inradius ---------------------------------------------------------------


def test_inradius_values():
    assert L2Ball(radius=2.0, dim=3).inradius() == 2.0
    assert LpBall(p=math.inf, radius=1.5, dim=4).inradius() == 1.5
    # l1 ball: distance from the origin to the facet {sum x_i = r} is r / sqrt(d)
    assert LpBall(p=1.0, radius=1.0, dim=2).inradius() == pytest.approx(1 / math.sqrt(2), abs=1e-15)
    assert Ellipsoid(A=np.diag([1.0, 4.0])).inradius() == pytest.approx(0.5, abs=1e-15)


def test_inradius_slab():
    # minimize ||x|| over the slab boundary x1 + x2 = 2: the minimum is sqrt(2)
    poly = SymmetricPolytope(rows=np.array([[1.0, 1.0]]), bounds=np.array([2.0]))
    t = np.linspace(-50, 50, 200_001)
    boundary = np.stack([t, 2.0 - t], axis=1)
    oracle = np.linalg.norm(boundary, axis=1).min()
    assert poly.inradius() == pytest.approx(oracle, abs=1e-6)
    assert poly.inradius() == pytest.approx(math.sqrt(2.0), abs=1e-14)


def test_inradius_ball_fits(rng):
    gen = rng.generator()
    for body in all_variants():
        r = body.inradius()
        u = gen.standard_normal((2000, 3))
        pts = r * (1 - 1e-12) * u / np.linalg.norm(u, axis=1)[:, None]
        assert body.contains_many(pts).all()


# -- scaling ----------------------------------------------------------------


def test_scale_identity():
    body = L2Ball(radius=1.0, dim=2)
    gen = np.random.default_rng(0)
    x = gen.standard_normal((200, 2)) * 2
    np.testing.assert_array_equal(body.scale(1.0).contains_many(x), body.contains_many(x))


def test_scale_inradius():
    assert L2Ball(radius=1.0, dim=3).scale(3.0).inradius() == pytest.approx(3.0, abs=1e-15)
    for body in all_variants():
        assert body.scale(2.0).inradius() == pytest.approx(2.0 * body.inradius(), rel=1e-12)


def test_scale_membership_pullback():
    gen = np.random.default_rng(1)
    for body in all_variants():
        t = 2.3
        x = gen.standard_normal((300, 3)) * 3
        np.testing.assert_array_equal(body.scale(t).contains_many(x), body.contains_many(x / t))


def test_scale_distance_homogeneity():
    # homogeneity oracle via direct projection: d(tK, t x) = t d(K, x)
    gen = np.random.default_rng(2)
    for body in all_variants():
        t = 1.8
        x = gen.standard_normal((50, 3)) * 5
        np.testing.assert_allclose(
            body.scale(t).distance_many(t * x), t * body.distance_many(x), atol=1e-9
        )


def test_scaled_body_collapses():
    s = L2Ball(radius=1.0, dim=2).scale(2.0).scale(3.0)
    assert isinstance(s, ScaledBody)
    assert s.t == pytest.approx(6.0)
    with pytest.raises(ValueError):
        L2Ball(radius=1.0, dim=2).scale(-1.0)


# -- dykstra ----------------------------------------------------------------


def test_dykstra_single_slab_closed_form():
    poly = SymmetricPolytope(rows=np.array([[0.0, 2.0]]), bounds=np.array([1.0]))
    x = np.array([3.0, 4.0])
    # slab |2 x2| <= 1: closed form clips x2 at 0.5
    np.testing.assert_allclose(dykstra_project(poly, x), [3.0, 0.5], atol=1e-12)


def test_dykstra_axis_box_matches_clamp():
    poly = SymmetricPolytope(rows=np.eye(3), bounds=np.ones(3))
    gen = np.random.default_rng(4)
    x = gen.standard_normal((100, 3)) * 3
    np.testing.assert_allclose(dykstra_project(poly, x), np.clip(x, -1, 1), atol=1e-10)


def test_dykstra_random_polytope_against_boundary_oracle():
    gen = np.random.default_rng(42)
    rows = gen.standard_normal((5, 3))
    poly = SymmetricPolytope(rows=rows, bounds=np.abs(gen.standard_normal(5)) + 0.5)
    q = gen.standard_normal(3) * 6
    p = dykstra_project(poly, q, tol=1e-10)
    # dense boundary discretization: points u / gauge(u) over many directions
    u = gen.standard_normal((200_000, 3))
    g = poly.gauge_many(u)
    boundary = u / g[:, None]
    d_oracle = np.linalg.norm(boundary - q, axis=1).min()
    assert abs(np.linalg.norm(p - q) - d_oracle) < 2e-3
    assert np.linalg.norm(p - q) <= d_oracle + 1e-9


def test_dykstra_budget_exhaustion():
    gen = np.random.default_rng(6)
    rows = gen.standard_normal((4, 3))
    poly = SymmetricPolytope(rows=rows, bounds=np.full(4, 0.3))
    with pytest.raises(ConvergenceError) as exc:
        dykstra_project(poly, np.array([10.0, -7.0, 3.0]), tol=1e-14, max_iter=2)
    assert exc.value.last_iterate.shape == (3,)
    assert exc.value.residual >= 0.0

    with pytest.raises(ValueError):
        dykstra_project(poly, np.zeros(3), tol=0.0)


# -- shared invariants -------------------------------------------------------


def test_projection_nonexpansive():
    gen = np.random.default_rng(8)
    for body in all_variants():
        x = gen.standard_normal((200, 3)) * 4
        z = gen.standard_normal((200, 3)) * 4
        lhs = np.linalg.norm(body.project_many(x) - body.project_many(z), axis=1)
        rhs = np.linalg.norm(x - z, axis=1)
        assert np.all(lhs <= rhs + 1e-9)


def test_distance_is_convex_on_midpoints():
    gen = np.random.default_rng(9)
    for body in all_variants():
        x = gen.standard_normal((300, 3)) * 5
        z = gen.standard_normal((300, 3)) * 5
        mid = body.distance_many(0.5 * (x + z))
        assert np.all(mid <= 0.5 * (body.distance_many(x) + body.distance_many(z)) + 1e-9)


def test_distance_symmetry():
    gen = np.random.default_rng(10)
    for body in all_variants():
        x = gen.standard_normal((300, 3)) * 5
        assert np.max(np.abs(body.distance_many(x) - body.distance_many(-x))) <= 1e-10


def test_distance_is_1_lipschitz():
    gen = np.random.default_rng(12)
    for body in all_variants():
        x = gen.standard_normal((300, 3)) * 5
        z = x + gen.standard_normal((300, 3))
        gap = np.abs(body.distance_many(x) - body.distance_many(z))
        assert np.all(gap <= np.linalg.norm(x - z, axis=1) + 1e-9)


def test_outside_scaling_distance_bound():
    gen = np.random.default_rng(13)
    for body in all_variants():
        c = gen.uniform(1.1, 5.0, size=200)
        u = gen.standard_normal((200, 3))
        g = body.gauge_many(u)
        x = u * (c * 1.0000001 / g)[:, None]  # just outside c * K
        d = body.distance_many(x)
        assert np.all(d >= (c - 1.0) * body.inradius() - 1e-9)


def test_gauge_consistency():
    gen = np.random.default_rng(14)
    for body in all_variants():
        x = gen.standard_normal((300, 3)) * 3
        g = body.gauge_many(x)
        inside = body.contains_many(x)
        assert np.all(g[inside] <= 1.0 + 1e-6)
        assert np.all(g[~inside] > 1.0)


# -- hypothesis properties ---------------------------------------------------

vec2 = st.tuples(
    st.floats(-5, 5, allow_nan=False), st.floats(-5, 5, allow_nan=False)
).map(np.array)


@settings(max_examples=60, deadline=None)
@given(x=vec2)
def test_box_projection_is_clamp(x):
    box = LpBall(p=math.inf, radius=1.0, dim=2)
    np.testing.assert_allclose(box.project(x), np.clip(x, -1, 1), atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(x=vec2)
def test_symmetry_of_membership(x):
    for body in (L2Ball(radius=1.3, dim=2), LpBall(p=1.0, radius=1.1, dim=2)):
        assert body.contains(x) == body.contains(-x)


@settings(max_examples=60, deadline=None)
@given(x=vec2, t=st.floats(0.1, 10.0))
def test_gauge_homogeneity(x, t):
    body = LpBall(p=1.0, radius=1.5, dim=2)
    assert body.gauge(t * x) == pytest.approx(t * body.gauge(x), rel=1e-12, abs=1e-12)
