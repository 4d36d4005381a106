import math

import numpy as np
import pytest

from gaussplit.bodies import L2Ball
from gaussplit.rng import RngStream
from gaussplit.split import (
    GoodBadSplit,
    SamplingBudgetError,
    estimate_delta_prime,
    make_split,
    sample_bad,
    sample_good,
)


class ConstSigma:
    """Test double: a constant cutoff (not a valid CutoffSigma)."""

    def __init__(self, value, c_bound=32.0 / 3.0):
        self.plateau = value
        self.c_bound = c_bound

    def eval(self, x):
        return np.full(np.shape(x), float(self.plateau))


def test_make_split_consistency(ref_split):
    assert ref_split.c_thm == pytest.approx(4.0 * ref_split.sigma.c_bound, rel=1e-15)
    assert ref_split.c_thm == pytest.approx(128.0 / 3.0, rel=1e-12)
    assert ref_split.sigma.plateau == pytest.approx(math.log(1.0 / ref_split.delta), abs=1e-12)


def test_make_split_rejects_n_at_most_one():
    with pytest.raises(Exception, match="n > 1"):
        make_split(L2Ball(radius=3.0, dim=2), 0.01, 1.0)


def test_weight_bad_on_body_is_delta(ref_split):
    # distance 0 puts sigma at its plateau log(1/delta), so the weight is delta
    for x in (np.zeros(3), np.array([1.0, -1.0, 0.5])):
        assert ref_split.weight_bad(x) == pytest.approx(ref_split.delta, rel=1e-12)


def test_weight_bad_far_out_is_one(ref_split):
    far = np.array([ref_split.sigma.support_end + 10.0, 0.0, 0.0])
    assert ref_split.weight_bad(far) == 1.0
    assert ref_split.weight_good(far) == 0.0


def test_weight_bad_ramp_midpoint_is_sqrt_delta(ref_split):
    r = ref_split.body.radius
    x = np.array([r + 1.0 + ref_split.sigma.ramp_len / 2.0, 0.0, 0.0])
    assert ref_split.weight_bad(x) == pytest.approx(math.sqrt(ref_split.delta), rel=1e-12)


def test_weights_sum_to_one_exactly(ref_split, rng):
    X = rng.generator().standard_normal((1000, 3)) * 5.0
    total = ref_split.weight_bad(X) + ref_split.weight_good(X)
    assert np.all(total == 1.0)


def test_estimate_constant_weight_one():
    split = GoodBadSplit(body=L2Ball(radius=1.0, dim=2), sigma=ConstSigma(0.0), n=2.0, delta=0.5)
    est = estimate_delta_prime(split, 2000, 0.99, RngStream(1))
    assert est.point_estimate == 1.0
    assert est.ci_low == est.ci_high == 1.0


def test_estimate_reference_scenario(ref_split):
    est = estimate_delta_prime(ref_split, 10**6, 0.99, RngStream(42, 9))
    assert est.ci_high <= 2.0 * ref_split.delta
    assert est.point_estimate >= ref_split.delta * (1.0 - ref_split.delta)
    assert est.ci_low <= est.point_estimate <= est.ci_high
    assert est.sample_count == 10**6


def test_estimate_validation(ref_split):
    with pytest.raises(ValueError):
        estimate_delta_prime(ref_split, 10, 0.99, RngStream(0))
    with pytest.raises(ValueError):
        estimate_delta_prime(ref_split, 2000, 1.5, RngStream(0))


def test_sample_bad_symmetric_mean(split_1d):
    x = sample_bad(split_1d, 30_000, RngStream(3, 1))
    assert x.shape == (30_000, 1)
    # nu_bad is symmetric; its mean vanishes
    assert abs(x.mean()) < 4.0 * x.std() / math.sqrt(len(x))


def test_sample_bad_pushes_mass_outward(ref_split):
    # common-random-numbers comparison of E||x||^2 under nu_bad vs mu: the
    # weight increases with distance, so the reweighted second moment is larger
    gen = RngStream(11, 1).generator()
    n = 4_000_000
    X = gen.standard_normal((n, 3))
    w = ref_split.weight_bad(X)
    q = (X * X).sum(axis=1)
    diff = float(np.dot(w, q) / w.sum() - q.mean())
    psi = w * (q - np.dot(w, q) / w.sum()) / w.mean() - (q - q.mean())
    se = psi.std(ddof=1) / math.sqrt(n)
    assert diff > 3.0 * se > 0.0

    # and the rejection sampler agrees with the reweighted estimate
    xs = sample_bad(ref_split, 50_000, RngStream(11, 2))
    m2 = (xs * xs).sum(axis=1)
    assert m2.mean() == pytest.approx(np.dot(w, q) / w.sum(), abs=4.0 * m2.std() / math.sqrt(len(m2)))


def test_sampler_with_unit_weight_accepts_everything():
    split = GoodBadSplit(body=L2Ball(radius=1.0, dim=2), sigma=ConstSigma(0.0), n=2.0, delta=0.5)
    x = sample_bad(split, 5000, RngStream(5), delta_prime_hint=1.0)
    assert x.shape == (5000, 2)
    assert abs(x.mean()) < 0.05


def test_sampler_budget_error():
    # acceptance ~ exp(-50) with a hint of 0.5 exhausts the proposal budget
    split = GoodBadSplit(body=L2Ball(radius=1.0, dim=2), sigma=ConstSigma(50.0), n=2.0, delta=0.5)
    with pytest.raises(SamplingBudgetError) as exc:
        sample_bad(split, 1000, RngStream(6), delta_prime_hint=0.5)
    assert exc.value.accepted == 0
    assert exc.value.proposals >= 1000


def test_sample_good_support(ref_split):
    x = sample_good(ref_split, 20_000, RngStream(7, 2))
    d = ref_split.body.distance_many(x)
    assert np.all(d < ref_split.sigma.ramp_end)
    hull = ref_split.body.scale(ref_split.c_thm)
    assert hull.contains_many(x).all()


def test_sample_good_symmetric_mean(split_1d):
    x = sample_good(split_1d, 30_000, RngStream(8, 3))
    assert abs(x.mean()) < 4.0 * x.std() / math.sqrt(len(x))


def test_sample_counts_and_validation(ref_split):
    assert sample_good(ref_split, 17, RngStream(9)).shape == (17, 3)
    with pytest.raises(ValueError):
        sample_bad(ref_split, 0, RngStream(9))


def test_log_density_ratio_values(ref_split):
    # center: sigma at plateau, norm term zero
    assert ref_split.log_density_ratio_bad_dilated(np.zeros(3)) == pytest.approx(
        -ref_split.sigma.plateau, abs=1e-12
    )
    far = np.array([80.0, 3.0, -4.0])
    coef = (ref_split.n**2 - 1.0) / (2.0 * ref_split.n**2)
    assert ref_split.log_density_ratio_bad_dilated(far) == pytest.approx(
        -coef * far @ far, rel=1e-15
    )


def test_log_density_ratio_recomposition(ref_split, rng):
    gen = rng.generator()
    x, y = gen.standard_normal(3) * 4, gen.standard_normal(3) * 4
    coef = (ref_split.n**2 - 1.0) / (2.0 * ref_split.n**2)

    def oracle(v):
        return -ref_split.sigma.eval(ref_split.body.distance(v)) - coef * float(v @ v)

    got = ref_split.log_density_ratio_bad_dilated(x) - ref_split.log_density_ratio_bad_dilated(y)
    assert got == pytest.approx(oracle(x) - oracle(y), abs=1e-12)


def test_sampling_is_deterministic(ref_split):
    a = sample_bad(ref_split, 500, RngStream(12, 4))
    b = sample_bad(ref_split, 500, RngStream(12, 4))
    np.testing.assert_array_equal(a, b)
