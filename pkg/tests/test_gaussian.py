import numpy as np
import pytest

from gaussplit.gaussian import (
    DilatedGaussian,
    FactorizationError,
    GaussianMeasure,
    dilation_log_ratio,
    sample_dilated,
    sample_std_normal,
    whiten,
)
from gaussplit.rng import RngStream

from conftest import rand_spd


def test_whiten_identity_is_identity():
    t = whiten(np.eye(3))
    x = np.array([0.3, -1.2, 2.0])
    np.testing.assert_allclose(t.apply(x), x, rtol=0, atol=1e-15)


def test_whiten_diagonal_sqrt():
    t = whiten(np.diag([4.0, 1.0]))
    np.testing.assert_allclose(t.apply(np.array([2.0, 3.0])), [1.0, 3.0], atol=1e-14)


def test_whiten_recovers_covariance():
    cov = np.array([[2.0, 1.0], [1.0, 2.0]])
    t = whiten(cov)
    np.testing.assert_allclose(t.cov_factor @ t.cov_factor.T, cov, rtol=1e-12)


def test_whiten_rejects_non_spd_naming_minor():
    bad = np.array([[1.0, 2.0], [2.0, 1.0]])  # eigenvalues 3, -1
    with pytest.raises(FactorizationError) as exc:
        whiten(bad)
    assert exc.value.minor_index == 2
    assert "2-th leading minor" in str(exc.value)


def test_whiten_rejects_asymmetric():
    with pytest.raises(FactorizationError):
        whiten(np.array([[1.0, 0.5], [0.0, 1.0]]))


@pytest.mark.parametrize("cond", [1.0, 1e3, 1e6])
def test_whiten_round_trip(cond):
    cov = rand_spd(6, cond, seed=int(cond) % 97)
    t = whiten(cov)
    x = np.random.default_rng(5).standard_normal((50, 6))
    back = t.unapply(t.apply(x))
    np.testing.assert_allclose(back, x, rtol=1e-12, atol=1e-12 * np.abs(x).max())


def test_whitened_samples_are_standard_normal():
    cov = rand_spd(3, 100.0, seed=8)
    mu = GaussianMeasure.from_covariance(cov)
    x = mu.sample(200_000, RngStream(17))
    z = mu.whitening().apply(x)
    assert np.abs(z.mean(axis=0)).max() < 4.0 / np.sqrt(len(z))
    assert np.abs(z.var(axis=0) - 1.0).max() < 0.02


def test_sample_moments():
    x = sample_std_normal(2, 10**6, RngStream(1))
    assert np.abs(x.mean(axis=0)).max() <= 4.0 / 1e3
    assert np.abs(x.var(axis=0) - 1.0).max() <= 0.01


def test_sampling_is_reproducible():
    a = sample_std_normal(4, 1000, RngStream(42, 3))
    b = sample_std_normal(4, 1000, RngStream(42, 3))
    np.testing.assert_array_equal(a, b)


def test_sample_validation():
    with pytest.raises(ValueError):
        sample_std_normal(0, 10, RngStream(0))
    with pytest.raises(ValueError):
        sample_std_normal(2, 0, RngStream(0))


def test_dilation_log_ratio_values():
    assert dilation_log_ratio(np.zeros(3), 2.0) == 0.0
    x = np.array([2.0, 2.0])  # ||x||^2 = 8
    assert dilation_log_ratio(x, 2.0) == pytest.approx(-3.0, abs=1e-14)
    with pytest.raises(ValueError):
        dilation_log_ratio(x, 1.0)


def test_dilation_log_ratio_matches_density_oracle():
    # explicit densities: phi(x) and (2 pi n^2)^{-d/2} exp(-||x||^2 / (2 n^2))
    n, d = 2.0, 3
    gen = np.random.default_rng(0)
    x, y = gen.standard_normal(d), gen.standard_normal(d)

    def log_phi(v):
        return -0.5 * d * np.log(2 * np.pi) - 0.5 * v @ v

    def log_phi_dilated(v):
        return -0.5 * d * np.log(2 * np.pi * n * n) - (v @ v) / (2 * n * n)

    lhs = dilation_log_ratio(x, n) - dilation_log_ratio(y, n)
    rhs = (log_phi(x) - log_phi(y)) - (log_phi_dilated(x) - log_phi_dilated(y))
    assert lhs == pytest.approx(rhs, abs=1e-12)


def test_dilated_log_density_change_of_variables():
    base = GaussianMeasure.standard(4)
    dil = DilatedGaussian(base=base, n=3.0)
    x = np.random.default_rng(3).standard_normal(4) * 5
    expected = base.log_density(x / 3.0) - 4 * np.log(3.0)
    assert dil.log_density(x) == pytest.approx(expected, abs=1e-12)
    explicit = -2.0 * np.log(2 * np.pi * 9.0) - (x @ x) / 18.0
    assert dil.log_density(x) == pytest.approx(explicit, abs=1e-12)


def test_dilation_log_ratio_is_exactly_quadratic():
    gen = np.random.default_rng(9)
    x, v = gen.standard_normal(3), gen.standard_normal(3)
    h = 0.37
    ts = np.arange(12) * h
    vals = np.array([dilation_log_ratio(x + t * v, 1.7) for t in ts])
    second = np.diff(vals, 2)
    assert np.max(np.abs(second - second[0])) < 1e-10


def test_sample_dilated_degenerate_identity():
    base = GaussianMeasure.standard(2)
    a = sample_dilated(DilatedGaussian(base=base, n=1.0), 100, RngStream(7))
    b = base.sample(100, RngStream(7))
    np.testing.assert_array_equal(a, b)


def test_sample_dilated_variance():
    base = GaussianMeasure.standard(1)
    x = sample_dilated(DilatedGaussian(base=base, n=3.0), 10**6, RngStream(21))
    assert x.var() == pytest.approx(9.0, rel=0.01)


def test_sample_dilated_is_n_times_base():
    base = GaussianMeasure.standard(3)
    d = DilatedGaussian(base=base, n=2.5)
    np.testing.assert_array_equal(
        sample_dilated(d, 50, RngStream(4, 4)), 2.5 * base.sample(50, RngStream(4, 4))
    )


def test_dilated_rejects_n_below_one():
    with pytest.raises(ValueError):
        DilatedGaussian(base=GaussianMeasure.standard(2), n=0.5)
