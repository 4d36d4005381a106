import numpy as np
import pytest

from gaussplit import L2Ball, build_split, make_split, reference_scenario
from gaussplit.rng import RngStream


@pytest.fixture(scope="session")
def ref_scenario():
    return reference_scenario()


@pytest.fixture(scope="session")
def ref_split(ref_scenario):
    split, _ = build_split(ref_scenario)
    return split


@pytest.fixture(scope="session")
def split_1d():
    # one-dimensional scenario: K = [-r, r] with complement mass exactly 0.01
    from scipy import stats

    r = float(-stats.norm.ppf(0.005))
    return make_split(L2Ball(radius=r, dim=1), 0.01, 2.0)


@pytest.fixture()
def rng():
    return RngStream(20260810)


def rand_spd(dim, cond, seed):
    gen = np.random.default_rng(seed)
    q, _ = np.linalg.qr(gen.standard_normal((dim, dim)))
    lam = np.exp(np.linspace(0.0, np.log(cond), dim))
    return (q * lam) @ q.T
