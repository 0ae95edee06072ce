import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from charpoly.analytics.stats import ks_statistic
from charpoly.distributions import (WjParams, algebra_identity, beta_cdf, cos_w_identity,
                                    duplication_identity, sample_beta, sample_gamma,
                                    sample_sign, sample_w, sample_w_rejection, w_density)
from charpoly.rng import RngStream

from conftest import assert_within, mean_se


def w_cdf(j):
    """P(W_j <= v) from sin^2 W_j ~ beta(1/2, j - 1/2)."""
    def f(v):
        v = np.clip(v, -math.pi / 2, math.pi / 2)
        return 0.5 + 0.5 * np.sign(v) * special.betainc(0.5, j - 0.5, np.sin(v) ** 2)
    return f


# ---- gamma ---------------------------------------------------------------------


def test_gamma_exponential_median():
    x = sample_gamma(1.0, 1_000_000, RngStream(1))
    m, se = mean_se(x > math.log(2))
    assert_within(m, 0.5, se)


def test_gamma_mean_two():
    m, se = mean_se(sample_gamma(2.0, 1_000_000, RngStream(2)))
    assert_within(m, 2.0, se)


def test_gamma_half_second_moment():
    m, se = mean_se(sample_gamma(0.5, 1_000_000, RngStream(3)) ** 2)
    assert_within(m, math.gamma(2.5) / math.gamma(0.5), se)


@pytest.mark.parametrize("a", [0.05, 0.5, 1.0, 3.3, 250.0])
def test_gamma_ks_against_cdf(a):
    x = sample_gamma(a, 50_000, RngStream(4, int(a * 100)))
    res = ks_statistic(x, lambda t: special.gammainc(a, t))
    assert res.pvalue >= 1e-3


@pytest.mark.parametrize("a", [0.0, -1.0, float("nan")])
def test_gamma_domain(a):
    with pytest.raises(ValueError):
        sample_gamma(a, 3, RngStream(0))


def test_gamma_shapes():
    g = RngStream(5)
    assert isinstance(sample_gamma(2.0, rng=g), float)
    assert sample_gamma([1.0, 2.0, 3.0], rng=g).shape == (3,)
    assert sample_gamma(2.0, (4, 5), g).shape == (4, 5)


# ---- beta ------------------------------------------------------------------------


def test_beta_dirac_at_one():
    assert np.all(sample_beta(1.0, 0.0, 1000, RngStream(6)) == 1.0)
    assert sample_beta(3.0, 0.0, rng=RngStream(6)) == 1.0


def test_beta_uniform_mean():
    m, se = mean_se(sample_beta(1.0, 1.0, 1_000_000, RngStream(7)))
    assert_within(m, 0.5, se)


def test_beta_one_two_mean():
    m, se = mean_se(sample_beta(1.0, 2.0, 1_000_000, RngStream(8)))
    assert_within(m, 1 / 3, se)


@pytest.mark.parametrize("a,b", [(0.5, 0.5), (2.0, 7.5), (0.5, 4.5), (30.0, 29.0)])
def test_beta_ks(a, b):
    x = sample_beta(a, b, 50_000, RngStream(9, int(10 * a + b)))
    assert ks_statistic(x, lambda t: beta_cdf(a, b, t)).pvalue >= 1e-3


@pytest.mark.parametrize("a,b", [(0.0, 1.0), (1.0, -0.5), (-2.0, 0.0)])
def test_beta_domain(a, b):
    with pytest.raises(ValueError):
        sample_beta(a, b, 3, RngStream(0))


@settings(max_examples=40, deadline=None)
@given(st.floats(min_value=0.05, max_value=50), st.floats(min_value=0.0, max_value=50),
       st.integers(min_value=0, max_value=2 ** 32))
def test_beta_in_unit_interval(a, b, seed):
    x = sample_beta(a, b, 200, RngStream(seed))
    assert np.all((x >= 0) & (x <= 1))


# ---- W_j ------------------------------------------------------------------------


@pytest.mark.parametrize("j", [1, 2, 3, 7, 40])
def test_norm_const_closed_form(j):
    k = 2 ** (2 * (j - 1)) * math.factorial(j - 1) ** 2 / (math.pi * math.factorial(2 * j - 2))
    assert WjParams(j).norm_const == pytest.approx(k, rel=1e-13)


@pytest.mark.parametrize("j", [1, 2, 5, 30])
def test_density_integrates_to_one(j):
    val, _ = integrate.quad(lambda v: w_density(j, v), -math.pi / 2, math.pi / 2,
                            epsabs=1e-13, epsrel=1e-13, limit=200)
    assert abs(val - 1.0) <= 1e-10


def test_density_examples():
    assert w_density(WjParams(1), 0.0) == pytest.approx(1 / math.pi, rel=1e-15)
    assert w_density(3, math.pi / 2) == 0.0
    assert w_density(3, -math.pi / 2) == 0.0
    assert w_density(2, 2.0) == 0.0


def test_wj_params_validation():
    for bad in (0, -1, 1.5):
        with pytest.raises(ValueError):
            WjParams(bad)


def test_w1_uniform():
    x = sample_w(1, 100_000, RngStream(10))
    res = ks_statistic(x, lambda v: np.clip(v / math.pi + 0.5, 0, 1))
    assert res.pvalue >= 1e-3
    assert np.all(np.abs(x) < math.pi / 2)


@pytest.mark.parametrize("j", [1, 2, 10, 500])
def test_w_mean_zero(j):
    m, se = mean_se(sample_w(j, 200_000, RngStream(11, j)))
    assert_within(m, 0.0, se)


def test_w2_fourier_point():
    x = sample_w(WjParams(2), 1_000_000, RngStream(12))
    m, se = mean_se(np.cos(x))  # the sine part vanishes by symmetry
    assert_within(m, 1 / (math.gamma(2.5) * math.gamma(1.5)), se)


@pytest.mark.parametrize("j", [1, 3, 10, 200])
def test_w_beta_route_ks(j):
    assert ks_statistic(sample_w(j, 50_000, RngStream(13, j)), w_cdf(j)).pvalue >= 1e-3


@pytest.mark.parametrize("j", [1, 3, 10])
def test_w_rejection_route_ks(j):
    assert ks_statistic(sample_w_rejection(j, 50_000, RngStream(14, j)), w_cdf(j)).pvalue >= 1e-3


def test_w_array_of_indices():
    x = sample_w(np.array([1, 2, 3]), rng=RngStream(15))
    assert x.shape == (3,)


def test_signs():
    s = sample_sign(100_000, RngStream(16))
    assert set(np.unique(s)) == {-1.0, 1.0}
    m, se = mean_se(s)
    assert_within(m, 0.0, se)


# ---- identities and reproducibility ---------------------------------------------------


@pytest.mark.parametrize("a,b", [(1, 2), (2, 3), (0.5, 0.5)])
def test_algebra_identity(a, b):
    assert all(c.passed for c in algebra_identity(a, b, 100_000, RngStream(17)))


@pytest.mark.parametrize("j", [1, 2, 5])
def test_duplication_identity(j):
    assert all(c.passed for c in duplication_identity(j, 100_000, RngStream(18)))


@pytest.mark.parametrize("j", [1, 2, 5])
def test_cos_w_identity(j):
    assert all(c.passed for c in cos_w_identity(j, 100_000, RngStream(19)))


def test_identity_detects_wrong_law():
    # beta(1,2) * gamma(2) is gamma(1); against gamma(2) it must fail
    g = RngStream(20)
    lhs = sample_beta(1, 2, 100_000, g) * sample_gamma(3, 100_000, g)
    from charpoly.analytics.stats import ks_check
    assert not ks_check("wrong", lhs, sample_gamma(2, 100_000, g)).passed


@settings(max_examples=20, deadline=None)
@given(st.integers(min_value=0, max_value=2 ** 63), st.integers(min_value=0, max_value=2 ** 20))
def test_streams_reproducible(seed, sid):
    a = sample_gamma(0.7, 64, RngStream(seed, sid))
    b = sample_gamma(0.7, 64, RngStream(seed, sid))
    c = sample_gamma(0.7, 64, RngStream(seed, sid + 1))
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_distinct_streams_uncorrelated():
    a = RngStream(21, 0).random(200_000)
    b = RngStream(21, 1).random(200_000)
    r = np.corrcoef(a, b)[0, 1]
    assert abs(r) <= 5 / math.sqrt(a.size)
