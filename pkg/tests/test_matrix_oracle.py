import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from charpoly import matrix_oracle as mo
from charpoly.analytics.oracles import Group
from charpoly.analytics.stats import ks_2samp
from charpoly.rng import RngStream, as_generator
from charpoly.samplers import sample_unitary_log_charpoly

from conftest import assert_within, mean_se


def reflection(m1):
    """Unitary sending e1 to m1: I - (e1 - m1)(e1 - m1)^* / (1 - conj m11)."""
    e1 = np.zeros_like(m1)
    e1[0] = 1.0
    w = e1 - m1
    return np.eye(m1.size) - np.outer(w, w.conj()) / (1.0 - np.conj(m1[0]))


@pytest.mark.parametrize("n", [1, 2, 5, 17, 64])
def test_qr_haar_is_unitary(n):
    v = mo.sample_haar_unitary_qr(n, RngStream(1, n), 20)
    assert v.shape == (20, n, n)
    assert all(mo.unitarity_error(a) <= 1e-12 for a in v)


@pytest.mark.parametrize("n", [1, 2, 7, 30])
def test_recursive_haar_is_unitary(n):
    v = mo.sample_haar_unitary_recursive(n, RngStream(2, n), 10)
    assert all(mo.is_unitary(a) for a in v)


@pytest.mark.parametrize("n", [1, 2, 8])
def test_so2n_matrices(n):
    o, swaps = mo.sample_haar_so2n(n, RngStream(3, n), 200, return_swaps=True)
    assert o.shape == (200, 2 * n, 2 * n)
    assert all(mo.is_special_orthogonal(a) for a in o)
    assert 0 < swaps.sum() < 200


def test_single_matrix_shapes():
    assert mo.sample_haar_unitary_qr(3, RngStream(4)).shape == (3, 3)
    assert mo.sample_sphere(4, RngStream(4)).shape == (4,)


def test_sizes_out_of_range():
    with pytest.raises(ValueError):
        mo.sample_haar_unitary_qr(65, RngStream(0))
    with pytest.raises(ValueError):
        mo.sample_haar_so2n(33, RngStream(0))
    with pytest.raises(ValueError):
        mo.sample_haar_unitary_qr(0, RngStream(0))


def test_sphere_unit_norm():
    s = mo.sample_sphere(6, RngStream(5), 1000)
    assert np.allclose(np.linalg.norm(s, axis=1), 1.0, atol=1e-13)


def test_n2_trace_mean_zero():
    tr = np.trace(mo.sample_haar_unitary_qr(2, RngStream(6), 200_000), axis1=1, axis2=2)
    for part in (tr.real, tr.imag):
        m, se = mean_se(part)
        assert_within(m, 0.0, se)
    m, se = mean_se(np.abs(tr) ** 2)
    assert_within(m, 1.0, se)


def test_n4_second_moment_of_det():
    b = mo.matrix_log_charpoly(4, 200_000, RngStream(7))
    m, se = mean_se(np.exp(2 * b.re_log))
    assert_within(m, 5.0, se)
    assert b.sampler == "matrix-qr"


def test_n1_is_unit_circle():
    b = mo.matrix_log_charpoly(1, 200_000, RngStream(8))
    m, se = mean_se(np.exp(2 * b.re_log))
    assert_within(m, 2.0, se)


def test_recursive_matches_qr_n3():
    a = mo.matrix_log_charpoly(3, 100_000, RngStream(9), method="recursive")
    b = mo.matrix_log_charpoly(3, 100_000, RngStream(10), method="qr")
    assert ks_2samp(a.re_log, b.re_log).pvalue >= 1e-3
    assert ks_2samp(a.im_log, b.im_log).pvalue >= 1e-3


def test_product_sampler_matches_matrices_n4():
    a = sample_unitary_log_charpoly(4, 100_000, RngStream(11))
    b = mo.matrix_log_charpoly(4, 100_000, RngStream(12))
    assert ks_2samp(a.re_log, b.re_log).pvalue >= 1e-3
    assert ks_2samp(a.im_log, b.im_log).pvalue >= 1e-3


def test_unknown_method():
    with pytest.raises(ValueError):
        mo.matrix_log_charpoly(2, 3, RngStream(0), method="householder")


# ---- direct log det ------------------------------------------------------------------


def test_direct_at_zero_is_zero():
    z = mo.log_charpoly_direct(mo.sample_haar_unitary_qr(5, RngStream(13)), 0.0)
    assert (z.re_log, z.im_log) == (0.0, 0.0)


def test_direct_identity_matrix():
    z = mo.log_charpoly_direct(np.eye(6), 0.5)
    assert z.re_log == pytest.approx(6 * math.log(0.5), abs=1e-14)
    assert z.im_log == 0.0 and z.n == 6


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 12), st.floats(0.0, 1.0), st.integers(0, 2 ** 32))
def test_direct_matches_determinant(n, x, seed):
    v = mo.sample_haar_unitary_qr(n, RngStream(seed))
    z = mo.log_charpoly_direct(v, x)
    det = np.linalg.det(np.eye(n) - x * v)
    if abs(det) > 1e-8:
        assert np.exp(complex(z.re_log, z.im_log)) == pytest.approx(det, rel=1e-9, abs=1e-12)
        # each factor has non-negative real part, so the branch stays within n*pi/2
        assert abs(z.im_log) <= n * math.pi / 2


def test_direct_rejects_bad_x():
    with pytest.raises(ValueError):
        mo.log_charpoly_direct(np.eye(2), 1.5)


def test_direct_so_is_real():
    o = mo.sample_haar_so2n(3, RngStream(14), 50)
    b = mo.log_charpoly_direct(o, 1.0, Group.SO2N)
    assert b.n == 3 and np.all(b.im_log == 0.0)
    dets = np.linalg.det(np.eye(6) - o)
    assert np.allclose(np.exp(b.re_log), dets, rtol=1e-9, atol=1e-12)


def test_so_n1_mean_two():
    b = mo.matrix_log_charpoly(1, 200_000, RngStream(15), method="so2n")
    m, se = mean_se(np.exp(b.re_log))
    assert_within(m, 2.0, se)


def test_so_rotation_invariance():
    rng = RngStream(16)
    o = mo.sample_haar_so2n(2, rng, 50_000)
    g = mo.sample_haar_so2n(2, RngStream(17))
    a = np.linalg.det(np.eye(4) - o)
    b = np.linalg.det(np.eye(4) - g @ o)
    assert ks_2samp(a, b).pvalue >= 1e-3


# ---- recursions -----------------------------------------------------------------------


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 7), st.floats(0.0, 1.0), st.integers(0, 2 ** 32))
def test_offcircle_recursion_pointwise(n, x, seed):
    rng = RngStream(seed)
    m1 = mo.sample_sphere(n, rng)
    v = mo.sample_haar_unitary_qr(n - 1, rng)
    big = reflection(m1) @ np.block([[np.ones((1, 1)), np.zeros((1, n - 1))],
                                     [np.zeros((n - 1, 1)), v]])
    assert mo.is_unitary(big, 1e-11)
    lhs = np.linalg.det(np.eye(n) - x * big)
    rhs = mo.offcircle_rhs(m1[None], v[None], x)[0]
    assert rhs == pytest.approx(lhs, rel=1e-7, abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6), st.floats(0.0, 0.999), st.integers(0, 2 ** 32))
def test_eigenangle_recursion_pointwise_for_diagonal(n, x, seed):
    rng = RngStream(seed)
    m1 = mo.sample_sphere(n, rng)
    angles = as_generator(rng).uniform(-math.pi, math.pi, n - 1)
    big = reflection(m1) @ np.diag(np.concatenate([[1.0], np.exp(1j * angles)]))
    lhs = np.linalg.det(np.eye(n) - x * big)
    rhs = mo.eigenangle_rhs(m1[None], angles[None], x)[0]
    assert rhs == pytest.approx(lhs, rel=1e-7, abs=1e-9)


@pytest.mark.parametrize("x", [0.0, 0.5, 1.0])
def test_offcircle_identity_in_law(x):
    rep = mo.verify_offcircle_identity(3, x, 40_000, RngStream(18))
    assert rep.passed, rep.summary()
    assert rep.lhs.shape == rep.rhs.shape == (40_000,)


def test_offcircle_at_one_reduces():
    rng = RngStream(19)
    m1 = mo.sample_sphere(4, rng, 10)
    v = mo.sample_haar_unitary_qr(3, rng, 10)
    expected = (1 - m1[:, 0]) * np.linalg.det(np.eye(3) - v)
    assert np.allclose(mo.offcircle_rhs(m1, v, 1.0), expected)


@pytest.mark.parametrize("x", [0.0, 0.5])
def test_eigenangle_identity_in_law(x):
    rep = mo.verify_eigenangle_identity(3, x, 40_000, RngStream(20))
    assert rep.passed, rep.summary()


def test_identity_argument_checks():
    with pytest.raises(ValueError):
        mo.verify_offcircle_identity(1, 0.5, 10)
    with pytest.raises(ValueError):
        mo.verify_offcircle_identity(3, 1.5, 10)
    with pytest.raises(ValueError):
        mo.verify_eigenangle_identity(3, 1.0, 10)
