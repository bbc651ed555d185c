import numpy as np
import pytest
from numpy.testing import assert_allclose

from qseig.config.exceptions import DimensionMismatch, NonFinite, NotPositiveDefinite
from qseig.operators.blockvec import (BlockState, GramMatrix, block_norm_a, block_norm_l2, combine,
                                      gram_a, gram_l2, inv_sqrt, subspace_distance_a, sym_eig)


def _random(d, n, seed=0):
    return BlockState(np.random.default_rng(seed).standard_normal((d.ng, n)))


def test_block_state_rejects_non_finite():
    with pytest.raises(NonFinite):
        BlockState(np.array([[1.0], [np.nan]]))
    with pytest.raises(DimensionMismatch):
        BlockState(np.zeros((2, 2, 2)))


def test_block_state_vector_becomes_column():
    assert BlockState(np.arange(4.0)).shape == (4, 1)


def test_gram_l2_self_pairing_is_symmetric(lap1d):
    u = _random(lap1d, 3)
    s = gram_l2(lap1d, u, u)
    assert s.symmetric
    assert np.array_equal(s.data, s.data.T)
    assert_allclose(s.data, u.data.T @ (lap1d.m[:, None] * u.data), rtol=1e-12)


def test_gram_transpose_relation(lap1d):
    u, v = _random(lap1d, 3, 0), _random(lap1d, 2, 1)
    assert_allclose(gram_a(lap1d, u, v).data, gram_a(lap1d, v, u).data.T, rtol=1e-12, atol=1e-10)
    assert gram_l2(lap1d, u, v).shape == (3, 2)


def test_combine_and_dimension_check(lap1d):
    u = _random(lap1d, 3)
    c = np.arange(6.0).reshape(3, 2)
    assert_allclose(combine(u, c).data, u.data @ c)
    with pytest.raises(DimensionMismatch):
        combine(u, np.ones((2, 2)))


def test_sym_eig_ascending_with_sign_convention():
    w, q = sym_eig(np.array([[2.0, 1.0], [1.0, 2.0]]))
    assert_allclose(w, [1.0, 3.0], atol=1e-14)
    for j in range(2):
        assert q[np.argmax(np.abs(q[:, j])), j] > 0


def test_inv_sqrt(lap1d):
    u = _random(lap1d, 3)
    s = gram_l2(lap1d, u, u)
    r = inv_sqrt(s).data
    assert_allclose(r @ s.data @ r, np.eye(3), atol=1e-12)
    with pytest.raises(NotPositiveDefinite):
        inv_sqrt(np.diag([1.0, -1.0]))
    with pytest.raises(NotPositiveDefinite):
        inv_sqrt(GramMatrix(np.diag([1.0, 1e-20]), symmetric=True))


def test_block_norms(lap1d):
    u = _random(lap1d, 2)
    assert block_norm_l2(lap1d, u) == pytest.approx(np.sqrt(np.trace(gram_l2(lap1d, u, u).data)))
    assert block_norm_a(lap1d, u) == pytest.approx(np.sqrt(np.trace(gram_a(lap1d, u, u).data)))


def test_subspace_distance_ignores_right_rotation(lap1d):
    u = _random(lap1d, 3)
    theta = 0.3
    q = np.array([[np.cos(theta), -np.sin(theta), 0.0],
                  [np.sin(theta), np.cos(theta), 0.0],
                  [0.0, 0.0, 1.0]])
    assert subspace_distance_a(lap1d, combine(u, q), u) < 1e-10 * block_norm_a(lap1d, u)
    assert subspace_distance_a(lap1d, u, _random(lap1d, 3, 5)) > 0.1


def test_gram_matrix_minus_identity():
    s = GramMatrix(np.array([[2.0, 0.5], [0.5, 1.0]]), symmetric=True)
    assert s.minus_identity().frobenius() == pytest.approx(np.sqrt(1.0 + 0.5))


def test_subspace_distance_triangle_inequality(lap1d):
    for seed in range(5):
        a, b, c = (_random(lap1d, 2, 3 * seed + k) for k in range(3))
        d_ac = subspace_distance_a(lap1d, a, c)
        assert d_ac <= subspace_distance_a(lap1d, a, b) + subspace_distance_a(lap1d, b, c) + 1e-9 * d_ac
