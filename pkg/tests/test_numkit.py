import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from solitonlab.errors import InvalidRange, SingularMatrix
from solitonlab.numkit import Grid1D, batched_lu_invert, inf_norm, lu_factor_invert


def rand_matrix(rng, n):
    return rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))


def test_identity():
    inv, det = lu_factor_invert(np.eye(4))
    assert np.array_equal(inv, np.eye(4))
    assert det == 1


def test_diagonal():
    inv, det = lu_factor_invert(np.diag([2j, -1j]))
    assert np.allclose(inv, np.diag([-0.5j, 1j]))
    assert det == pytest.approx(2)


def test_singular_raises():
    with pytest.raises(SingularMatrix):
        lu_factor_invert(np.array([[1, 2], [2, 4]], dtype=complex))
    with pytest.raises(SingularMatrix):
        lu_factor_invert(np.zeros((3, 3)))


@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_inverse_residual_scales_with_condition(n, seed):
    a = rand_matrix(np.random.default_rng(seed), n)
    inv, _ = lu_factor_invert(a)
    assert inf_norm(a @ inv - np.eye(n)) < 1e-12 * np.linalg.cond(a, np.inf)


def test_det_matches_numpy_and_is_multiplicative():
    rng = np.random.default_rng(3)
    a, b = rand_matrix(rng, 5), rand_matrix(rng, 5)
    _, da = lu_factor_invert(a)
    _, db = lu_factor_invert(b)
    _, dab = lu_factor_invert(a @ b)
    assert da == pytest.approx(np.linalg.det(a), rel=1e-12)
    assert dab == pytest.approx(da * db, rel=1e-11)


def test_batched_flags_only_singular_members():
    rng = np.random.default_rng(1)
    stack = np.stack([rand_matrix(rng, 3), np.ones((3, 3)), rand_matrix(rng, 3)])
    inv, det, sing = batched_lu_invert(stack)
    assert sing.tolist() == [False, True, False]
    assert np.isnan(inv[1]).all() and det[1] == 0
    assert np.allclose(inv[0] @ stack[0], np.eye(3))


def test_batched_is_bit_identical_to_single():
    rng = np.random.default_rng(7)
    stack = np.stack([rand_matrix(rng, 4) for _ in range(6)])
    inv, det, _ = batched_lu_invert(stack)
    for i in range(6):
        one, d1 = lu_factor_invert(stack[i])
        assert np.array_equal(one, inv[i]) and d1 == det[i]


def test_grid():
    g = Grid1D(-1.0, 1.0, 5)
    assert g.h == 0.5 and len(g) == 5 and g[4] == 1.0
    assert g.values[-1] == 1.0
    with pytest.raises(InvalidRange):
        Grid1D(1.0, 0.0, 5)
    with pytest.raises(InvalidRange):
        Grid1D(0.0, 1.0, 1)
