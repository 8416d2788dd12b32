import json

import numpy as np
import pytest

from solitonlab import Grid1D, SolitonData
from solitonlab.errors import NonDecayedBoundary, StencilOnSingularity
from solitonlab.verify import (lax_matrices, lambda_sigma, masses, pde_residual, peak_location,
                               potential_matrix, residual_report, verification_window,
                               zero_curvature_residual)

from datasets import CSCH, FIG, PAIR


def vacuum(x, t):
    z = np.zeros(np.broadcast(np.asarray(x), np.asarray(t)).shape, dtype=complex)
    return z, z, np.zeros(z.shape, dtype=bool)


def corrupted(data, factor=1.01):
    def sampler(x, t):
        q1, q2, s = data(x, t)
        return q1 * factor, q2, s
    return sampler


def test_vacuum_residuals_are_exactly_zero():
    assert not np.any(pde_residual(vacuum, np.linspace(-1, 1, 5), 0.0, 1e-2, 1e-2))
    assert zero_curvature_residual(vacuum, 0.3, 0.1, 1 + 0.5j, 1e-2) == 0.0


def test_one_soliton_residual_at_origin():
    r = pde_residual(FIG, 0.0, 0.0, 1e-2, 1e-2)
    assert r.shape == (2,)
    assert np.abs(r).max() < 1e-7


def test_corrupted_field_is_detected():
    x0 = peak_location(PAIR, 0.0)
    r = pde_residual(corrupted(PAIR), np.linspace(x0 - 2, x0 + 2, 21), 0.0, 1e-2, 1e-2)
    assert np.abs(r).max() > 1e-4
    assert zero_curvature_residual(corrupted(PAIR), x0, 0.0, 1 + 0.5j, 1e-2) > 1e-3


def test_two_soliton_residual_and_order():
    x = np.linspace(-10, 10, 81)
    r1 = np.abs(pde_residual(PAIR, x, 0.3, 4e-2, 4e-2)).max()
    r2 = np.abs(pde_residual(PAIR, x, 0.3, 2e-2, 2e-2)).max()
    assert np.abs(pde_residual(PAIR, x, 0.3, 1e-2, 1e-2)).max() < 1e-6
    assert r1 / r2 > 12


def test_stencil_on_singularity():
    with pytest.raises(StencilOnSingularity):
        pde_residual(CSCH, 0.02, 0.0, 1e-2, 1e-2)


def test_potential_matrix_layout_and_reduction():
    q = np.array([0.3 - 0.1j, -0.2 + 0.5j])
    Q = potential_matrix(q)
    expect = np.array([[0, -np.conj(q[0]), np.conj(q[1])], [q[0], 0, 0], [q[1], 0, 0]])
    assert np.array_equal(Q, expect)
    Lam, sig = lambda_sigma()
    assert np.array_equal(np.diag(Lam), [-1, 1, 1]) and np.array_equal(np.diag(sig), [1, -1, 1])
    assert np.array_equal(Q.conj().T, sig @ Q @ sig)


def test_lax_matrices_shapes():
    lm = lax_matrices(np.array([0.1, 0.2j]), np.array([0.0, 0.0]), 0.5 + 0.5j)
    assert lm.U.shape == lm.V.shape == (3, 3)
    assert np.allclose(lm.Q1, 1j * lm.Q)


@pytest.mark.parametrize("k", [1 + 0.5j, -0.7 + 0.3j, 0.4 + 1.2j, 1.5, -0.2 + 0.05j])
def test_zero_curvature(k):
    assert zero_curvature_residual(FIG, 0.0, 0.0, k, 1e-2) < 1e-6
    assert zero_curvature_residual(PAIR, 0.5, 0.2, k, 1e-2) < 1e-6


def test_masses_conserved_and_phase_invariant():
    xs = Grid1D(-600, 600, 24001)
    m = [masses(*FIG(xs.values, t)[:2], xs) for t in (-5.0, 0.0, 5.0)]
    assert m[1][0] == pytest.approx(0.04, rel=1e-10) and m[1][1] == pytest.approx(0.16, rel=1e-10)
    for mi in m:
        assert abs(mi[0] - m[1][0]) / m[1][0] < 1e-8
    rot = FIG.transformed(np.exp(0.9j))
    assert masses(*rot(xs.values, 0.0)[:2], xs) == pytest.approx(m[1], rel=1e-14)
    assert masses(np.zeros(5), np.zeros(5), Grid1D(0, 1, 5)) == (0.0, 0.0)


def test_masses_reject_truncated_field():
    xs = Grid1D(-20, 20, 401)
    with pytest.raises(NonDecayedBoundary):
        masses(*FIG(xs.values, 0.0)[:2], xs)


def test_residual_report_serializes():
    rep = residual_report(PAIR, np.linspace(-5, 5, 11), [0.0, 1.0])
    d = rep.to_dict()
    assert d["nx"] == 11 and d["nt"] == 2 and d["max_abs_r1"] >= 0
    json.dumps(d)


def test_verification_window_centres_on_peak():
    a, b = verification_window(FIG, 0.0)
    assert b - a == pytest.approx(60.0)
    q1, _, _ = FIG(np.array([0.5 * (a + b)]), 0.0)
    assert abs(abs(q1[0]) - 0.12 / np.sqrt(12)) < 1e-4
