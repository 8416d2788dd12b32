import numpy as np
import pytest

from solitonlab import SolitonData
from solitonlab.errors import NotPowerOfTwo, SingularSample
from solitonlab.splitstep import (SimState, compare, conjugated, decay_half_width, evolve,
                                  init_state, step, write_snapshot)

from datasets import CSCH, FIG


def vacuum(x, t):
    return np.zeros_like(x, dtype=complex), np.zeros_like(x, dtype=complex)


def test_vacuum_stays_vacuum():
    s = evolve(init_state(vacuum, 10.0, 64), 1.0, 1e-3)
    assert not s.q1.any() and not s.q2.any()
    assert s.t == pytest.approx(1.0)


def test_not_power_of_two():
    with pytest.raises(NotPowerOfTwo):
        init_state(vacuum, 10.0, 1000)


def test_singular_sampler_rejected():
    with pytest.raises(SingularSample):
        init_state(CSCH, 10.0, 64)


def test_boundary_decay_of_one_soliton():
    s = init_state(FIG, 100.0, 4096)
    assert s.n == 4096
    q1, q2, _ = FIG(np.array([-100.0, 100.0]), 0.0)
    assert np.abs(q1).max() < 1e-2          # L = 100 is too short for a 1e-10 tail
    L = decay_half_width(FIG, [0.0, 5.0], gate=1e-10)
    q1, q2, _ = FIG(np.array([-L, L]), 5.0)
    assert max(np.abs(q1).max(), np.abs(q2).max()) < 1e-10


@pytest.mark.parametrize("a,mode", [(0.7, 3), (1.2 - 0.4j, -5)])
def test_plane_wave_in_q2(a, mode):
    L, n, dt = 10.0, 64, 1e-3
    x = -L + 2 * L / n * np.arange(n)
    xi0 = np.pi * mode / L
    s = SimState(L, n, np.zeros(n, complex), a * np.exp(1j * xi0 * x))
    s1 = step(s, dt)
    exact = s.q2 * np.exp(1j * (abs(a) ** 2 - xi0 ** 2 / 2) * dt)
    assert np.abs(s1.q2 - exact).max() < 1e-9
    assert not s1.q1.any()


def test_mass_is_conserved_over_many_steps():
    rng = np.random.default_rng(0)
    n = 128
    s = SimState(20.0, n, rng.normal(size=n) + 1j * rng.normal(size=n),
                 rng.normal(size=n) + 1j * rng.normal(size=n))
    m0 = np.array(s.masses())
    m1 = np.array(evolve(s, 10.0, 1e-3).masses())
    assert np.abs(m1 - m0).max() / m0.min() < 1e-12


def test_time_reversal_by_conjugation():
    s0 = init_state(FIG, 375.0, 1024)
    back = conjugated(evolve(conjugated(evolve(s0, 1.0, 0.05)), 1.0, 0.05))
    assert np.abs(back.q1 - s0.q1).max() < 1e-12


def test_short_cross_check_and_negative_control():
    L = decay_half_width(FIG, [0.0, 1.0])
    s0 = init_state(FIG, L, 2048)
    assert compare(s0, FIG) == (0.0, 0.0)
    s = evolve(s0, 1.0, 1e-2)
    assert compare(s, FIG)[0] < 1e-6
    wrong = SolitonData([type(FIG[0])(FIG[0].k, -FIG[0].c, FIG[0].d)])
    assert compare(s, wrong)[0] > 0.03


def test_final_partial_step():
    s = evolve(init_state(vacuum, 5.0, 32), 0.25, 0.1)
    assert s.t == pytest.approx(0.25, abs=1e-15)


def test_snapshot_format(tmp_path):
    s = init_state(FIG, 100.0, 16)
    write_snapshot(tmp_path / "s.csv", s)
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "x,re_q1,im_q1,re_q2,im_q2" and len(lines) == 17
    assert float(lines[1].split(",")[0]) == -100.0
