"""Direct scattering for the spatial Lax problem J_x + ik[Lambda, J] = iQ J.

J is integrated from x = -L with J = I to x = +L by classical fixed-step RK4.
Then S(k) = e^{ik Lambda L} J(L) e^{-ik Lambda L}. For Im k > 0 only columns
2 and 3 are carried: their lower 2 x 2 block gives s22, s23, s32, s33 with no
exponential factor, and r11 = s22 s33 - s23 s32.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (BoundaryNotDecayed, InvalidInput, LeftUpperHalfPlane, NoConvergence,
                     StepTooCoarse)
from .numkit import inf_norm
from .soliton import SolitonData
from .splitstep import decay_half_width

LAMBDA = np.array([-1.0, 1.0, 1.0])
SIGMA = np.diag([1.0, -1.0, 1.0]).astype(np.complex128)
DLAMBDA = LAMBDA[:, None] - LAMBDA[None, :]
DECAY_GATE = 1e-10
STEP_GATE = 1e-8


@dataclass
class PotentialSampler:
    """Potential (q1, q2) frozen at time ``t0`` on the window [-L, L]."""

    func: object
    L: float
    t0: float = 0.0
    _nodes: dict = field(default_factory=dict, repr=False, compare=False)

    @classmethod
    def auto(cls, func, t0: float = 0.0, gate: float = DECAY_GATE) -> "PotentialSampler":
        """Pick the smallest half-width whose ends are below ``gate``."""
        return cls(func, decay_half_width(func, [t0], gate=gate), t0)

    def values(self, x):
        out = self.func(np.asarray(x, dtype=float), self.t0)
        return (np.broadcast_to(np.asarray(out[0], dtype=np.complex128), np.shape(x)),
                np.broadcast_to(np.asarray(out[1], dtype=np.complex128), np.shape(x)))

    def check_decay(self, gate: float = DECAY_GATE):
        q1, q2 = self.values(np.array([-self.L, self.L]))
        worst = float(max(np.abs(q1).max(), np.abs(q2).max()))
        if not worst < gate:
            raise BoundaryNotDecayed(f"|q(+-L)| = {worst:.3g} at L = {self.L:g} is not below {gate:g}")

    def nodes(self, n_steps: int):
        """iQ at the RK4 nodes -L + j h/2, j = 0..2n."""
        if n_steps not in self._nodes:
            h = 2.0 * self.L / n_steps
            x = -self.L + 0.5 * h * np.arange(2 * n_steps + 1)
            q1, q2 = self.values(x)
            Q1 = np.zeros((x.size, 3, 3), dtype=np.complex128)
            Q1[:, 0, 1] = -1j * np.conj(q1)
            Q1[:, 0, 2] = 1j * np.conj(q2)
            Q1[:, 1, 0] = 1j * q1
            Q1[:, 2, 0] = 1j * q2
            self._nodes = {n_steps: Q1}
        return self._nodes[n_steps]


def as_potential(pot, t0: float = 0.0, L: float | None = None) -> PotentialSampler:
    if isinstance(pot, PotentialSampler):
        return pot
    if L is None:
        return PotentialSampler.auto(pot, t0)
    return PotentialSampler(pot, float(L), t0)


def default_steps(L: float, k) -> int:
    kmax = float(np.max(np.abs(np.atleast_1d(k)))) if np.size(k) else 0.0
    h = 0.02 / max(1.0, kmax)
    return max(2000, int(math.ceil(2.0 * L / h)))


def _integrate(pot: PotentialSampler, ks, n_steps: int, cols=(0, 1, 2)) -> np.ndarray:
    ks = np.atleast_1d(np.asarray(ks, dtype=np.complex128))
    cols = list(cols)
    Q1 = pot.nodes(n_steps)
    h = 2.0 * pot.L / n_steps
    J = np.tile(np.eye(3, dtype=np.complex128)[:, cols], (ks.size, 1, 1))
    A = -1j * ks[:, None, None] * DLAMBDA[:, cols]

    def rhs(j, Y):
        return A * Y + Q1[j] @ Y

    for i in range(n_steps):
        j = 2 * i
        a = rhs(j, J)
        b = rhs(j + 1, J + 0.5 * h * a)
        c = rhs(j + 1, J + 0.5 * h * b)
        d = rhs(j + 2, J + h * c)
        J = J + (h / 6.0) * (a + 2.0 * b + 2.0 * c + d)
    return J


@dataclass(frozen=True)
class ScatteringMatrix:
    k: complex
    S: np.ndarray

    @property
    def det_error(self) -> float:
        return float(abs(np.linalg.det(self.S) - 1.0))

    @property
    def symmetry_error(self) -> float:
        """||S sigma S^dagger sigma - I||_inf (row-sum norm)."""
        S = self.S
        return inf_norm(S @ SIGMA @ S.conj().T @ SIGMA - np.eye(3))

    @property
    def off_diagonal(self) -> float:
        """max(|s12|, |s13|, |s21|, |s31|)."""
        S = self.S
        return float(max(abs(S[0, 1]), abs(S[0, 2]), abs(S[1, 0]), abs(S[2, 0])))

    @property
    def r11(self) -> complex:
        S = self.S
        return complex(S[1, 1] * S[2, 2] - S[1, 2] * S[2, 1])

    def to_dict(self) -> dict:
        return {
            "k": [self.k.real, self.k.imag],
            "S_re": self.S.real.tolist(),
            "S_im": self.S.imag.tolist(),
            "det_error": self.det_error,
            "symmetry_error": self.symmetry_error,
            "off_diagonal": self.off_diagonal,
        }


def _scattering_batch(pot, ks, n_steps):
    J = _integrate(pot, ks, n_steps)
    phase = np.exp(1j * ks[:, None, None] * DLAMBDA * pot.L)
    return J * phase


def compute_S(pot, k, L: float | None = None, n_steps: int | None = None, *,
              t0: float = 0.0, check_decay: bool = True, check_steps: bool = True):
    """S(k) for real k (scalar or 1-D array; arrays give a list).

    With ``check_steps`` the run is repeated at 2 * n_steps and StepTooCoarse
    is raised if any |s_ij| moves by more than 1e-8.
    """
    pot = as_potential(pot, t0, L)
    scalar = np.ndim(k) == 0
    ks = np.atleast_1d(np.asarray(k, dtype=np.complex128))
    if np.any(ks.imag != 0):
        raise InvalidInput("compute_S takes real k; use r11_upper off the axis")
    if check_decay:
        pot.check_decay()
    n_steps = n_steps or default_steps(pot.L, ks)
    S = _scattering_batch(pot, ks, n_steps)
    if check_steps:
        S2 = _scattering_batch(pot, ks, 2 * n_steps)
        change = float(np.max(np.abs(np.abs(S2) - np.abs(S))))
        if change > STEP_GATE:
            raise StepTooCoarse(f"doubling n_steps={n_steps} moved |s_ij| by {change:.3g}")
    out = [ScatteringMatrix(complex(kk), Sk) for kk, Sk in zip(ks, S)]
    return out[0] if scalar else out


def _r11_batch(pot, ks, n_steps):
    J = _integrate(pot, ks, n_steps, cols=(1, 2))
    return J[:, 1, 0] * J[:, 2, 1] - J[:, 1, 1] * J[:, 2, 0]


def r11_upper(pot, k, L: float | None = None, n_steps: int | None = None, *,
              t0: float = 0.0, check_decay: bool = True):
    """r11(k) = s22 s33 - s23 s32 for Im k > 0 (scalar or array)."""
    pot = as_potential(pot, t0, L)
    ks = np.atleast_1d(np.asarray(k, dtype=np.complex128))
    if np.any(ks.imag <= 0):
        raise InvalidInput("r11_upper needs Im k > 0")
    if check_decay:
        pot.check_decay()
    r = _r11_batch(pot, ks, n_steps or default_steps(pot.L, ks))
    return complex(r[0]) if np.ndim(k) == 0 else r


def find_zero_r11(pot, k_guess: complex, L: float | None = None, n_steps: int | None = None, *,
                  t0: float = 0.0, delta: float = 1e-5, max_iter: int = 50,
                  ftol: float = 1e-9, ktol: float = 1e-10) -> complex:
    """Newton iteration for a zero of r11 starting from ``k_guess``.

    The derivative averages central differences along the real and
    imaginary directions, which agree for an analytic function. Steps are
    halved until the iterate stays in the upper half-plane and |r11|
    decreases; r11 has poles at conj(k_m), so a full step can overshoot.
    """
    pot = as_potential(pot, t0, L)
    pot.check_decay()
    k = complex(k_guess)
    if not k.imag > 0:
        raise LeftUpperHalfPlane(f"guess {k} is not in the upper half-plane")
    n_steps = n_steps or default_steps(pot.L, abs(k) + 1.0)
    offsets = np.array([0.0, delta, -delta, 1j * delta, -1j * delta])
    r = _r11_batch(pot, k + offsets, n_steps)
    for _ in range(max_iter):
        r0, rp, rm, rip, rim = r
        if abs(r0) < ftol:
            return k
        deriv = 0.5 * ((rp - rm) / (2 * delta) + (rip - rim) / (2j * delta))
        if deriv == 0 or not np.isfinite(deriv):
            raise NoConvergence(f"r11 has zero derivative at k = {k}")
        dk = complex(-r0 / deriv)
        for _ in range(40):
            trial = k + dk
            if trial.imag > 2 * delta:
                r = _r11_batch(pot, trial + offsets, n_steps)
                if abs(r[0]) < abs(r0):
                    break
            dk *= 0.5
        else:
            raise LeftUpperHalfPlane(f"no step from k = {k} stays in the upper half-plane")
        k = trial
        if abs(dk) < ktol:
            return k
    raise NoConvergence(f"no zero of r11 after {max_iter} iterations (last k = {k})")


def _soliton_potential(data, t, L):
    if isinstance(data, PotentialSampler):
        return data
    return as_potential(data, t, L)


def scattering_time_evolution_check(data, k: float, t1: float, t2: float,
                                    L: float | None = None, n_steps: int | None = None) -> dict:
    """Compare S(k) of the potential at t1 and t2 against the time-evolution laws.

    ``data`` is a SolitonData (or any ``(x, t)`` sampler). s11 and the lower
    2 x 2 block must be constant; s12, s13 pick up e^{2ik^2 dt} and s21, s31
    pick up e^{-2ik^2 dt}.
    """
    if L is None:
        L = max(decay_half_width(data, [t1, t2]), 1.0)
    S1 = compute_S(as_potential(data, t1, L), k, n_steps=n_steps, check_steps=False).S
    S2 = compute_S(as_potential(data, t2, L), k, n_steps=n_steps, check_steps=False).S
    dt = t2 - t1
    up = np.exp(2j * k * k * dt)
    return {
        "k": k, "t1": t1, "t2": t2, "L": L,
        "drift_s11": float(abs(S2[0, 0] - S1[0, 0])),
        "drift_s22": float(abs(S2[1, 1] - S1[1, 1])),
        "drift_s23": float(abs(S2[1, 2] - S1[1, 2])),
        "drift_s32": float(abs(S2[2, 1] - S1[2, 1])),
        "drift_s33": float(abs(S2[2, 2] - S1[2, 2])),
        "law_s12": float(abs(S2[0, 1] - S1[0, 1] * up)),
        "law_s13": float(abs(S2[0, 2] - S1[0, 2] * up)),
        "law_s21": float(abs(S2[1, 0] - S1[1, 0] / up)),
        "law_s31": float(abs(S2[2, 0] - S1[2, 0] / up)),
    }


def unit_jump_check(data, k, t0: float = 0.0, L: float | None = None,
                    n_steps: int | None = None) -> float:
    """max(|s12|, |s13|, |s21|, |s31|) at real k; near zero for reflectionless potentials."""
    S = compute_S(data, k, L, n_steps, t0=t0)
    if isinstance(S, list):
        return max(s.off_diagonal for s in S)
    return S.off_diagonal


def gaussian_potential(amplitude: float = 1.0, width: float = 1.0):
    """q1 = a exp(-(x/w)^2), q2 = 0; a non-reflectionless control."""

    def func(x, t):
        x = np.asarray(x, dtype=float)
        return amplitude * np.exp(-(x / width) ** 2) + 0j, np.zeros(np.shape(x), dtype=np.complex128)

    return func


__all__ = [
    "PotentialSampler", "ScatteringMatrix", "compute_S", "r11_upper", "find_zero_r11",
    "scattering_time_evolution_check", "unit_jump_check", "gaussian_potential", "SolitonData",
]
