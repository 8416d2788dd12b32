"""Strang split-step Fourier integrator for the mixed coupled NLS system.

The periodic box is [-L, L) with n points. The nonlinear substep multiplies by
exp(i V dt/2), V = |q2|^2 - |q1|^2. It does not change |q_i|, so V is frozen
during the substep and the rotation is exact. The linear substep is exact in
Fourier space. Both substeps are unitary, so the discrete masses are
conserved to roundoff.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import NotPowerOfTwo, SingularSample
from .fft import fft, ifft, is_power_of_two


@dataclass(frozen=True)
class SimState:
    L: float
    n: int
    q1: np.ndarray
    q2: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        if not is_power_of_two(self.n):
            raise NotPowerOfTwo(f"n = {self.n} is not a power of two")

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.n

    @property
    def x(self) -> np.ndarray:
        return -self.L + self.dx * np.arange(self.n)

    @property
    def xi(self) -> np.ndarray:
        """Angular wavenumbers pi*j/L in wrap order j = 0..n/2-1, -n/2..-1."""
        j = np.arange(self.n)
        j = np.where(j < self.n // 2, j, j - self.n)
        return np.pi * j / self.L

    def masses(self) -> tuple[float, float]:
        return (float(np.sum(np.abs(self.q1) ** 2) * self.dx),
                float(np.sum(np.abs(self.q2) ** 2) * self.dx))


def _sample(sampler, x, t):
    out = sampler(x, t)
    q1, q2 = np.asarray(out[0], dtype=np.complex128), np.asarray(out[1], dtype=np.complex128)
    if len(out) > 2 and np.any(out[2]):
        raise SingularSample(f"sampler is singular at {np.count_nonzero(out[2])} grid point(s)")
    if not (np.all(np.isfinite(q1)) and np.all(np.isfinite(q2))):
        raise SingularSample("sampler returned non-finite values")
    return q1, q2


def init_state(sampler, L: float, n: int, t0: float = 0.0) -> SimState:
    if not is_power_of_two(n):
        raise NotPowerOfTwo(f"n = {n} is not a power of two")
    x = -L + (2.0 * L / n) * np.arange(n)
    q1, q2 = _sample(sampler, x, t0)
    return SimState(float(L), int(n), q1.copy(), q2.copy(), float(t0))


def _half_nonlinear(q, dt):
    V = np.abs(q[1]) ** 2 - np.abs(q[0]) ** 2
    return q * np.exp(0.5j * dt * V)


def _advance(q, xi, dt, steps):
    lin = np.exp(-0.5j * dt * xi ** 2)
    for _ in range(steps):
        q = _half_nonlinear(q, dt)
        q = ifft(fft(q) * lin)
        q = _half_nonlinear(q, dt)
    return q


def step(state: SimState, dt: float) -> SimState:
    if not dt > 0:
        raise ValueError("dt must be positive")
    q = _advance(np.stack([state.q1, state.q2]), state.xi, dt, 1)
    return replace(state, q1=q[0], q2=q[1], t=state.t + dt)


def evolve(state: SimState, T: float, dt: float) -> SimState:
    """Advance by T using steps of dt; a final shorter step lands exactly on t0 + T.

    Step counts are rounded when T/dt is within 1e-9 of an integer.
    """
    if not T > 0 or not dt > 0:
        raise ValueError("T and dt must be positive")
    ratio = T / dt
    full = int(math.floor(ratio + 1e-9))
    rest = T - full * dt
    if abs(rest) <= 1e-9 * dt:
        rest = 0.0
    q = _advance(np.stack([state.q1, state.q2]), state.xi, dt, full)
    if rest > 0:
        q = _advance(q, state.xi, rest, 1)
    return replace(state, q1=q[0], q2=q[1], t=state.t + T)


def conjugated(state: SimState) -> SimState:
    """Complex-conjugate fields; evolving these forward undoes a forward evolution."""
    return replace(state, q1=np.conj(state.q1), q2=np.conj(state.q2))


def compare(state: SimState, sampler) -> tuple[float, float]:
    """(L-infinity, grid L2) distance to ``sampler`` at ``state.t``, max over components."""
    a1, a2 = _sample(sampler, state.x, state.t)
    d1 = np.abs(state.q1 - a1)
    d2 = np.abs(state.q2 - a2)
    linf = float(max(d1.max(), d2.max()))
    l2 = float(max(np.sqrt(np.sum(d1 ** 2) * state.dx), np.sqrt(np.sum(d2 ** 2) * state.dx)))
    return linf, l2


def write_snapshot(path, state: SimState):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "re_q1", "im_q1", "re_q2", "im_q2"])
        for x, a, b in zip(state.x, state.q1, state.q2):
            w.writerow([f"{v:.17g}" for v in (x, a.real, a.imag, b.real, b.imag)])


def decay_half_width(sampler, t_values, gate: float = 1e-10, start: float = 20.0,
                     limit: float = 1e5) -> float:
    """Smallest L (doubling from ``start``, then bisected to within 1%) with
    |q_i(+-L, t)| below ``gate`` for all given t and beyond up to 2L."""

    def ok(L):
        x = np.linspace(L, 2 * L, 64)
        x = np.concatenate([-x, x])
        for t in np.atleast_1d(t_values):
            q1, q2 = _sample(sampler, x, float(t))
            if max(np.abs(q1).max(), np.abs(q2).max()) >= gate:
                return False
        return True

    hi = start
    while not ok(hi):
        hi *= 2
        if hi > limit:
            raise SingularSample(f"fields do not decay below {gate:g} within |x| < {limit:g}")
    lo = hi / 2 if hi > start else 0.0
    while hi - lo > 0.01 * hi:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi
