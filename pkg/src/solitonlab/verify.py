"""Finite-difference checks that sampled fields solve the coupled NLS system.

A *sampler* is any callable ``(x, t)`` broadcasting over numpy arrays and
returning either ``(q1, q2, singular)`` for the two-component mixed system or
``(q, singular)`` with ``q`` stacked along a leading component axis. The
nonlinearity is ``sum_j s_j |q_j|^2`` where ``s`` is the sampler's
``signature`` attribute (default ``(-1, +1)``, i.e. ``|q2|^2 - |q1|^2``).

All derivatives use 5-point, fourth-order central stencils and are taken
directly from the sampler, never from stored grids.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.integrate import simpson

from .errors import NonDecayedBoundary, StencilOnSingularity
from .soliton import MCNLS_SIGNATURE

D1 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
D2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
OFFSETS = np.arange(-2, 3)


def signature_of(sampler) -> tuple:
    return tuple(getattr(sampler, "signature", MCNLS_SIGNATURE))


def sample_stack(sampler, x, t):
    """Evaluate a sampler as ``(q[n_comp, ...], singular[...])``."""
    out = sampler(x, t)
    if len(out) == 3:
        q = np.stack(np.broadcast_arrays(np.asarray(out[0]), np.asarray(out[1])))
        singular = out[2]
    else:
        q, singular = np.asarray(out[0]), out[1]
    return q.astype(np.complex128, copy=False), np.asarray(singular, dtype=bool)


def _checked(sampler, x, t):
    q, singular = sample_stack(sampler, x, t)
    if np.any(singular) or not np.all(np.isfinite(q)):
        raise StencilOnSingularity("stencil touches a singular point of the field")
    return q


def pde_residual(sampler, x, t, hx: float, ht: float):
    """Residual ``i q_t + q_xx/2 + (sum_j s_j |q_j|^2) q`` for every component.

    Returns an array of shape ``(n_comp, ...)`` broadcast over ``x``, ``t``;
    for the mixed system that is ``(r1, r2)``.
    """
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    s = np.asarray(signature_of(sampler), dtype=float)
    q0 = _checked(sampler, x, t)
    qt = sum(w * _checked(sampler, x, t + o * ht) for o, w in zip(OFFSETS, D1) if w) / ht
    qxx = sum(w * (q0 if o == 0 else _checked(sampler, x + o * hx, t))
              for o, w in zip(OFFSETS, D2)) / hx ** 2
    V = np.tensordot(s, np.abs(q0) ** 2, axes=1)
    return 1j * qt + 0.5 * qxx + V * q0


@dataclass(frozen=True)
class LaxMatrices:
    """Lax pair data at one point: x-part ``U = -ik Lambda + iQ``, t-part ``V``."""

    Lambda: np.ndarray
    sigma: np.ndarray
    Q: np.ndarray
    Q1: np.ndarray
    Q2: np.ndarray
    U: np.ndarray
    V: np.ndarray


def lambda_sigma(signature=MCNLS_SIGNATURE):
    n = len(signature) + 1
    Lam = np.diag([-1.0] + [1.0] * (n - 1)).astype(np.complex128)
    sig = np.diag([1.0, *signature]).astype(np.complex128)
    return Lam, sig


def potential_matrix(q, signature=MCNLS_SIGNATURE):
    """Q with first column (0, q) and first row (0, s_j conj(q_j)); stacks over trailing axes.

    For the mixed system this is [[0, -q1*, q2*], [q1, 0, 0], [q2, 0, 0]].
    """
    q = np.asarray(q, dtype=np.complex128)
    n = q.shape[0] + 1
    Q = np.zeros(q.shape[1:] + (n, n), dtype=np.complex128)
    for j, s in enumerate(signature):
        Q[..., j + 1, 0] = q[j]
        Q[..., 0, j + 1] = s * np.conj(q[j])
    return Q


def lax_matrices(q, qx, k: complex, signature=MCNLS_SIGNATURE) -> LaxMatrices:
    """Lax matrices from field values ``q`` and x-derivatives ``qx`` (component axis first).

    The t-part is ``-ik^2 Lambda + ikQ + (i Lambda Q^2 - Lambda Q_x)/2``; with
    that choice ``U_t - V_x + [U, V] = 0`` reproduces the field equations.
    """
    Lam, sig = lambda_sigma(signature)
    Q = potential_matrix(q, signature)
    Qx = potential_matrix(qx, signature)
    Q1 = 1j * Q
    Q2 = 1j * k * Q + 0.5 * (1j * Lam @ Q @ Q - Lam @ Qx)
    U = -1j * k * Lam + Q1
    V = -1j * k * k * Lam + Q2
    return LaxMatrices(Lam, sig, Q, Q1, Q2, U, V)


def zero_curvature_residual(sampler, x: float, t: float, k: complex, h: float) -> float:
    """Frobenius norm of ``U_t - V_x + UV - VU`` at (x, t).

    ``U_t = iQ_t`` and ``V_x = ikQ_x + (i Lambda (Q_x Q + Q Q_x) - Lambda Q_xx)/2``
    with ``q_t``, ``q_x``, ``q_xx`` from the 5-point stencils of the sampler.
    """
    sig = signature_of(sampler)
    Lam, _ = lambda_sigma(sig)
    line = _checked(sampler, x + h * OFFSETS, t)
    q = line[:, 2]
    qx = (D1 * line).sum(axis=1) / h
    qxx = (D2 * line).sum(axis=1) / h ** 2
    qt = (D1 * _checked(sampler, np.full(5, x), t + h * OFFSETS)).sum(axis=1) / h
    Q, Qx, Qxx, Qt = (potential_matrix(v, sig) for v in (q, qx, qxx, qt))
    lm = lax_matrices(q, qx, k, sig)
    Vx = 1j * k * Qx + 0.5 * (1j * Lam @ (Qx @ Q + Q @ Qx) - Lam @ Qxx)
    R = 1j * Qt - Vx + lm.U @ lm.V - lm.V @ lm.U
    return float(np.linalg.norm(R))


def masses(q1_row, q2_row, xgrid, boundary_tol: float = 1e-6) -> tuple[float, float]:
    """Simpson-rule L2 masses of each component along one time slice."""
    x = xgrid.values if hasattr(xgrid, "values") else np.asarray(xgrid, dtype=float)
    out = []
    for name, q in (("q1", q1_row), ("q2", q2_row)):
        q = np.asarray(q)
        if max(abs(q[0]), abs(q[-1])) > boundary_tol:
            raise NonDecayedBoundary(f"|{name}| at the grid ends exceeds {boundary_tol:g}")
        out.append(float(simpson(np.abs(q) ** 2, x=x)))
    return out[0], out[1]


@dataclass
class ResidualReport:
    max_abs_r1: float
    max_abs_r2: float
    nx: int
    nt: int
    hx: float
    ht: float
    stencil: str = "5-point central, 4th order in x and t"
    runtime_s: float = 0.0
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def residual_report(sampler, xs, ts, hx: float = 1e-2, ht: float = 1e-2) -> ResidualReport:
    """Max |residual| per component over the lattice ``ts x xs``."""
    t0 = time.perf_counter()
    xs = np.asarray(xs, dtype=float)
    ts = np.asarray(ts, dtype=float)
    r = pde_residual(sampler, xs[None, :], ts[:, None], hx, ht)
    peaks = np.abs(r).reshape(r.shape[0], -1).max(axis=1)
    return ResidualReport(float(peaks[0]), float(peaks[1]) if len(peaks) > 1 else 0.0,
                          len(xs), len(ts), hx, ht, runtime_s=time.perf_counter() - t0)


def peak_location(sampler, t: float, lo: float = -2000.0, hi: float = 2000.0, n: int = 40001) -> float:
    """x of the largest total intensity at time t, from a uniform scan."""
    x = np.linspace(lo, hi, n)
    q, singular = sample_stack(sampler, x, t)
    inten = np.where(singular, -1.0, (np.abs(q) ** 2).sum(axis=0))
    return float(x[int(np.nanargmax(inten))])


def verification_window(sampler, t: float, half: float = 30.0):
    xp = peak_location(sampler, t)
    return xp - half, xp + half
