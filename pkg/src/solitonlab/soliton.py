"""Reflectionless N-soliton fields of the mixed coupled NLS system.

The fields are

    q_j = 2 sum_{m,n} c_{mj} exp(theta_m - conj(theta_n)) (M^{-1})_{mn},
    M_mn = [exp(-(conj(theta_m) + theta_n))
            + sum_j s_j conj(c_mj) c_nj exp(conj(theta_m) + theta_n)] / (conj(k_m) - k_n),

with theta_m = -i k_m x - i k_m^2 t and signature s = (-1, +1) for the
mixed system (components ordered q1, q2). Other signatures give the
multi-component generalization  i q_t + q_xx / 2 + (sum_j s_j |q_j|^2) q = 0.

Internally every polarization vector v_m = (e^{-theta_m}, c_m e^{theta_m}) is
rescaled by e^{-|Re theta_m|} before the Gram matrix is formed. The fields
are invariant under any such rescaling, and the balanced matrix has entries
of order one wherever the solitons are, so nothing overflows.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidInput, Overflow, SingularMatrix, SingularPoint
from .numkit import Grid1D, SINGULAR_RTOL, batched_lu_invert, lu_factor_invert

MCNLS_SIGNATURE = (-1, 1)
EXP_CLAMP = 300.0
FAR_FIELD = 40.0
CLOSED_FORM_RTOL = 1e-12


def _as_complex(z, name: str) -> complex:
    z = complex(z)
    if not (np.isfinite(z.real) and np.isfinite(z.imag)):
        raise InvalidInput(f"{name} must be finite, got {z}")
    return z


@dataclass(frozen=True)
class SpectralDatum:
    """Discrete eigenvalue ``k`` (upper half-plane) with polarization ``(c, d)``.

    The lower half-plane partner is always ``conj(k)``.
    """

    k: complex
    c: complex
    d: complex

    def __post_init__(self):
        object.__setattr__(self, "k", _as_complex(self.k, "k"))
        object.__setattr__(self, "c", _as_complex(self.c, "c"))
        object.__setattr__(self, "d", _as_complex(self.d, "d"))
        if not self.k.imag > 0:
            raise InvalidInput(f"Im k must be > 0, got k = {self.k}")
        if self.c == 0 and self.d == 0:
            raise InvalidInput("(c, d) must not both vanish")

    @property
    def branch(self) -> str:
        """'sech' when |c| < |d| (regular), 'csch' when |c| > |d| (has a pole line)."""
        gap = abs(self.d) ** 2 - abs(self.c) ** 2
        if gap > 0:
            return "sech"
        return "csch" if gap < 0 else "degenerate"


@dataclass(frozen=True)
class GeneralSpectralDatum:
    k: complex
    c: tuple
    signature: tuple

    def __post_init__(self):
        object.__setattr__(self, "k", _as_complex(self.k, "k"))
        object.__setattr__(self, "c", tuple(_as_complex(z, "c") for z in self.c))
        object.__setattr__(self, "signature", tuple(int(s) for s in self.signature))
        if not self.k.imag > 0:
            raise InvalidInput(f"Im k must be > 0, got k = {self.k}")
        if len(self.c) == 0 or len(self.c) != len(self.signature):
            raise InvalidInput("c and signature must have the same nonzero length")
        if any(s not in (-1, 1) for s in self.signature):
            raise InvalidInput(f"signature entries must be +1 or -1, got {self.signature}")
        if all(z == 0 for z in self.c):
            raise InvalidInput("polarization vector must not vanish")


def _check_distinct(ks: np.ndarray):
    for m in range(len(ks)):
        for n in range(m + 1, len(ks)):
            if abs(ks[m] - ks[n]) <= 1e-12 * (1 + abs(ks[m])):
                raise InvalidInput(f"eigenvalues must be distinct; k[{m}] == k[{n}] == {ks[m]}")


class SolitonData(Sequence):
    """Ordered discrete spectrum of an N-soliton mixed-CNLS field.

    Calling the object evaluates the fields, so it doubles as a sampler
    ``(x, t) -> (q1, q2, singular)`` for the verifiers.
    """

    signature = MCNLS_SIGNATURE

    def __init__(self, data: Iterable[SpectralDatum] = ()):
        self._data = tuple(d if isinstance(d, SpectralDatum) else SpectralDatum(*d) for d in data)
        self.k = np.array([d.k for d in self._data], dtype=np.complex128)
        self.C = np.array([[d.c, d.d] for d in self._data], dtype=np.complex128).reshape(-1, 2)
        _check_distinct(self.k)

    @classmethod
    def from_tuples(cls, rows) -> "SolitonData":
        return cls(SpectralDatum(*r) for r in rows)

    def __getitem__(self, i):
        return self._data[i]

    def __len__(self):
        return len(self._data)

    def __repr__(self):
        return f"SolitonData({list(self._data)!r})"

    def __eq__(self, other):
        return isinstance(other, SolitonData) and self._data == other._data

    def __hash__(self):
        return hash(self._data)

    def __call__(self, x, t):
        q, singular = _fields_core(self.k, self.C, self.signature, x, t)
        return q[0], q[1], singular

    def transformed(self, c_factor) -> "SolitonData":
        """Copy with every (c_m, d_m) multiplied by ``c_factor[m]`` (scalar broadcasts)."""
        f = np.broadcast_to(np.asarray(c_factor, dtype=np.complex128), (len(self),))
        return SolitonData(SpectralDatum(d.k, d.c * f[m], d.d * f[m]) for m, d in enumerate(self._data))


@dataclass(frozen=True)
class FieldSample:
    q1: complex
    q2: complex
    singular: bool = False


@dataclass
class FieldGrid:
    """Fields on a (t, x) lattice; arrays have shape ``(tgrid.n, xgrid.n)``."""

    xgrid: Grid1D
    tgrid: Grid1D
    q1: np.ndarray
    q2: np.ndarray
    singular: np.ndarray

    def sample(self, i: int, j: int) -> FieldSample:
        return FieldSample(complex(self.q1[i, j]), complex(self.q2[i, j]), bool(self.singular[i, j]))


def theta(datum: SpectralDatum, x, t):
    """-i k x - i k^2 t."""
    k = datum.k
    return -1j * k * np.asarray(x) - 1j * k * k * np.asarray(t)


def _thetas(k: np.ndarray, x, t):
    x, t = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(t, dtype=float))
    kk = k.reshape((-1,) + (1,) * x.ndim)
    return -1j * kk * x - 1j * kk * kk * t, x.shape


def _weights(C: np.ndarray, signature) -> np.ndarray:
    """G_mn = sum_j s_j conj(c_mj) c_nj."""
    s = np.asarray(signature, dtype=float)
    return (np.conj(C)[:, None, :] * C[None, :, :] * s).sum(axis=-1)


def _balanced_gram(k, C, signature, th):
    """Balanced Gram matrices for thetas of shape (N, P); returns (M, scale, a, b, shift)."""
    re = th.real
    shift = np.abs(re)
    a = np.exp(-th - shift).T          # e^{-theta_m} e^{-|Re theta_m|}, shape (P, N)
    b = np.exp(th - shift).T           # e^{+theta_m} e^{-|Re theta_m|}
    denom = np.conj(k)[:, None] - k[None, :]
    first = np.conj(a)[:, :, None] * a[:, None, :]
    second = np.conj(b)[:, :, None] * b[:, None, :] * _weights(C, signature)
    M = (first + second) / denom
    scale = (np.abs(first) + np.abs(second)) / np.abs(denom)
    return M, scale, a, b, shift


def _fields_core(k, C, signature, x, t):
    """Shared evaluation path for every signature; returns (q[n_comp, ...], singular[...])."""
    n_comp = C.shape[1] if C.ndim == 2 else len(signature)
    th, shape = _thetas(k, x, t)
    q = np.zeros((n_comp,) + shape, dtype=np.complex128)
    singular = np.zeros(shape, dtype=bool)
    N = len(k)
    if N == 0:
        return q, singular

    th = th.reshape(N, -1)
    near = ~np.all(np.abs(2.0 * th.real) > FAR_FIELD, axis=0)
    idx = np.flatnonzero(near)
    if idx.size == 0:
        return q, singular

    M, scale, a, b, _ = _balanced_gram(k, C, signature, th[:, idx])
    inv, _, sing = batched_lu_invert(M, SINGULAR_RTOL, scale)
    # w_m = sum_n (M^{-1})_mn conj(a_n)
    w = (inv * np.conj(a)[:, None, :]).sum(axis=-1)
    bw = b * w
    qf = q.reshape(n_comp, -1)
    sf = singular.reshape(-1)
    for j in range(n_comp):
        vals = 2.0 * (C[None, :, j] * bw).sum(axis=-1)
        vals[sing] = np.nan
        qf[j, idx] = vals
    sf[idx] = sing
    return q, singular


def field_arrays(data: SolitonData, x, t):
    """Vectorized fields: ``(q1, q2, singular)`` broadcast over ``x`` and ``t``."""
    return data(x, t)


def eval_fields(data: SolitonData, x: float, t: float) -> FieldSample:
    """Fields at one point. Singular points come back flagged, with NaN values."""
    q1, q2, singular = data(float(x), float(t))
    return FieldSample(complex(q1), complex(q2), bool(singular))


def build_M(data: SolitonData, x: float, t: float) -> np.ndarray:
    """The unscaled N x N Gram matrix at (x, t)."""
    if len(data) == 0:
        raise InvalidInput("Gram matrix needs at least one eigenvalue")
    th, _ = _thetas(data.k, x, t)
    th = th.reshape(len(data), -1)
    worst = float(np.max(np.abs(th.real)))
    if worst > EXP_CLAMP:
        raise Overflow(f"|Re theta| = {worst:.1f} exceeds clamp {EXP_CLAMP}")
    e = np.exp(th).T
    einv = np.exp(-th).T
    denom = np.conj(data.k)[:, None] - data.k[None, :]
    M = (np.conj(einv)[:, :, None] * einv[:, None, :]
         + np.conj(e)[:, :, None] * e[:, None, :] * _weights(data.C, data.signature)) / denom
    return M[0] if np.ndim(x) == 0 and np.ndim(t) == 0 else M


def one_soliton_closed(datum: SpectralDatum, x, t):
    """Closed one-soliton (q1, q2); raises SingularPoint on the pole line."""
    th = theta(datum, x, t)
    u = 2.0 * th.real
    gap = abs(datum.c) ** 2 - abs(datum.d) ** 2
    with np.errstate(over="ignore"):
        left = np.exp(-u)
        right = gap * np.exp(u)
        den = left - right
        phase = np.exp(th - np.conj(th)) * (np.conj(datum.k) - datum.k) * 2.0
        bad = np.abs(den) < CLOSED_FORM_RTOL * np.maximum(np.abs(left), np.abs(right))
        if np.any(bad):
            raise SingularPoint(f"one-soliton denominator vanishes at {np.count_nonzero(bad)} point(s)")
        f = phase / den
    return datum.c * f, datum.d * f


def one_soliton_csch(datum: SpectralDatum, x, t):
    """csch form of the one-soliton, valid for |c| > |d| only."""
    gap = abs(datum.c) ** 2 - abs(datum.d) ** 2
    if not gap > 0:
        raise InvalidInput("csch form needs |c| > |d|")
    xi = 0.5 * np.log(gap)
    th = theta(datum, x, t)
    arg = 2.0 * th.real + xi
    if np.any(arg == 0):
        raise SingularPoint("csch pole")
    f = 2j * datum.k.imag * np.exp(th - np.conj(th) - xi) / np.sinh(arg)
    return datum.c * f, datum.d * f


def two_soliton_closed(data: SolitonData, x, t):
    """Two-soliton (q1, q2) by explicit 2 x 2 inversion of the unscaled Gram matrix."""
    if len(data) != 2:
        raise InvalidInput(f"two_soliton_closed needs N = 2, got {len(data)}")
    (k1, k2), ((c1, d1), (c2, d2)) = data.k, data.C
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    t1 = -1j * k1 * x - 1j * k1 ** 2 * t
    t2 = -1j * k2 * x - 1j * k2 ** 2 * t
    t1c, t2c = np.conj(t1), np.conj(t2)
    k1c, k2c = np.conj(k1), np.conj(k2)
    m11 = (np.exp(-(t1c + t1)) - (abs(c1) ** 2 - abs(d1) ** 2) * np.exp(t1c + t1)) / (k1c - k1)
    m12 = (np.exp(-(t1c + t2)) - (np.conj(c1) * c2 - np.conj(d1) * d2) * np.exp(t1c + t2)) / (k1c - k2)
    m21 = (np.exp(-(t2c + t1)) - (np.conj(c2) * c1 - np.conj(d2) * d1) * np.exp(t2c + t1)) / (k2c - k1)
    m22 = (np.exp(-(t2c + t2)) - (abs(c2) ** 2 - abs(d2) ** 2) * np.exp(t2c + t2)) / (k2c - k2)
    det = m11 * m22 - m12 * m21
    if np.any(np.abs(det) < CLOSED_FORM_RTOL * (np.abs(m11 * m22) + np.abs(m12 * m21))):
        raise SingularPoint("two-soliton Gram determinant vanishes")
    i11, i12, i21, i22 = m22 / det, -m12 / det, -m21 / det, m11 / det
    e11 = np.exp(t1 - t1c)
    e12 = np.exp(t1 - t2c)
    e21 = np.exp(t2 - t1c)
    e22 = np.exp(t2 - t2c)
    q1 = 2 * (c1 * e11 * i11 + c1 * e12 * i12 + c2 * e21 * i21 + c2 * e22 * i22)
    q2 = 2 * (d1 * e11 * i11 + d1 * e12 * i12 + d2 * e21 * i21 + d2 * e22 * i22)
    return q1, q2


def _threads() -> int:
    try:
        n = int(os.environ.get("SOLITONLAB_THREADS", "1"))
    except ValueError:
        n = 1
    return max(1, n)


def eval_grid(data: SolitonData, xgrid: Grid1D, tgrid: Grid1D, threads: int | None = None) -> FieldGrid:
    """Fields over the full lattice; singular points are masked, never raised.

    Rows in t are split across ``threads`` workers (default from
    ``SOLITONLAB_THREADS``). Each row is computed independently so the
    result does not depend on the split.
    """
    xs = xgrid.values
    ts = tgrid.values
    q1 = np.empty((tgrid.n, xgrid.n), dtype=np.complex128)
    q2 = np.empty_like(q1)
    sing = np.empty(q1.shape, dtype=bool)

    def rows(i0, i1):
        a, b, s = data(xs[None, :], ts[i0:i1, None])
        q1[i0:i1], q2[i0:i1], sing[i0:i1] = a, b, s

    threads = threads or _threads()
    chunk = max(1, int(np.ceil(tgrid.n / threads)))
    spans = [(i, min(i + chunk, tgrid.n)) for i in range(0, tgrid.n, chunk)]
    if len(spans) == 1:
        rows(*spans[0])
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(lambda s: rows(*s), spans))
    return FieldGrid(xgrid, tgrid, q1, q2, sing)


def min_abs_detM(data: SolitonData, xgrid: Grid1D, tgrid: Grid1D):
    """Smallest |det M| over the lattice and where it occurs, as ``(value, (x, t))``."""
    if len(data) == 0:
        raise InvalidInput("no eigenvalues, no Gram matrix")
    X, T = np.meshgrid(xgrid.values, tgrid.values)
    th, _ = _thetas(data.k, X.ravel(), T.ravel())
    M, scale, _, _, shift = _balanced_gram(data.k, data.C, data.signature, th)
    _, det, sing = batched_lu_invert(M, SINGULAR_RTOL, scale)
    with np.errstate(divide="ignore"):
        logdet = np.where(sing, -np.inf, np.log(np.abs(det)) + 2.0 * shift.sum(axis=0))
    i = int(np.argmin(logdet))
    return float(np.exp(logdet[i])), (float(X.ravel()[i]), float(T.ravel()[i]))


def _general_arrays(data: Sequence[GeneralSpectralDatum]):
    if len(data) == 0:
        raise InvalidInput("empty general spectral data")
    sig = data[0].signature
    if any(d.signature != sig for d in data):
        raise InvalidInput("all data must share one signature")
    k = np.array([d.k for d in data], dtype=np.complex128)
    _check_distinct(k)
    C = np.array([d.c for d in data], dtype=np.complex128)
    return k, C, sig


def general_sampler(data: Sequence[GeneralSpectralDatum]):
    """Vectorized ``(x, t) -> (q[n_comp, ...], singular)`` for the multi-component system."""
    k, C, sig = _general_arrays(data)

    def sample(x, t):
        return _fields_core(k, C, sig, x, t)

    sample.signature = sig
    return sample


def eval_fields_general(data: Sequence[GeneralSpectralDatum], x: float, t: float) -> list[complex]:
    q, singular = general_sampler(data)(float(x), float(t))
    if singular:
        raise SingularPoint(f"Gram matrix singular at x={x}, t={t}")
    return [complex(v) for v in q]


def reconstruct_P1(data: SolitonData, x: float, t: float) -> np.ndarray:
    """First large-k coefficient of the analytic RH solution, sum_mn v_m (M^{-1})_mn v^_n.

    Raises SingularMatrix where the Gram matrix is not invertible.
    """
    if len(data) == 0:
        raise InvalidInput("need at least one eigenvalue")
    th, _ = _thetas(data.k, float(x), float(t))
    M, scale, a, b, _ = _balanced_gram(data.k, data.C, data.signature, th.reshape(len(data), 1))
    inv, _ = lu_factor_invert(M[0], SINGULAR_RTOL, scale[0])
    a, b = a[0], b[0]
    V = np.vstack([a, data.C[:, 0] * b, data.C[:, 1] * b])          # columns v_m
    sigma = np.array([1.0, *data.signature])
    Vhat = np.conj(V).T * sigma                                       # rows v_m^dagger sigma
    return V @ inv @ Vhat


__all__ = [
    "SpectralDatum", "GeneralSpectralDatum", "SolitonData", "FieldSample", "FieldGrid",
    "theta", "build_M", "eval_fields", "field_arrays", "one_soliton_closed", "one_soliton_csch",
    "two_soliton_closed", "eval_grid", "min_abs_detM", "reconstruct_P1", "eval_fields_general",
    "general_sampler", "MCNLS_SIGNATURE", "SingularMatrix",
]
