"""Complex dense linear algebra and uniform grids.

Scalars are plain Python ``complex``; matrices are ``complex128`` numpy
arrays. The LU routines work on a single ``(n, n)`` matrix or on a stack
``(..., n, n)`` so that a whole space-time grid of small Gram matrices can
be factored in one vectorized pass.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidRange, SingularMatrix

SINGULAR_RTOL = 1e-14


@dataclass(frozen=True)
class Grid1D:
    start: float
    stop: float
    n: int

    def __post_init__(self):
        if not (np.isfinite(self.start) and np.isfinite(self.stop)):
            raise InvalidRange("grid bounds must be finite")
        if self.n < 2:
            raise InvalidRange(f"need n >= 2, got {self.n}")
        if not self.stop > self.start:
            raise InvalidRange(f"need stop > start, got [{self.start}, {self.stop}]")

    @property
    def h(self) -> float:
        return (self.stop - self.start) / (self.n - 1)

    @property
    def values(self) -> np.ndarray:
        v = self.start + self.h * np.arange(self.n, dtype=float)
        v[-1] = self.stop
        return v

    def __len__(self):
        return self.n

    def __getitem__(self, i):
        return self.values[i]


def uniform_grid(start: float, stop: float, n: int) -> Grid1D:
    return Grid1D(float(start), float(stop), int(n))


def as_cmatrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise ValueError(f"expected square matrix (stack), got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def lu_factor(a, rtol: float = SINGULAR_RTOL, scale=None):
    """Partial-pivoting LU of a square matrix or a stack of them.

    Returns ``(lu, perm, sign, singular)``: packed unit-lower/upper factors,
    the row permutation, the permutation parity (+1/-1) and a boolean mask
    that is set where some pivot fell below ``rtol`` times the largest
    absolute row sum of the input. Singular members get a unit pivot so the
    sweep can continue; their factors are meaningless.

    ``scale``, if given, is an elementwise magnitude envelope of ``a`` (same
    shape) whose row sums replace those of ``a`` in the threshold. Entries
    formed by cancellation of large terms use it to flag lost rank.
    """
    a = as_cmatrix(a)
    n = a.shape[-1]
    batch = a.shape[:-2]
    lu = a.reshape((-1, n, n)).copy()
    m = lu.shape[0]
    rows = np.arange(m)
    perm = np.tile(np.arange(n), (m, 1))
    sign = np.ones(m)
    singular = np.zeros(m, dtype=bool)
    ref = np.abs(lu) if scale is None else np.abs(np.asarray(scale)).reshape((-1, n, n))
    thresh = rtol * ref.sum(axis=2).max(axis=1)

    for j in range(n):
        p = j + np.argmax(np.abs(lu[:, j:, j]), axis=1)
        swap = p != j
        if np.any(swap):
            r = rows[swap]
            pj = p[swap]
            tmp = lu[r, j, :].copy()
            lu[r, j, :] = lu[r, pj, :]
            lu[r, pj, :] = tmp
            tmp = perm[r, j].copy()
            perm[r, j] = perm[r, pj]
            perm[r, pj] = tmp
            sign[swap] = -sign[swap]
        piv = lu[:, j, j]
        bad = np.abs(piv) <= thresh
        if np.any(bad):
            singular |= bad
            lu[bad, j, j] = 1.0
            piv = lu[:, j, j]
        if j + 1 < n:
            lu[:, j + 1:, j] /= piv[:, None]
            lu[:, j + 1:, j + 1:] -= lu[:, j + 1:, j, None] * lu[:, None, j, j + 1:]

    return (lu.reshape(a.shape), perm.reshape(batch + (n,)),
            sign.reshape(batch), singular.reshape(batch))


def _lu_inverse(lu, perm):
    n = lu.shape[-1]
    flat = lu.reshape((-1, n, n))
    pf = perm.reshape((-1, n))
    m = flat.shape[0]
    # P A = L U, so A^{-1} = U^{-1} L^{-1} P
    y = np.zeros((m, n, n), dtype=np.complex128)
    y[np.arange(m)[:, None], np.arange(n)[None, :], pf] = 1.0
    for i in range(1, n):
        y[:, i, :] -= (flat[:, i, :i, None] * y[:, :i, :]).sum(axis=1)
    for i in range(n - 1, -1, -1):
        if i + 1 < n:
            y[:, i, :] -= (flat[:, i, i + 1:, None] * y[:, i + 1:, :]).sum(axis=1)
        y[:, i, :] /= flat[:, i, i, None]
    return y.reshape(lu.shape)


def batched_lu_invert(a, rtol: float = SINGULAR_RTOL, scale=None):
    """Inverse and determinant of every matrix in a stack.

    Never raises on singular members; they come back with NaN inverse,
    zero determinant and ``singular`` set.
    """
    lu, perm, sign, singular = lu_factor(a, rtol, scale)
    inv = _lu_inverse(lu, perm)
    det = sign * np.prod(np.diagonal(lu, axis1=-2, axis2=-1), axis=-1)
    if np.any(singular):
        inv[singular] = np.nan
        det = np.where(singular, 0.0, det)
    return inv, det, singular


def lu_factor_invert(a, rtol: float = SINGULAR_RTOL, scale=None) -> tuple[np.ndarray, complex]:
    """Inverse and determinant of one square complex matrix.

    >>> inv, det = lu_factor_invert(np.diag([2j, -1j]))
    >>> det
    (2+0j)
    """
    a = as_cmatrix(a)
    if a.ndim != 2:
        raise ValueError("lu_factor_invert takes a single matrix; use batched_lu_invert")
    inv, det, singular = batched_lu_invert(a, rtol, scale)
    if singular:
        raise SingularMatrix(f"pivot below {rtol:g} x max row norm")
    return inv, complex(det)


def inf_norm(a) -> float:
    """Max absolute row sum."""
    a = np.asarray(a)
    return float(np.abs(a).sum(axis=-1).max())
