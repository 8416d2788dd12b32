"""Iterative radix-2 FFT (bit-reversal + decimation in time).

Works along the last axis of any complex array whose length is a power of
two. Conventions match ``numpy.fft``: forward is unnormalized with
``exp(-2 pi i j k / n)``, inverse carries the ``1/n``.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import NotPowerOfTwo


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@lru_cache(maxsize=32)
def _plan(n: int):
    if not is_power_of_two(n):
        raise NotPowerOfTwo(f"length {n} is not a power of two")
    bits = n.bit_length() - 1
    rev = np.zeros(n, dtype=np.intp)
    idx = np.arange(n)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    twiddles = []
    size = 2
    while size <= n:
        half = size // 2
        twiddles.append(np.exp(-2j * np.pi * np.arange(half) / size))
        size *= 2
    return rev, tuple(twiddles)


def _transform(a: np.ndarray, inverse: bool) -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    n = a.shape[-1]
    rev, twiddles = _plan(n)
    lead = a.shape[:-1]
    x = a[..., rev]
    size = 2
    for w in twiddles:
        half = size // 2
        if inverse:
            w = np.conj(w)
        blocks = x.reshape(lead + (n // size, 2, half))
        even = blocks[..., 0, :]
        odd = blocks[..., 1, :] * w
        x = np.concatenate((even + odd, even - odd), axis=-1).reshape(lead + (n,))
        size *= 2
    if inverse:
        x /= n
    return x


def fft(a) -> np.ndarray:
    return _transform(a, inverse=False)


def ifft(a) -> np.ndarray:
    return _transform(a, inverse=True)
