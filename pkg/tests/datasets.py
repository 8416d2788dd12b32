"""Spectral data shared by the test modules."""

import numpy as np

from solitonlab import Grid1D, SolitonData, SpectralDatum

FIG = SolitonData([SpectralDatum(0.2 + 0.03j, -2, -4)])
TWO = SolitonData([SpectralDatum(0.2 + 0.03j, -2, -4), SpectralDatum(-0.3 + 0.05j, 1 + 0.5j, 3)])
# a livelier pair with a fast mutual collision, for residual and scattering checks
PAIR = SolitonData([SpectralDatum(0.4 + 0.5j, 0.5, 1.5 + 0.5j), SpectralDatum(-0.3 + 0.4j, 0.3j, 1.0)])
CSCH = SolitonData([SpectralDatum(1j, 1, 0)])


def random_datum(rng) -> SpectralDatum:
    """One sech-branch datum with |k| of order one."""
    k = complex(rng.uniform(-0.6, 0.6), rng.uniform(0.25, 0.7))
    d = complex(*rng.normal(size=2))
    c = complex(*rng.normal(size=2))
    c *= rng.uniform(0.1, 0.9) * abs(d) / abs(c)
    return SpectralDatum(k, c, d)


def random_regular(rng, n: int, window=60.0, times=(-5.0, 0.0, 5.0)) -> SolitonData:
    """Rejection-sample N sech-branch solitons whose fields stay regular and
    moderate on [-window, window] x times (the indefinite Gram matrix can
    still vanish for N >= 2, so every draw is checked)."""
    xs = np.linspace(-window, window, 1201)
    while True:
        ds = [random_datum(rng) for _ in range(n)]
        ks = [d.k for d in ds]
        if min((abs(a - b) for i, a in enumerate(ks) for b in ks[i + 1:]), default=1.0) < 0.15:
            continue
        data = SolitonData(ds)
        ok = True
        for t in times:
            q1, q2, sing = data(xs, t)
            if sing.any() or max(np.abs(q1).max(), np.abs(q2).max()) > 3.0:
                ok = False
                break
        if ok and min_gap(data, window, times) > 1e-3:
            return data


def min_gap(data, window, times) -> float:
    from solitonlab import min_abs_detM

    m, _ = min_abs_detM(data, Grid1D(-window, window, 241), Grid1D(min(times), max(times) + 1e-9, 11))
    return m
