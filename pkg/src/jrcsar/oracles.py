"""Independent brute-force and analytic oracles for the test suite.

These deliberately avoid the fast production code paths (no FFTs, no shared
kernels beyond elementary arithmetic) so they can serve as independent checks.
They run at reduced scale (N <= 4096) and carry no performance expectations.
"""

from __future__ import annotations

import math

import numpy as np


def periodic_correlation(a, b) -> np.ndarray:
    """Periodic cross-correlation by direct summation: c[l] = sum_n a[n] * conj(b[(n+l) mod N])."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.size == 0 or b.size == 0 or a.size != b.size:
        raise ValueError("sequences must be nonempty and equal length")
    n = a.size
    out = np.empty(n, dtype=complex)
    for lag in range(n):
        acc = 0.0 + 0.0j
        for i in range(n):
            acc += a[i] * np.conj(b[(i + lag) % n])
        out[lag] = acc
    return out


def aperiodic_correlation(a, b) -> np.ndarray:
    """Full aperiodic cross-correlation by direct summation (lags -(Nb-1)..(Na-1))."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.size == 0 or b.size == 0:
        raise ValueError("sequences must be nonempty")
    na, nb = a.size, b.size
    lags = range(-(nb - 1), na)
    out = np.empty(na + nb - 1, dtype=complex)
    for k, lag in enumerate(lags):
        acc = 0.0 + 0.0j
        for i in range(nb):
            j = i + lag
            if 0 <= j < na:
                acc += a[j] * np.conj(b[i])
        out[k] = acc
    return out


def finite_difference(fn, t: float, h: float) -> float:
    """Central finite-difference derivative estimate of fn at t."""
    if h <= 0:
        raise ValueError("h must be > 0")
    return (fn(t + h) - fn(t - h)) / (2.0 * h)


def qfunction(x: float) -> float:
    """Standard-normal tail probability via the complementary error function."""
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def monte_carlo_ber(runner, n_bits: int) -> tuple[float, float]:
    """Run a bit-error trial and return (rate, one-sigma binomial standard error).

    runner(n_bits) must return the number of bit errors observed over n_bits.
    """
    if n_bits < 1e5:
        raise ValueError("n_bits must be >= 1e5 for a meaningful estimate")
    errors = runner(n_bits)
    p = errors / n_bits
    sigma = math.sqrt(max(p * (1.0 - p), 1.0 / n_bits) / n_bits)
    return p, sigma
