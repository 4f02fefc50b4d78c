"""Self-checks for the independent oracles used across the suite."""

import math

import numpy as np
import pytest

from jrcsar.oracles import (
    aperiodic_correlation,
    finite_difference,
    monte_carlo_ber,
    periodic_correlation,
    qfunction,
)


def test_periodic_correlation_matches_hand_computation():
    a = np.array([1, -1, 1, 1], dtype=float)
    b = np.array([1, 1, -1, 1], dtype=float)
    got = periodic_correlation(a, b)
    expected = [sum(a[i] * b[(i + lag) % 4] for i in range(4)) for lag in range(4)]
    np.testing.assert_allclose(got, expected)


def test_periodic_correlation_zero_lag_is_energy():
    rng = np.random.default_rng(3)
    a = rng.normal(size=16) + 1j * rng.normal(size=16)
    got = periodic_correlation(a, a)
    assert got[0] == pytest.approx(np.sum(np.abs(a) ** 2))


def test_aperiodic_correlation_matches_numpy_correlate():
    rng = np.random.default_rng(5)
    a = rng.normal(size=12)
    b = rng.normal(size=7)
    got = aperiodic_correlation(a, b)
    expected = np.correlate(a, b, mode="full")
    np.testing.assert_allclose(got, expected, atol=1e-12)


def test_finite_difference_on_polynomial():
    fn = lambda t: 3.0 * t**2 - 2.0 * t + 1.0  # noqa: E731
    # central difference is exact for quadratics up to rounding
    assert finite_difference(fn, 1.5, 1e-4) == pytest.approx(3.0 * 2 * 1.5 - 2.0, abs=1e-6)


def test_finite_difference_rejects_bad_step():
    with pytest.raises(ValueError):
        finite_difference(math.sin, 0.0, 0.0)


def test_qfunction_reference_values():
    # Q(0) = 1/2 and the classic Q(1.96) ~ 0.025 two-sided point
    assert qfunction(0.0) == pytest.approx(0.5)
    assert qfunction(1.959963985) == pytest.approx(0.025, rel=1e-6)
    assert qfunction(-1e9) == pytest.approx(1.0)


def test_monte_carlo_ber_rate_and_sigma():
    rate, sigma = monte_carlo_ber(lambda n: n // 100, 200000)
    assert rate == pytest.approx(0.01)
    assert sigma == pytest.approx(math.sqrt(0.01 * 0.99 / 200000))
    with pytest.raises(ValueError):
        monte_carlo_ber(lambda n: 0, 10)
