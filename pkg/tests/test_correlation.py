import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mrfm_jumps.correlation import (
    CorrelationResult,
    SignSignal,
    autocorrelation,
    default_max_lag,
    fit_exponential,
    sign_signal,
)
from mrfm_jumps.dynamics import JumpTrace
from mrfm_jumps.errors import InsufficientDataError


def trace(times, duration, branch=1):
    times = np.asarray(times, dtype=float)
    return JumpTrace(times, np.zeros(len(times), int), branch, duration, 0)


def test_sign_signal_cases():
    assert np.all(sign_signal(trace([], 10.0), 0.5).values == 1)
    s = sign_signal(trace([5.0], 10.0), 0.5)
    assert np.all(s.values[:10] == 1) and np.all(s.values[10:] == -1)
    sq = sign_signal(trace(np.arange(1, 9) * math.pi, 8.5 * math.pi), math.pi / 2)
    period = np.array([1, 1, -1, -1])
    # sample k sits at k*pi/2; flips at multiples of pi count at the sample itself
    assert np.array_equal(sq.values[:16], np.tile(period, 4))


def test_c0_and_constant_signal():
    r = autocorrelation(SignSignal(1.0, np.ones(1000, np.int8)), 100)
    assert r.c_values[0] == 1.0
    assert np.all(r.c_values == 1.0)


def poisson_telegraph(rate, n, dt, seed):
    rng = np.random.default_rng(seed)
    duration = n * dt
    flips = np.cumsum(rng.exponential(1 / rate, int(rate * duration * 1.2) + 100))
    return sign_signal(trace(flips[flips < duration], duration - dt), dt)


def test_poisson_telegraph_oracle():
    lam, dt = 0.05, 0.5
    sig = poisson_telegraph(lam, 10**6, dt, 0)
    r = autocorrelation(sig, 60.0)
    expected = np.exp(-2 * lam * r.lags)
    assert np.max(np.abs(r.c_values - expected)) < 0.03
    fit = fit_exponential(r)
    assert fit.tau_c == pytest.approx(1 / (2 * lam), rel=0.05)


def test_fft_matches_direct():
    sig = poisson_telegraph(0.05, 10**4, 0.5, 3)
    a = autocorrelation(sig, 400.0, method="fft")
    b = autocorrelation(sig, 400.0, method="direct")
    np.testing.assert_allclose(a.c_values, b.c_values, rtol=1e-10, atol=0)


def test_fft_blocking_is_exact():
    from mrfm_jumps.correlation import _lag_sums_fft

    sig = poisson_telegraph(0.02, 50_000, 1.0, 4).values
    np.testing.assert_array_equal(_lag_sums_fft(sig, 300, block=1000), _lag_sums_fft(sig, 300, block=1 << 20))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.integers(20, 400))
def test_bounds_and_time_reversal(seed, n):
    rng = np.random.default_rng(seed)
    vals = rng.choice(np.array([-1, 1], np.int8), n)
    sig = SignSignal(1.0, vals)
    r = autocorrelation(sig, n - 1.5)
    assert r.c_values[0] == 1.0
    assert np.all(np.abs(r.c_values) <= 1.0)
    rev = autocorrelation(SignSignal(1.0, vals[::-1].copy()), n - 1.5)
    np.testing.assert_array_equal(r.c_values, rev.c_values)


def test_max_lag_must_be_shorter_than_signal():
    with pytest.raises(ValueError):
        autocorrelation(SignSignal(1.0, np.ones(10, np.int8)), 10.0)


def test_fit_exact_exponential():
    lags = np.arange(200) * 2.0
    r = CorrelationResult(lags, np.exp(-lags / 100.0), 0.0)
    fit = fit_exponential(r, threshold=0.05)
    assert fit.tau_c == pytest.approx(100.0, rel=1e-12)
    assert fit.fit_points == np.searchsorted(-np.exp(-lags / 100.0), -0.05)


def test_fit_needs_five_points():
    lags = np.arange(10.0)
    with pytest.raises(InsufficientDataError):
        fit_exponential(CorrelationResult(lags, np.exp(-lags), 0.0), threshold=0.05)


def test_default_max_lag():
    t = trace([10.0, 20.0, 30.0, 40.0], 1000.0)
    assert default_max_lag(t) == 80.0
    assert default_max_lag(trace([], 100.0)) == 25.0
