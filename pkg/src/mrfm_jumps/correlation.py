"""Autocorrelation of the cantilever frequency shift.

The shift is ``branch * domega``, so its normalized autocorrelation depends
only on the +/-1 branch process and is computed on that directly.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ._linfit import line_fit
from .errors import InsufficientDataError

DEFAULT_SAMPLE_SPACING = np.pi / 8
DEFAULT_THRESHOLD = 0.05


@dataclass
class SignSignal:
    sample_spacing: float
    values: np.ndarray  # int8, +/-1
    origin_time: float = 0.0

    @property
    def duration(self) -> float:
        return len(self.values) * self.sample_spacing


@dataclass
class CorrelationResult:
    lags: np.ndarray
    c_values: np.ndarray
    signal_mean: float
    tau_c: float = float("nan")
    fit_threshold: float = float("nan")
    fit_points: int = 0
    r_squared: float = float("nan")


def sign_signal(trace, sample_spacing: float = DEFAULT_SAMPLE_SPACING) -> SignSignal:
    """Sample the branch sign on ``t_i = i * sample_spacing`` over the run.

    A jump at time ``t_j`` already counts at ``t_i = t_j``.
    """
    if sample_spacing <= 0:
        raise ValueError("sample_spacing must be positive")
    n = int(np.floor(trace.total_duration / sample_spacing)) + 1
    grid = np.arange(n) * sample_spacing
    flips = np.searchsorted(np.asarray(trace.jump_times), grid, side="right")
    values = np.where(flips % 2 == 0, trace.initial_branch, -trace.initial_branch).astype(np.int8)
    return SignSignal(sample_spacing, values, 0.0)


def _lag_sums_direct(s: np.ndarray, n_lags: int) -> np.ndarray:
    s = s.astype(np.int64)
    n = len(s)
    return np.array([np.dot(s[: n - k], s[k:]) for k in range(n_lags + 1)], dtype=float)


def _lag_sums_fft(s: np.ndarray, n_lags: int, block: int = 1 << 18) -> np.ndarray:
    # blockwise so memory stays O(block + n_lags) for long runs
    n = len(s)
    out = np.zeros(n_lags + 1)
    for start in range(0, n, block):
        a = s[start : start + block].astype(float)
        b = s[start : start + block + n_lags].astype(float)
        m = 1 << int(np.ceil(np.log2(len(a) + n_lags + 1)))
        spec = np.conj(np.fft.rfft(a, m)) * np.fft.rfft(b, m)
        out += np.fft.irfft(spec, m)[: n_lags + 1]
    # products of +/-1 samples sum to integers
    return np.rint(out)


def autocorrelation(signal: SignSignal, max_lag: float, method: str = "fft") -> CorrelationResult:
    """Normalized autocorrelation ``C(lag)`` for lags ``0 .. max_lag``.

    The frequency shift is taken to have zero mean, so nothing is
    subtracted; ``C`` is the average of ``s(t) s(t + lag)`` over the
    ``N - k`` available pairs divided by the average of ``s^2 = 1``. The
    empirical mean is reported as ``signal_mean``.
    """
    s = np.asarray(signal.values)
    n = len(s)
    if max_lag < 0:
        raise ValueError("max_lag must be >= 0")
    if max_lag >= signal.duration:
        raise ValueError(f"max_lag {max_lag} must be shorter than the signal ({signal.duration})")
    n_lags = min(int(np.floor(max_lag / signal.sample_spacing)), n - 1)
    if method == "fft":
        sums = _lag_sums_fft(s, n_lags)
    elif method == "direct":
        sums = _lag_sums_direct(s, n_lags)
    else:
        raise ValueError(f"unknown method {method!r}")
    c = sums / (n - np.arange(n_lags + 1))
    c /= np.mean(s.astype(float) ** 2)
    lags = np.arange(n_lags + 1) * signal.sample_spacing
    return CorrelationResult(lags, c, float(np.mean(s)))


def fit_exponential(result: CorrelationResult, threshold: float = DEFAULT_THRESHOLD) -> CorrelationResult:
    """Fit ``C = exp(-lag / tau_c)`` on the leading run of lags with ``C > threshold``.

    The window stops at the first lag where C falls to the threshold, so
    noisy tail excursions above it are ignored.
    """
    below = np.flatnonzero(result.c_values <= threshold)
    stop = below[0] if below.size else len(result.c_values)
    if stop < 5:
        raise InsufficientDataError(f"only {stop} lags with C > {threshold}; need 5")
    slope, _, r2 = line_fit(result.lags[:stop], np.log(result.c_values[:stop]))
    if slope >= 0:
        raise InsufficientDataError("correlation does not decay within the lag window")
    return replace(result, tau_c=-1.0 / slope, fit_threshold=threshold, fit_points=int(stop), r_squared=r2)


def default_max_lag(trace, sample_spacing: float = DEFAULT_SAMPLE_SPACING) -> float:
    """Eight mean jump intervals, capped at a quarter of the run."""
    cap = 0.25 * trace.total_duration
    if len(trace.jump_times) >= 3:
        return min(8.0 * float(np.mean(np.diff(trace.jump_times))), cap)
    return cap
