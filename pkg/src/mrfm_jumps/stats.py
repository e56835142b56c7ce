"""Jump-interval histograms, the exponential peak envelope and moments."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._linfit import line_fit
from .errors import InsufficientDataError

DEFAULT_FINE_WIDTH = np.pi / 50


def _intervals(data) -> np.ndarray:
    if hasattr(data, "jump_times"):
        return np.diff(np.asarray(data.jump_times, dtype=float))
    return np.asarray(data, dtype=float)


@dataclass
class IntervalHistogram:
    bin_width: float
    bin_centers: np.ndarray
    counts: np.ndarray
    total_intervals: int
    peak_aggregated: bool

    @property
    def probabilities(self) -> np.ndarray:
        return self.counts / self.total_intervals

    def __add__(self, other: "IntervalHistogram") -> "IntervalHistogram":
        if (self.bin_width, self.peak_aggregated) != (other.bin_width, other.peak_aggregated):
            raise ValueError("histograms use different binning")
        n = max(len(self.counts), len(other.counts))
        counts = np.zeros(n, dtype=np.int64)
        counts[: len(self.counts)] += self.counts
        counts[: len(other.counts)] += other.counts
        return IntervalHistogram(self.bin_width, _centers(n, self.bin_width, self.peak_aggregated),
                                 counts, self.total_intervals + other.total_intervals,
                                 self.peak_aggregated)


@dataclass
class HistogramFit:
    tau_d: float
    intercept: float
    fit_range: np.ndarray
    r_squared: float


def _centers(n, width, peak):
    idx = np.arange(n)
    return idx * width if peak else (idx + 0.5) * width


def build_histogram(data, mode: str = "peak", bin_width: float | None = None) -> IntervalHistogram:
    """Histogram of consecutive-jump intervals.

    ``mode="peak"`` puts interval ``t`` in bin ``n = round(t / pi)``, i.e.
    ``[n*pi - pi/2, n*pi + pi/2)``; bin 0 is the half bin ``[0, pi/2)``
    holding double jumps within one crossing. ``mode="fine"`` uses uniform
    bins of ``bin_width`` (default pi/50) starting at zero.
    """
    if hasattr(data, "jump_times") and len(data.jump_times) < 2:
        raise InsufficientDataError("need at least 2 jumps to form an interval")
    iv = _intervals(data)
    if iv.size == 0:
        raise InsufficientDataError("no intervals")
    if mode == "peak":
        width = np.pi
        idx = np.floor(iv / np.pi + 0.5).astype(np.int64)
    elif mode == "fine":
        width = DEFAULT_FINE_WIDTH if bin_width is None else float(bin_width)
        if width <= 0:
            raise ValueError("bin_width must be positive")
        idx = np.floor(iv / width).astype(np.int64)
    else:
        raise ValueError(f"unknown histogram mode {mode!r}")
    counts = np.bincount(idx)
    return IntervalHistogram(width, _centers(len(counts), width, mode == "peak"),
                             counts, int(iv.size), mode == "peak")


def fit_peak_envelope(hist: IntervalHistogram, min_count: int = 50, weighted: bool = False) -> HistogramFit:
    """Fit ``ln P(tau_n) = intercept - tau_n / tau_d`` over peaks ``n >= 1``.

    Only peaks with at least ``min_count`` entries enter the fit. With
    ``weighted=True`` each log-count is weighted by its count, the inverse
    of its Poisson variance.
    """
    if not hist.peak_aggregated:
        raise ValueError("envelope fit needs a peak-aggregated histogram")
    n = np.arange(len(hist.counts))
    use = (n >= 1) & (hist.counts >= min_count)
    if use.sum() < 3:
        raise InsufficientDataError(f"only {int(use.sum())} peaks with >= {min_count} counts; need 3")
    x = hist.bin_centers[use]
    y = np.log(hist.probabilities[use])
    slope, intercept, r2 = line_fit(x, y, hist.counts[use] if weighted else None)
    if slope >= 0:
        raise InsufficientDataError("peak envelope does not decay")
    return HistogramFit(-1.0 / slope, intercept, n[use], r2)


def interval_moments(data) -> tuple[float, float]:
    """Mean and population standard deviation of consecutive-jump gaps."""
    iv = _intervals(data)
    if iv.size < 2:
        raise InsufficientDataError(f"need at least 2 intervals, got {iv.size}")
    return float(iv.mean()), float(iv.std())


def peak_concentration(data, window: float = 0.2) -> float:
    """Fraction of intervals within ``window`` of an integer multiple of pi."""
    iv = _intervals(data)
    if iv.size == 0:
        raise InsufficientDataError("no intervals")
    off = np.abs(iv - np.pi * np.round(iv / np.pi))
    return float(np.mean(off <= window))
