"""Seasonality detection: Welch PSD estimate plus a permutation-calibrated
peak scan that returns the set of significant integer periods.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DetectorConfig, TimeSeries, WelchParams, Window
from .errors import SegmentTooLong

__all__ = [
    "Periodogram",
    "PeriodSet",
    "welch_psd",
    "permutation_threshold",
    "detect_periods",
]


@dataclass(frozen=True)
class Periodogram:
    """Frequency/PSD pairs, DC bin excluded, frequencies in (0, 0.5]."""

    frequencies: np.ndarray
    psd: np.ndarray


@dataclass(frozen=True)
class PeriodSet:
    """Detected integer periods, sorted descending by the PSD of the peak
    that produced them. Empty iff the series is nonseasonal."""

    periods: tuple
    is_seasonal: bool


def _window(kind: str, length: int) -> np.ndarray:
    t = (2.0 * np.arange(length) - (length - 1)) / (length - 1)
    if kind == Window.QUADRATIC:
        return 1.0 - t * t
    if kind == Window.TRIANGULAR:
        return 1.0 - np.abs(t)
    raise ValueError(f"unknown window {kind!r}")


def _welch_psd_values(values: np.ndarray, params: WelchParams) -> tuple:
    n = len(values)
    L = params.resolved_segment_length(n)
    if L > n:
        raise SegmentTooLong(f"segment_length {L} > series length {n}")
    D = int(math.floor(params.overlap_frac * L))
    step = L - D
    segs = np.lib.stride_tricks.sliding_window_view(values, L)[::step]
    segs = segs - segs.mean(axis=1, keepdims=True)
    w = _window(params.window, L)
    nfft = params.pad_factor * L
    spec = np.fft.rfft(segs * w, n=nfft, axis=1)
    psd = (np.abs(spec) ** 2).mean(axis=0) / np.sum(w * w)
    freqs = np.arange(1, nfft // 2 + 1) / nfft
    return freqs, psd[1:]


def welch_psd(series: TimeSeries, params: WelchParams = WelchParams()) -> Periodogram:
    """Averaged, windowed, overlapped periodogram of the series.

    Each segment is mean-removed before windowing so trend leakage does
    not dominate the low-frequency bins.
    """
    params.check()
    freqs, psd = _welch_psd_values(series.values, params)
    return Periodogram(frequencies=freqs, psd=psd)


def permutation_threshold(series: TimeSeries, config: DetectorConfig) -> float:
    """Significance threshold for PSD peaks.

    Shuffles the series n_permutations times (PRNG stream i derived from
    (seed, i)), records the maximum PSD of each shuffle, and returns the
    order statistic at rank ceil(psd_percentile * n_permutations) of the
    ascending-sorted maxima. Deterministic given the seed.
    """
    config.check()
    values = series.values
    maxima = np.empty(config.n_permutations)
    for i in range(1, config.n_permutations + 1):
        rng = np.random.default_rng(np.random.SeedSequence([config.seed, i]))
        shuffled = rng.permutation(values)
        _, psd = _welch_psd_values(shuffled, config.welch)
        maxima[i - 1] = psd.max()
    maxima.sort()
    rank = math.ceil(config.psd_percentile * config.n_permutations)
    rank = min(max(rank, 1), config.n_permutations)
    return float(maxima[rank - 1])


def detect_periods(series: TimeSeries, config: DetectorConfig) -> PeriodSet:
    """Scan the periodogram for significant peaks and derive integer periods.

    A bin j is a candidate iff its PSD exceeds the permutation threshold
    and both neighbors strictly. A candidate is accepted only if its PSD
    exceeds that of the last accepted candidate (unless accept_all_peaks),
    and the derived period floor(1/freq) lies in [2, min(n/2, L/2)]: a
    segment of length L holds fewer than two cycles of anything slower,
    and segment mean removal leaves a spurious spectral bump near 1/L.
    Duplicate integer periods keep the higher-PSD peak.
    """
    config.check()
    thresh = permutation_threshold(series, config)
    freqs, psd = _welch_psd_values(series.values, config.welch)
    n = len(series.values)
    max_period = min(n // 2, config.welch.resolved_segment_length(n) // 2)

    best_by_period: dict[int, float] = {}
    temp_psd = -np.inf
    for j in range(1, len(psd) - 1):
        p = psd[j]
        if not (p > thresh and p > psd[j - 1] and p > psd[j + 1]):
            continue
        if not config.accept_all_peaks and not p > temp_psd:
            continue
        temp_psd = max(temp_psd, p)
        period = int(math.floor(1.0 / freqs[j]))
        if 2 <= period <= max_period:
            if period not in best_by_period or p > best_by_period[period]:
                best_by_period[period] = float(p)

    ordered = sorted(best_by_period.items(), key=lambda kv: kv[1], reverse=True)
    periods = tuple(p for p, _ in ordered)
    return PeriodSet(periods=periods, is_seasonal=len(periods) > 0)
