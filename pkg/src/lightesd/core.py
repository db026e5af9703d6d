"""Shared domain types and input validation.

All numeric work is done in 64-bit floats: the robust scale statistic
involves nested medians of differences where 32-bit cancellation is
observable. Types are immutable value objects after construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .errors import (
    InvalidParam,
    NonFinite,
    NonMonotonicTimestamps,
    TooShort,
)

MIN_LENGTH = 16  # below this, Welch segmentation and the t dof degenerate

AUTO = "auto"  # sentinel for parameters derived from the data at call time


def _as_float_array(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        arr = arr.reshape(-1)
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class TimeSeries:
    """Ordered real-valued observations, the universal input.

    Timestamps are carried as metadata only; detection operates on the
    sample index.
    """

    values: np.ndarray
    timestamps: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(self, "values", _as_float_array(self.values))
        if self.timestamps is not None:
            object.__setattr__(self, "timestamps", tuple(self.timestamps))

    def __len__(self):
        return len(self.values)


def validate(series: TimeSeries) -> TimeSeries:
    """Check the TimeSeries invariants and return the series unchanged.

    Raises TooShort, NonFinite or NonMonotonicTimestamps. Idempotent.
    """
    n = len(series.values)
    if n < MIN_LENGTH:
        raise TooShort(n, MIN_LENGTH)
    finite = np.isfinite(series.values)
    if not finite.all():
        raise NonFinite(int(np.argmin(finite)))
    if series.timestamps is not None:
        ts = series.timestamps
        if len(ts) != n:
            raise NonMonotonicTimestamps(min(len(ts), n))
        for i in range(1, n):
            if not ts[i] > ts[i - 1]:
                raise NonMonotonicTimestamps(i)
    return series


class Window:
    """Welch window shapes over t in [-1, 1]."""

    QUADRATIC = "quadratic"  # 1 - t^2
    TRIANGULAR = "triangular"  # 1 - |t|


@dataclass(frozen=True)
class WelchParams:
    """Segmentation and windowing for Welch's PSD estimate.

    segment_length=None resolves to min(256, n // 2) at call time.
    pad_factor oversamples the DFT grid so that integer periods derived
    from peak frequencies resolve to within one sample.
    """

    segment_length: Optional[int] = None
    overlap_frac: float = 0.5
    window: str = Window.QUADRATIC
    pad_factor: int = 4

    def check(self):
        if self.segment_length is not None and self.segment_length < 2:
            raise InvalidParam("segment_length must be >= 2")
        if not 0.0 <= self.overlap_frac <= 0.5:
            raise InvalidParam("overlap_frac must be in [0, 0.5]")
        if self.window not in (Window.QUADRATIC, Window.TRIANGULAR):
            raise InvalidParam(f"unknown window {self.window!r}")
        if self.pad_factor < 1:
            raise InvalidParam("pad_factor must be >= 1")

    def resolved_segment_length(self, n: int) -> int:
        if self.segment_length is not None:
            return int(self.segment_length)
        return min(256, n // 2)


@dataclass(frozen=True)
class RobustTrendParams:
    """Penalties and solver knobs for the Huber + L1-difference trend fit."""

    lambda1: float = 1.0
    lambda2: float = 10.0
    huber_gamma: Union[float, str] = AUTO
    admm_rho: float = 1.0
    max_iters: int = 300
    tol_primal: float = 1e-6
    tol_dual: float = 1e-6

    def check(self):
        if self.lambda1 < 0 or self.lambda2 < 0:
            raise InvalidParam("lambda1/lambda2 must be nonnegative")
        if self.huber_gamma != AUTO and not self.huber_gamma > 0:
            raise InvalidParam("huber_gamma must be positive or AUTO")
        if self.admm_rho <= 0:
            raise InvalidParam("admm_rho must be positive")
        if self.max_iters < 1:
            raise InvalidParam("max_iters must be >= 1")
        if self.tol_primal <= 0 or self.tol_dual <= 0:
            raise InvalidParam("tolerances must be positive")


@dataclass(frozen=True)
class StlParams:
    """Stage parameters for the seasonal decomposition pipeline."""

    bilateral_half_width: int = 3
    bilateral_sigma_d: float = 2.0
    bilateral_sigma_i: Union[float, str] = AUTO
    neighbor_cycles: int = 2
    lad_lambda1: float = 1.0
    lad_lambda2: float = 10.0
    lad_max_iters: int = 300

    def check(self):
        if self.bilateral_half_width < 1:
            raise InvalidParam("bilateral_half_width must be >= 1")
        if self.bilateral_sigma_d <= 0:
            raise InvalidParam("bilateral_sigma_d must be positive")
        if self.bilateral_sigma_i != AUTO and not self.bilateral_sigma_i > 0:
            raise InvalidParam("bilateral_sigma_i must be positive or AUTO")
        if self.neighbor_cycles < 1:
            raise InvalidParam("neighbor_cycles must be >= 1")
        if self.lad_max_iters < 1:
            raise InvalidParam("lad_max_iters must be >= 1")


@dataclass(frozen=True)
class DetectorConfig:
    """Knobs for the full detection pipeline.

    The PRNG behind all seeded draws is NumPy's PCG64, recorded in the
    `rng` field so results are reproducible across platforms.
    """

    alpha: float = 0.05
    max_anomaly_frac: float = 0.10
    n_permutations: int = 100
    psd_percentile: float = 0.99
    seed: int = 0
    welch: WelchParams = field(default_factory=WelchParams)
    robust_trend: RobustTrendParams = field(default_factory=RobustTrendParams)
    stl: StlParams = field(default_factory=StlParams)
    accept_all_peaks: bool = False
    seasonal_on_denoised: bool = False
    rng: str = "pcg64"

    def check(self):
        if not 0.0 < self.alpha < 1.0:
            raise InvalidParam(f"alpha must be in (0,1), got {self.alpha}")
        if not 0.0 < self.max_anomaly_frac <= 0.5:
            raise InvalidParam("max_anomaly_frac must be in (0, 0.5]")
        if self.n_permutations < 20:
            raise InvalidParam("n_permutations must be >= 20")
        if not 0.5 < self.psd_percentile < 1.0:
            raise InvalidParam("psd_percentile must be in (0.5, 1)")
        if self.seed < 0:
            raise InvalidParam("seed must be a nonnegative integer")
        self.welch.check()
        self.robust_trend.check()
        self.stl.check()


@dataclass(frozen=True)
class Decomposition:
    """Trend + k seasonal components + residual.

    The residual is always formed by subtraction from the original values
    so the additive identity holds bit-for-bit.
    """

    trend: np.ndarray
    seasonals: tuple
    residual: np.ndarray
    periods: tuple
    diagnostics: Optional[dict] = None

    def __post_init__(self):
        object.__setattr__(self, "trend", _as_float_array(self.trend))
        object.__setattr__(
            self, "seasonals", tuple(_as_float_array(s) for s in self.seasonals)
        )
        object.__setattr__(self, "residual", _as_float_array(self.residual))
        object.__setattr__(self, "periods", tuple(int(p) for p in self.periods))

    def model(self) -> np.ndarray:
        """trend + sum of seasonals, summed left to right as during
        construction; values - model() equals the residual bit-for-bit."""
        model = self.trend.copy()
        for s in self.seasonals:
            model = model + s
        return model

    def reconstruct(self) -> np.ndarray:
        """trend + sum of seasonals + residual, in construction order."""
        return self.model() + self.residual


def make_decomposition(values, trend, seasonals, periods, diagnostics=None) -> Decomposition:
    """Build a Decomposition whose residual is defined by subtraction.

    The identity values == trend + seasonals + residual holds bit-for-bit
    in the defining (subtraction) form: residual is exactly
    values - (trend + s_1 + ... + s_k) with the model summed left to
    right. Re-adding the residual to the model reproduces the values to
    within one ulp (exactly, wherever the model does not dwarf the
    sample).
    """
    values = np.asarray(values, dtype=np.float64)
    model = np.asarray(trend, dtype=np.float64).copy()
    for s in seasonals:
        model = model + np.asarray(s, dtype=np.float64)
    residual = values - model
    return Decomposition(
        trend=trend,
        seasonals=tuple(seasonals),
        residual=residual,
        periods=tuple(periods),
        diagnostics=diagnostics,
    )


@dataclass(frozen=True)
class AnomalyReport:
    """Final detection output plus the configuration that produced it."""

    anomaly_indices: tuple
    scores: tuple
    periods_detected: tuple
    config_echo: DetectorConfig
    timing: float

    def __post_init__(self):
        object.__setattr__(
            self, "anomaly_indices", tuple(int(i) for i in self.anomaly_indices)
        )
        object.__setattr__(self, "scores", tuple(float(s) for s in self.scores))
        object.__setattr__(
            self, "periods_detected", tuple(int(p) for p in self.periods_detected)
        )
