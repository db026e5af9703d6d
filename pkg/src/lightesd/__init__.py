"""Weight-free, non-parametric anomaly detection for univariate time
series: spectral periodicity detection, robust decomposition, and a
robustified generalized ESD test."""

__version__ = "0.1.0"

from .core import (
    AnomalyReport,
    Decomposition,
    DetectorConfig,
    RobustTrendParams,
    StlParams,
    TimeSeries,
    WelchParams,
    validate,
)
from .decomposition import extract_residual, fast_robust_stl, robust_trend
from .esd import EsdResult, classic_esd, improved_esd, robust_scale_s, t_quantile
from .metrics import adcomp_score, generality, prf1
from .periodicity import PeriodSet, Periodogram, detect_periods, welch_psd
from .pipeline import detect, score_trace
from .synthdata import (
    InjectionSpec,
    LabeledSeries,
    gen_random_walk,
    gen_seasonal,
    inject_anomalies,
)

__all__ = [
    "AnomalyReport",
    "Decomposition",
    "DetectorConfig",
    "EsdResult",
    "InjectionSpec",
    "LabeledSeries",
    "PeriodSet",
    "Periodogram",
    "RobustTrendParams",
    "StlParams",
    "TimeSeries",
    "WelchParams",
    "adcomp_score",
    "classic_esd",
    "detect",
    "detect_periods",
    "extract_residual",
    "fast_robust_stl",
    "gen_random_walk",
    "gen_seasonal",
    "generality",
    "improved_esd",
    "inject_anomalies",
    "prf1",
    "robust_scale_s",
    "robust_trend",
    "score_trace",
    "t_quantile",
    "validate",
    "welch_psd",
]
