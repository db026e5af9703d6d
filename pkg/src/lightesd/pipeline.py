"""End-to-end detection: periods -> decomposition -> robust ESD ->
boundary trim -> report."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .core import AnomalyReport, Decomposition, DetectorConfig, TimeSeries, validate
from .decomposition import extract_residual
from .errors import InvalidParam
from .esd import EsdResult, improved_esd
from .periodicity import PeriodSet, detect_periods

__all__ = ["detect", "score_trace", "DetectDiagnostics"]


def _boundary_trim(indices, scores, n):
    """Drop a flagged first/last sample whose neighbor is clean."""
    flagged = set(indices)
    kept = []
    for idx, score in zip(indices, scores):
        if idx == 0 and 1 not in flagged:
            continue
        if idx == n - 1 and n - 2 not in flagged:
            continue
        kept.append((idx, score))
    return kept


def _run(series: TimeSeries, config: DetectorConfig):
    validate(series)
    config.check()
    n = len(series.values)
    a_max = math.floor(config.max_anomaly_frac * n)
    if a_max < 1:
        raise InvalidParam(
            f"max_anomaly_frac*n = {config.max_anomaly_frac * n:.3f} floors to 0"
        )

    timings = {}
    t0 = time.perf_counter()
    periods = detect_periods(series, config)
    timings["periodicity"] = time.perf_counter() - t0

    t1 = time.perf_counter()
    decomposition = extract_residual(series, periods, config)
    timings["decomposition"] = time.perf_counter() - t1

    t2 = time.perf_counter()
    esd = improved_esd(decomposition.residual, config.alpha, a_max)
    timings["esd"] = time.perf_counter() - t2

    score_by_index = {
        rec.candidate_index: rec.r_value for rec in esd.stats
    }
    pairs = [(i, score_by_index[i]) for i in esd.outlier_indices]
    pairs = _boundary_trim([p[0] for p in pairs], [p[1] for p in pairs], n)
    pairs.sort()
    total = time.perf_counter() - t0
    report = AnomalyReport(
        anomaly_indices=tuple(p[0] for p in pairs),
        scores=tuple(p[1] for p in pairs),
        periods_detected=periods.periods,
        config_echo=config,
        timing=total,
    )
    return report, periods, decomposition, esd, timings


def detect(series: TimeSeries, config: DetectorConfig = DetectorConfig()) -> AnomalyReport:
    """Run the full pipeline and return the anomaly report.

    Deterministic given (values, config) including the seed. The number
    of reported anomalies is bounded by floor(max_anomaly_frac * n).
    """
    report, *_ = _run(series, config)
    return report


@dataclass(frozen=True)
class DetectDiagnostics:
    """Per-stage trace for debugging and benchmarking."""

    report: AnomalyReport
    period_set: PeriodSet
    esd_result: EsdResult
    component_variances: dict
    stage_timings: dict


def score_trace(series: TimeSeries, config: DetectorConfig = DetectorConfig()) -> DetectDiagnostics:
    """Like detect, but also returns the ESD trace, detected periods,
    decomposition component variances, and stage timings."""
    report, periods, decomposition, esd, timings = _run(series, config)
    variances = {
        "trend": float(np.var(decomposition.trend)),
        "residual": float(np.var(decomposition.residual)),
        "seasonals": [float(np.var(s)) for s in decomposition.seasonals],
    }
    return DetectDiagnostics(
        report=report,
        period_set=periods,
        esd_result=esd,
        component_variances=variances,
        stage_timings=timings,
    )
