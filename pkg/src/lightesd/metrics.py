"""Detection scoring, generality, and the composite deployment score."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import WeightSumZero, ZeroMean

__all__ = [
    "EvalScores",
    "AdcsInput",
    "prf1",
    "generality",
    "adcomp_score",
    "normalize_latency",
]


@dataclass(frozen=True)
class EvalScores:
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int


def prf1(predicted, truth, window: int = 0) -> EvalScores:
    """Point-wise precision/recall/F1 on index sets.

    window > 0 relaxes matching to +/- window samples (overlap-style
    conventions); the default is exact index matching.
    """
    predicted = set(int(i) for i in predicted)
    truth = set(int(i) for i in truth)
    if window == 0:
        tp = len(predicted & truth)
        fp = len(predicted - truth)
        fn = len(truth - predicted)
    else:
        tp = sum(
            1 for p in predicted if any(abs(p - t) <= window for t in truth)
        )
        fp = len(predicted) - tp
        fn = sum(
            1 for t in truth if not any(abs(p - t) <= window for p in predicted)
        )
    if tp + fp > 0:
        precision = tp / (tp + fp)
    else:
        precision = 1.0 if fn == 0 else 0.0
    if tp + fn > 0:
        recall = tp / (tp + fn)
    else:
        recall = 1.0 if fp == 0 else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return EvalScores(precision, recall, f1, tp, fp, fn)


def generality(f1_per_dataset) -> tuple:
    """(mean, coefficient of variation) of F1 across datasets; the CV is
    population standard deviation over mean."""
    arr = np.asarray(list(f1_per_dataset), dtype=np.float64)
    if len(arr) == 0:
        raise ZeroMean("empty F1 list")
    mean = float(arr.mean())
    if mean <= 0.0:
        raise ZeroMean(f"mean F1 is {mean}; CV undefined")
    return mean, float(arr.std(ddof=0) / mean)


@dataclass(frozen=True)
class AdcsInput:
    """Inputs to the composite score; resource fractions are measured
    externally and supplied, not measured here."""

    f1: float
    cv: float
    latency_norm: float
    cpu_frac: float
    ram_frac: float
    power_frac: float
    weights: tuple = (1.0, 1.0, 1.0, 1.0, 1.0, 1.0)


def adcomp_score(inp: AdcsInput) -> float:
    """Weighted composite of F1 and the complements of CV, latency, CPU,
    RAM, and power, in [0, 1]. CV is clamped to [0, 1] before use."""
    w = inp.weights
    wsum = math.fsum(w)
    if wsum <= 0.0:
        raise WeightSumZero("weights must sum to a positive value")
    g = min(max(inp.cv, 0.0), 1.0)
    total = (
        w[0] * inp.f1
        + w[1] * (1.0 - g)
        + w[2] * (1.0 - inp.latency_norm)
        + w[3] * (1.0 - inp.cpu_frac)
        + w[4] * (1.0 - inp.ram_frac)
        + w[5] * (1.0 - inp.power_frac)
    )
    return total / wsum


def normalize_latency(cohort) -> list:
    """Min-max normalize a cohort of latencies; a degenerate cohort maps
    to all zeros (a lone model should not be penalized on latency)."""
    arr = np.asarray(list(cohort), dtype=np.float64)
    lo, hi = float(arr.min()), float(arr.max())
    if hi == lo:
        return [0.0] * len(arr)
    return [float(v) for v in (arr - lo) / (hi - lo)]
