"""Acceptance gate: one test per shipping criterion.

Each test prints a single PASS/FAIL line so the verdicts are easy to
scrape from the log (run with -s or read captured output on failure).
"""

import itertools
import math

import numpy as np
import pytest

from lightesd.cli import run_bench
from lightesd.core import DetectorConfig, RobustTrendParams, TimeSeries
from lightesd.decomposition import fast_robust_stl, robust_trend
from lightesd.esd import classic_esd, improved_esd, t_quantile
from lightesd.metrics import AdcsInput, adcomp_score, generality
from lightesd.periodicity import PeriodSet, detect_periods

from oracles import (
    classic_esd_bruteforce,
    improved_esd_bruteforce,
    t_quantile_quadrature,
)


def _verdict(num: int, desc: str, ok: bool, detail: str = ""):
    line = f"ACCEPTANCE {num:02d} {desc}: {'PASS' if ok else 'FAIL'}"
    if detail:
        line += f"  ({detail})"
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def bench():
    return run_bench(seeds=10, n=5000)


def _agg(bench, dataset, alpha, field):
    for row in bench["aggregates"]:
        if row["dataset"] == dataset and row["alpha"] == alpha:
            return row[field]
    raise KeyError((dataset, alpha))


def test_criterion_01_seasonal_f1_and_runtime(bench):
    f1 = _agg(bench, "std", 0.001, "f1")
    worst = max(r["latency_seconds"] for r in bench["rows"])
    _verdict(
        1,
        "seasonal benchmark F1 >= 0.70 and <= 10s per 5000-point run",
        f1 >= 0.70 and worst <= 10.0,
        f"f1={f1:.3f} max_latency={worst:.2f}s",
    )


def test_criterion_02_random_walk_f1(bench):
    f1 = _agg(bench, "rw", 0.001, "f1")
    _verdict(2, "random-walk benchmark F1 >= 0.80", f1 >= 0.80, f"f1={f1:.3f}")


def test_criterion_03_precision_ordering(bench):
    ok = all(
        _agg(bench, d, 0.001, "precision") >= _agg(bench, d, 0.05, "precision")
        for d in ("std", "rw")
    )
    detail = ", ".join(
        f"{d}: {_agg(bench, d, 0.001, 'precision'):.3f} vs "
        f"{_agg(bench, d, 0.05, 'precision'):.3f}"
        for d in ("std", "rw")
    )
    _verdict(3, "precision at alpha 0.001 >= alpha 0.05 on both presets", ok, detail)


def test_criterion_04_period_detection_rates():
    n = 5000
    t = np.arange(n, dtype=float)
    hits = 0
    for seed in range(100):
        y = 10.0 * np.sin(2 * np.pi * t / 30) + np.random.default_rng(
            seed
        ).standard_normal(n)
        ps = detect_periods(TimeSeries(values=y), DetectorConfig(seed=seed))
        if ps.is_seasonal and any(p in (29, 30, 31) for p in ps.periods):
            hits += 1
    quiet = 0
    for seed in range(100):
        y = np.random.default_rng(10_000 + seed).standard_normal(2048)
        if not detect_periods(TimeSeries(values=y), DetectorConfig(seed=seed)).is_seasonal:
            quiet += 1
    _verdict(
        4,
        "period 30 recovered in >= 95/100 seeds, noise nonseasonal in >= 90/100",
        hits >= 95 and quiet >= 90,
        f"seasonal_hits={hits}/100 nonseasonal={quiet}/100",
    )


def _traces_match(res, oracle_out, oracle_trace) -> bool:
    if res.outlier_indices != oracle_out:
        return False
    if len(res.stats) != len(oracle_trace):
        return False
    for rec, (l, ci, rv, lam, rej) in zip(res.stats, oracle_trace):
        if rec.l != l or rec.candidate_index != ci or rec.rejected != rej:
            return False
        if math.isfinite(rv) or math.isfinite(rec.r_value):
            if abs(rec.r_value - rv) > 1e-9 * max(1.0, abs(rv)):
                return False
        if abs(rec.lambda_value - lam) > 1e-9 * max(1.0, abs(lam)):
            return False
    return True


def test_criterion_05_esd_oracle_equivalence():
    values = (-3.0, -1.0, 0.0, 1.0, 3.0, 10.0)
    mismatches = 0
    cases = 0
    for n in (4, 5, 6):
        a_max = n - 3
        for combo in itertools.product(values, repeat=n):
            x = np.asarray(combo)
            cases += 1
            if not _traces_match(
                improved_esd(x, 0.05, a_max),
                *improved_esd_bruteforce(x, 0.05, a_max),
            ):
                mismatches += 1
            if not _traces_match(
                classic_esd(x, 0.05, a_max),
                *classic_esd_bruteforce(x, 0.05, a_max),
            ):
                mismatches += 1
    rng = np.random.default_rng(123)
    for _ in range(10_000):
        n = int(rng.integers(7, 13))
        x = rng.choice(values, size=n) + rng.standard_normal(n)
        a_max = n - 3
        cases += 1
        if not _traces_match(
            improved_esd(x, 0.05, a_max), *improved_esd_bruteforce(x, 0.05, a_max)
        ):
            mismatches += 1
        if not _traces_match(
            classic_esd(x, 0.05, a_max), *classic_esd_bruteforce(x, 0.05, a_max)
        ):
            mismatches += 1
    _verdict(
        5,
        "iteration-for-iteration oracle equivalence, zero mismatches",
        mismatches == 0,
        f"cases={cases} mismatches={mismatches}",
    )


def test_criterion_06_breakdown_contrast():
    rng = np.random.default_rng(6)
    x = np.concatenate([np.full(49, 1e9), rng.standard_normal(51)])
    x = rng.permutation(x)
    extreme = set(np.flatnonzero(x == 1e9))
    a_max = 50
    robust_found = set(improved_esd(x, 0.05, a_max).outlier_indices)
    classic_found = set(classic_esd(x, 0.05, a_max).outlier_indices)
    ok = extreme <= robust_found and len(classic_found & extreme) < len(extreme)
    _verdict(
        6,
        "robust variant flags all 49 extremes, classic flags strictly fewer",
        ok,
        f"robust={len(robust_found & extreme)}/49 classic={len(classic_found & extreme)}/49",
    )


def test_criterion_07_affine_invariance():
    rng = np.random.default_rng(7)
    failures = 0
    for _ in range(1000):
        n = int(rng.integers(20, 60))
        x = rng.standard_normal(n)
        k = int(rng.integers(0, max(1, n // 10) + 1))
        if k:
            pos = rng.choice(n, size=k, replace=False)
            x[pos] += rng.choice([-1.0, 1.0], size=k) * rng.uniform(6, 20, size=k)
        a = rng.uniform(0.01, 100.0)
        b = rng.uniform(-1e6, 1e6)
        a_max = max(1, n // 5)
        base = improved_esd(x, 0.05, a_max)
        scaled = improved_esd(a * x + b, 0.05, a_max)
        if base.outlier_indices != scaled.outlier_indices:
            failures += 1
            continue
        if any(
            r1.candidate_index != r2.candidate_index or r1.rejected != r2.rejected
            for r1, r2 in zip(base.stats, scaled.stats)
        ):
            failures += 1
    _verdict(7, "affine invariance over 1000 randomized cases", failures == 0,
             f"failures={failures}")


def test_criterion_08_t_quantile_accuracy():
    worst = 0.0
    for p in (0.9, 0.95, 0.975, 0.995, 0.999):
        for df in (1, 2, 5, 10, 30, 100, 1000):
            err = abs(t_quantile(p, df) - t_quantile_quadrature(p, df))
            worst = max(worst, err)
    _verdict(8, "t quantile within 1e-6 of integration oracle", worst <= 1e-6,
             f"max_abs_err={worst:.2e}")


def test_criterion_09_decomposition_identity_and_admm_descent():
    rng = np.random.default_rng(9)
    identity_ok = True
    descent_ok = True
    for case in range(100):
        n = int(rng.integers(64, 400))
        t = np.arange(n, dtype=float)
        y = (
            rng.uniform(-0.5, 0.5) * t
            + rng.uniform(0, 5) * np.sin(2 * np.pi * t / rng.integers(8, 40))
            + rng.standard_normal(n)
        )
        spikes = rng.choice(n, size=3, replace=False)
        y[spikes] += rng.uniform(-30, 30, size=3)
        series = TimeSeries(values=y)
        dec = robust_trend(series, RobustTrendParams())
        if not np.array_equal(series.values - dec.model(), dec.residual):
            identity_ok = False
        accepted = dec.diagnostics["accepted_objectives"]
        if any(b > a + 1e-9 * max(1.0, abs(a)) for a, b in zip(accepted, accepted[1:])):
            descent_ok = False
        if case < 20:
            period = int(rng.integers(8, 40))
            stl = fast_robust_stl(
                series, PeriodSet(is_seasonal=True, periods=(period,))
            )
            if not np.array_equal(series.values - stl.model(), stl.residual):
                identity_ok = False
    _verdict(
        9,
        "additive identity bit-for-bit and ADMM objective non-increasing",
        identity_ok and descent_ok,
        f"identity={identity_ok} descent={descent_ok}",
    )


def test_criterion_10_generality_table():
    m1, cv1 = generality([0.79, 0.81, 0.80, 0.84])
    m2, cv2 = generality([0.83, 0.96, 0.84, 0.86])
    ok = (
        abs(m1 - 0.81) <= 0.01
        and abs(cv1 - 0.02) <= 0.01
        and abs(m2 - 0.87) <= 0.01
        and abs(cv2 - 0.06) <= 0.01
    )
    _verdict(10, "generality mean/CV match reference rows", ok,
             f"row1=({m1:.3f},{cv1:.3f}) row2=({m2:.3f},{cv2:.3f})")


def test_criterion_11_composite_score_properties():
    rng = np.random.default_rng(11)
    ok = True
    for _ in range(1000):
        inp = dict(
            f1=rng.uniform(),
            cv=rng.uniform(0, 2),
            latency_norm=rng.uniform(),
            cpu_frac=rng.uniform(),
            ram_frac=rng.uniform(),
            power_frac=rng.uniform(),
        )
        s = adcomp_score(AdcsInput(**inp))
        if not (0.0 <= s <= 1.0):
            ok = False
            break
        better = dict(inp, f1=min(1.0, inp["f1"] + rng.uniform(0, 0.2)))
        if adcomp_score(AdcsInput(**better)) < s - 1e-12:
            ok = False
            break
        worse = dict(inp, cpu_frac=min(1.0, inp["cpu_frac"] + rng.uniform(0, 0.2)))
        if adcomp_score(AdcsInput(**worse)) > s + 1e-12:
            ok = False
            break
        w = tuple(rng.uniform(0.1, 4, 6))
        k = rng.uniform(0.2, 9)
        a = adcomp_score(AdcsInput(**inp, weights=w))
        b = adcomp_score(AdcsInput(**inp, weights=tuple(k * wi for wi in w)))
        if abs(a - b) > 1e-12:
            ok = False
            break
    example = adcomp_score(
        AdcsInput(
            f1=0.87, cv=0.06, latency_norm=0.0,
            cpu_frac=0.0547, ram_frac=0.0329, power_frac=0.143,
        )
    )
    target = (0.87 + 0.94 + 1 + 0.9453 + 0.9671 + 0.857) / 6
    ok = ok and abs(example - target) <= 1e-9 and abs(example - 0.930) <= 0.002
    _verdict(11, "composite score bounds, monotonicity, scaling, worked example",
             ok, f"example={example:.4f}")
