"""Command-line front end: CSV in, JSON out.

Exit codes: 0 success, 2 input parse error, 3 invalid configuration,
1 internal error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import __version__
from .core import DetectorConfig, TimeSeries
from .errors import LightEsdError, ValidationError
from .metrics import AdcsInput, adcomp_score, generality, normalize_latency, prf1
from .pipeline import detect
from .synthdata import (
    RW_INJECTION,
    STD_INJECTION,
    InjectionSpec,
    gen_random_walk,
    gen_seasonal,
    inject_anomalies,
)

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_PARSE = 2
EXIT_CONFIG = 3


class ParseFailure(Exception):
    pass


def _default_seed() -> int:
    env = os.environ.get("LIGHTESD_SEED")
    return int(env) if env else 0


def _read_csv(path: str, value_column=None) -> TimeSeries:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ParseFailure(f"cannot read {path}: {exc}") from exc
    rows = [r for r in rows if r]
    if not rows:
        raise ParseFailure(f"{path}: empty file")

    header = rows[0]
    has_header = any(not _is_number(cell) for cell in header)
    col = None
    if value_column is not None:
        if has_header and value_column in header:
            col = header.index(value_column)
        elif str(value_column).isdigit():
            col = int(value_column)
        else:
            raise ParseFailure(f"{path}: no column named {value_column!r}")
    elif has_header:
        lowered = [c.strip().lower() for c in header]
        if "value" in lowered:
            col = lowered.index("value")
        else:
            raise ParseFailure(f"{path}: header has no 'value' column")
    else:
        col = len(header) - 1  # headerless: last column holds the values

    start = 1 if has_header else 0
    values = []
    for lineno, row in enumerate(rows[start:], start=start + 1):
        if col >= len(row):
            raise ParseFailure(f"{path}: line {lineno}: missing value column")
        cell = row[col].strip()
        try:
            values.append(float(cell))
        except ValueError:
            raise ParseFailure(
                f"{path}: line {lineno}: cannot parse value {cell!r}"
            ) from None
    return TimeSeries(values=values)


def _is_number(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def _write_output(payload: dict, out_path):
    text = json.dumps(payload, indent=2, sort_keys=True)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def cmd_detect(args) -> int:
    series = _read_csv(args.input, args.value_column)
    config = DetectorConfig(
        alpha=args.alpha,
        max_anomaly_frac=args.max_anomaly_frac,
        seed=args.seed,
    )
    config.check()
    report = detect(series, config)
    payload = {
        "schema": SCHEMA_VERSION,
        "version": __version__,
        "n": len(series.values),
        "anomaly_indices": list(report.anomaly_indices),
        "scores": list(report.scores),
        "periods": list(report.periods_detected),
        "seasonal": len(report.periods_detected) > 0,
        "alpha": config.alpha,
        "max_anomaly_frac": config.max_anomaly_frac,
        "seed": config.seed,
        "latency_seconds": report.timing,
    }
    if args.emit_plot_data:
        payload["plot_data"] = {
            "x": list(range(len(series.values))),
            "y": [float(v) for v in series.values],
        }
    _write_output(payload, args.out)
    return EXIT_OK


def _generate(preset: str, n: int, seed: int):
    if preset == "std":
        base = gen_seasonal(n, seed)
        spec = STD_INJECTION
    elif preset == "rw":
        base = gen_random_walk(n, seed)
        spec = RW_INJECTION
    else:
        raise ValidationError(f"unknown preset {preset!r}")
    labeled = inject_anomalies(
        base,
        InjectionSpec(
            n_spikes=spec.n_spikes,
            n_dips=spec.n_dips,
            n_collective=spec.n_collective,
            seed=seed,
        ),
    )
    return labeled


def cmd_gen(args) -> int:
    labeled = _generate(args.preset, args.n, args.seed)
    out = args.out or f"{args.preset}.csv"
    with open(out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["timestamp", "value"])
        for i, v in enumerate(labeled.series.values):
            writer.writerow([i, repr(float(v))])
    truth_path = os.path.splitext(out)[0] + ".truth.json"
    with open(truth_path, "w", encoding="utf-8") as fh:
        json.dump(
            {
                "schema": SCHEMA_VERSION,
                "preset": args.preset,
                "seed": args.seed,
                "indices": list(labeled.truth_indices),
            },
            fh,
            indent=2,
            sort_keys=True,
        )
        fh.write("\n")
    return EXIT_OK


def run_bench(seeds: int, n: int = 5000, cpu_frac=0.0, ram_frac=0.0, power_frac=0.0):
    """Run both presets at both confidence levels across seeds; returns
    the full row/aggregate report structure."""
    if seeds < 1:
        raise ValidationError("--seeds must be >= 1")
    rows = []
    for dataset in ("std", "rw"):
        for alpha in (0.05, 0.001):
            for seed in range(seeds):
                labeled = _generate(dataset, n, seed)
                config = DetectorConfig(alpha=alpha, seed=seed)
                report = detect(labeled.series, config)
                scores = prf1(report.anomaly_indices, labeled.truth_indices)
                rows.append(
                    {
                        "dataset": dataset,
                        "alpha": alpha,
                        "seed": seed,
                        "precision": scores.precision,
                        "recall": scores.recall,
                        "f1": scores.f1,
                        "latency_seconds": report.timing,
                        "n_detected": len(report.anomaly_indices),
                        "n_truth": len(labeled.truth_indices),
                    }
                )

    aggregates = []
    mean_latency = {}
    mean_f1 = {}
    for dataset in ("std", "rw"):
        for alpha in (0.05, 0.001):
            sel = [r for r in rows if r["dataset"] == dataset and r["alpha"] == alpha]
            agg = {
                "dataset": dataset,
                "alpha": alpha,
                "precision": float(np.mean([r["precision"] for r in sel])),
                "recall": float(np.mean([r["recall"] for r in sel])),
                "f1": float(np.mean([r["f1"] for r in sel])),
                "latency_seconds": float(np.mean([r["latency_seconds"] for r in sel])),
            }
            aggregates.append(agg)
            mean_f1[(dataset, alpha)] = agg["f1"]
            mean_latency.setdefault(alpha, []).append(agg["latency_seconds"])

    variants = []
    latencies = [float(np.mean(mean_latency[a])) for a in (0.05, 0.001)]
    lat_norm = normalize_latency(latencies)
    for i, alpha in enumerate((0.05, 0.001)):
        f1s = [mean_f1[(d, alpha)] for d in ("std", "rw")]
        mean, cv = generality(f1s)
        adcs = adcomp_score(
            AdcsInput(
                f1=mean,
                cv=cv,
                latency_norm=lat_norm[i],
                cpu_frac=cpu_frac,
                ram_frac=ram_frac,
                power_frac=power_frac,
            )
        )
        variants.append(
            {
                "alpha": alpha,
                "f1_mean": mean,
                "f1_cv": cv,
                "latency_norm": lat_norm[i],
                "adcomp_score": adcs,
            }
        )
    return {
        "schema": SCHEMA_VERSION,
        "version": __version__,
        "n": n,
        "seeds": seeds,
        "rows": rows,
        "aggregates": aggregates,
        "variants": variants,
    }


def cmd_bench(args) -> int:
    if args.cpu_frac == 0.0 and args.ram_frac == 0.0 and args.power_frac == 0.0:
        print(
            "warning: resource fractions not supplied; CPU/RAM/power terms "
            "default to 0 in the composite score",
            file=sys.stderr,
        )
    payload = run_bench(
        seeds=args.seeds,
        n=args.n,
        cpu_frac=args.cpu_frac,
        ram_frac=args.ram_frac,
        power_frac=args.power_frac,
    )
    _write_output(payload, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lightesd",
        description="Weight-free anomaly detection for univariate time series",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_detect = sub.add_parser("detect", help="detect anomalies in a CSV file")
    p_detect.add_argument("--input", required=True)
    p_detect.add_argument("--value-column", default=None)
    p_detect.add_argument("--alpha", type=float, default=0.05)
    p_detect.add_argument("--max-anomaly-frac", type=float, default=0.10)
    p_detect.add_argument("--seed", type=int, default=_default_seed())
    p_detect.add_argument("--out", default=None)
    p_detect.add_argument("--emit-plot-data", action="store_true")
    p_detect.set_defaults(func=cmd_detect)

    p_gen = sub.add_parser("gen", help="generate a synthetic benchmark CSV")
    p_gen.add_argument("--preset", required=True, choices=["std", "rw"])
    p_gen.add_argument("--n", type=int, default=5000)
    p_gen.add_argument("--seed", type=int, default=_default_seed())
    p_gen.add_argument("--out", default=None)
    p_gen.set_defaults(func=cmd_gen)

    p_bench = sub.add_parser("bench", help="run the synthetic benchmark")
    p_bench.add_argument("--seeds", type=int, required=True)
    p_bench.add_argument("--n", type=int, default=5000)
    p_bench.add_argument("--cpu-frac", type=float, default=0.0)
    p_bench.add_argument("--ram-frac", type=float, default=0.0)
    p_bench.add_argument("--power-frac", type=float, default=0.0)
    p_bench.add_argument("--out", default=None)
    p_bench.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ValidationError, LightEsdError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # pragma: no cover
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def entry():  # console_scripts hook
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
