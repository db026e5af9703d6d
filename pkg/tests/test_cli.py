"""Command-line interface: exit codes, JSON schema, determinism."""

import json

import pytest

from lightesd.cli import EXIT_CONFIG, EXIT_OK, EXIT_PARSE, main, run_bench


def _write_series_csv(path, n=600, bad_line=None):
    lines = ["timestamp,value"]
    for i in range(n):
        v = "abc" if bad_line is not None and i + 2 == bad_line else f"{(i % 7) + 0.5}"
        lines.append(f"{i},{v}")
    path.write_text("\n".join(lines) + "\n")


class TestDetect:
    def test_happy_path_json(self, tmp_path, capsys):
        csv_path = tmp_path / "series.csv"
        _write_series_csv(csv_path)
        code = main(["detect", "--input", str(csv_path), "--seed", "1"])
        assert code == EXIT_OK
        payload = json.loads(capsys.readouterr().out)
        assert payload["schema"] == 1
        assert payload["n"] == 600
        assert isinstance(payload["anomaly_indices"], list)
        assert len(payload["scores"]) == len(payload["anomaly_indices"])
        assert payload["latency_seconds"] >= 0

    def test_out_file(self, tmp_path):
        csv_path = tmp_path / "series.csv"
        _write_series_csv(csv_path)
        out = tmp_path / "report.json"
        assert main(["detect", "--input", str(csv_path), "--out", str(out)]) == EXIT_OK
        payload = json.loads(out.read_text())
        assert payload["alpha"] == 0.05

    def test_parse_error_reports_line(self, tmp_path, capsys):
        csv_path = tmp_path / "bad.csv"
        _write_series_csv(csv_path, bad_line=17)
        code = main(["detect", "--input", str(csv_path)])
        assert code == EXIT_PARSE
        assert "line 17" in capsys.readouterr().err

    def test_missing_file(self, tmp_path, capsys):
        code = main(["detect", "--input", str(tmp_path / "nope.csv")])
        assert code == EXIT_PARSE

    def test_bad_alpha_is_config_error(self, tmp_path, capsys):
        csv_path = tmp_path / "series.csv"
        _write_series_csv(csv_path)
        assert main(["detect", "--input", str(csv_path), "--alpha", "1.5"]) == EXIT_CONFIG

    def test_value_column_by_name(self, tmp_path, capsys):
        csv_path = tmp_path / "multi.csv"
        lines = ["timestamp,other,reading"]
        for i in range(200):
            lines.append(f"{i},999,{(i % 5) + 0.25}")
        csv_path.write_text("\n".join(lines) + "\n")
        code = main(
            ["detect", "--input", str(csv_path), "--value-column", "reading"]
        )
        assert code == EXIT_OK
        payload = json.loads(capsys.readouterr().out)
        assert payload["n"] == 200

    def test_unknown_value_column(self, tmp_path, capsys):
        csv_path = tmp_path / "series.csv"
        _write_series_csv(csv_path)
        code = main(["detect", "--input", str(csv_path), "--value-column", "nope"])
        assert code == EXIT_PARSE

    def test_emit_plot_data(self, tmp_path, capsys):
        csv_path = tmp_path / "series.csv"
        _write_series_csv(csv_path, n=100)
        code = main(["detect", "--input", str(csv_path), "--emit-plot-data"])
        assert code == EXIT_OK
        payload = json.loads(capsys.readouterr().out)
        assert payload["plot_data"]["x"] == list(range(100))
        assert len(payload["plot_data"]["y"]) == 100

    def test_env_seed_default(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("LIGHTESD_SEED", "77")
        # the parser reads the env var when built, so rebuild via main
        csv_path = tmp_path / "series.csv"
        _write_series_csv(csv_path, n=100)
        assert main(["detect", "--input", str(csv_path)]) == EXIT_OK
        payload = json.loads(capsys.readouterr().out)
        assert payload["seed"] == 77


class TestGen:
    def test_writes_csv_and_truth_sidecar(self, tmp_path):
        out = tmp_path / "data.csv"
        code = main(["gen", "--preset", "std", "--n", "500", "--seed", "3",
                     "--out", str(out)])
        assert code == EXIT_OK
        header = out.read_text().splitlines()
        assert header[0] == "timestamp,value"
        assert len(header) == 501
        truth = json.loads((tmp_path / "data.truth.json").read_text())
        assert truth["preset"] == "std"
        assert truth["seed"] == 3
        assert truth["indices"] == sorted(set(truth["indices"]))
        assert len(truth["indices"]) > 0

    def test_deterministic_bytes(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for out in (a, b):
            assert main(["gen", "--preset", "rw", "--n", "400", "--seed", "9",
                         "--out", str(out)]) == EXIT_OK
        assert a.read_bytes() == b.read_bytes()
        assert (tmp_path / "a.truth.json").read_bytes() == (
            tmp_path / "b.truth.json"
        ).read_bytes()

    def test_roundtrip_through_detect(self, tmp_path, capsys):
        out = tmp_path / "rw.csv"
        assert main(["gen", "--preset", "rw", "--n", "1000", "--seed", "4",
                     "--out", str(out)]) == EXIT_OK
        capsys.readouterr()
        code = main(["detect", "--input", str(out), "--alpha", "0.001",
                     "--seed", "4"])
        assert code == EXIT_OK
        payload = json.loads(capsys.readouterr().out)
        truth = set(json.loads((tmp_path / "rw.truth.json").read_text())["indices"])
        found = set(payload["anomaly_indices"])
        assert len(found & truth) / len(truth) >= 0.7


class TestBench:
    def test_structure_and_default_warning(self, tmp_path, capsys):
        out = tmp_path / "bench.json"
        code = main(["bench", "--seeds", "2", "--n", "1200", "--out", str(out)])
        assert code == EXIT_OK
        assert "resource fractions" in capsys.readouterr().err
        payload = json.loads(out.read_text())
        assert len(payload["rows"]) == 2 * 2 * 2  # presets x alphas x seeds
        assert len(payload["aggregates"]) == 4
        assert len(payload["variants"]) == 2
        for v in payload["variants"]:
            assert 0.0 <= v["adcomp_score"] <= 1.0

    def test_seeds_zero_is_config_error(self, capsys):
        assert main(["bench", "--seeds", "0", "--n", "1200"]) == EXIT_CONFIG

    def test_run_bench_rows_consistent(self):
        payload = run_bench(seeds=1, n=1200)
        for row in payload["rows"]:
            assert 0.0 <= row["precision"] <= 1.0
            assert 0.0 <= row["recall"] <= 1.0
            assert row["n_truth"] > 0


class TestParser:
    def test_unknown_command_exits_2(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 2
