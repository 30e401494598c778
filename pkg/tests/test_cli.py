"""Tests for the command-line interface and CSV round-tripping."""

import numpy as np
import pytest

from ropespectrum import ReportTable
from ropespectrum.cli import emit_csv, read_csv, run


class TestCsv:
    def test_header_only_file(self, tmp_path):
        path = tmp_path / "empty.csv"
        emit_csv(ReportTable(columns={"a": [], "b": []}, metadata={"note": "x"}), path)
        lines = path.read_text().splitlines()
        assert lines == ["# note = x", "a,b"]

    def test_round_trip_is_lossless(self, tmp_path):
        rng = np.random.default_rng(0)
        values = [float(v) for v in rng.normal(size=50) * 10.0**rng.integers(-12, 12, size=50)]
        table = ReportTable(
            columns={"idx": list(range(50)), "value": values},
            metadata={"seed": 0, "sigma": 1.25},
        )
        path = tmp_path / "t.csv"
        emit_csv(table, path)
        back = read_csv(path)
        assert list(back.columns) == ["idx", "value"]
        assert back.column("idx") == list(range(50))
        assert back.column("value") == values

    def test_floats_use_shortest_round_trip_form(self, tmp_path):
        path = tmp_path / "f.csv"
        emit_csv(ReportTable(columns={"x": [0.1, 1.0 / 3.0]}), path)
        body = path.read_text().splitlines()
        assert body[1] == "0.1"
        assert float(body[2]) == 1.0 / 3.0

    def test_metadata_block_precedes_header(self, tmp_path):
        path = tmp_path / "m.csv"
        emit_csv(ReportTable(columns={"x": [1]}, metadata={"alpha": 1, "beta": 2.5}), path)
        lines = path.read_text().splitlines()
        assert lines[0] == "# alpha = 1"
        assert lines[1] == "# beta = 2.5"
        assert lines[2] == "x"


class TestCliBasics:
    def test_critdim_prints_value(self, capsys):
        code = run(["critdim", "--pretrain-len", "8192", "--d", "128", "--base", "500000"])
        assert code == 0
        assert capsys.readouterr().out.strip() == "70"

    def test_freqs_small_table_body(self, tmp_path, capsys):
        out = tmp_path / "t.csv"
        code = run(["freqs", "--d", "4", "--base", "10000", "--out", str(out)])
        assert code == 0
        data_rows = [l for l in out.read_text().splitlines() if not l.startswith("#")][1:]
        assert data_rows[0].startswith("0,1.0,")
        assert data_rows[1].startswith("1,0.01,")

    def test_unknown_flag_exits_2(self, capsys):
        assert run(["decay", "--bad-flag"]) == 2
        assert "usage" in capsys.readouterr().err

    def test_unknown_subcommand_exits_2(self, capsys):
        assert run(["frobnicate"]) == 2

    def test_missing_subcommand_exits_2(self, capsys):
        assert run([]) == 2

    def test_invalid_range_exits_1_with_reason(self, tmp_path, capsys):
        out = tmp_path / "x.csv"
        code = run(["freqs", "--d", "7", "--base", "10000", "--out", str(out)])
        assert code == 1
        assert "even" in capsys.readouterr().err

    def test_unwritable_out_exits_1(self, tmp_path, capsys):
        code = run(
            ["freqs", "--d", "4", "--base", "10000", "--out", str(tmp_path / "no" / "dir" / "t.csv")]
        )
        assert code == 1
        assert "cannot write" in capsys.readouterr().err

    def test_help_exits_0(self, capsys):
        assert run(["--help"]) == 0


class TestCliStudies:
    def test_scale_with_external_file(self, tmp_path):
        scale_file = tmp_path / "factors.txt"
        scale_file.write_text("# two chunks\n2.0\n4.0\n")
        out = tmp_path / "scaled.csv"
        code = run(
            [
                "scale",
                "--d",
                "4",
                "--base",
                "10000",
                "--method",
                "table",
                "--pretrain-len",
                "1024",
                "--target-len",
                "4096",
                "--scale-file",
                str(scale_file),
                "--out",
                str(out),
            ]
        )
        assert code == 0
        table = read_csv(out)
        assert table.column("scale_factor") == [2.0, 4.0]
        assert table.column("theta_scaled") == [0.5, 0.01 / 4.0]

    def test_scale_with_short_file_exits_1(self, tmp_path, capsys):
        scale_file = tmp_path / "short.txt"
        scale_file.write_text("2.0\n")
        code = run(
            [
                "scale",
                "--d",
                "4",
                "--base",
                "10000",
                "--method",
                "table",
                "--scale-file",
                str(scale_file),
                "--out",
                str(tmp_path / "s.csv"),
            ]
        )
        assert code == 1
        assert "expected 2" in capsys.readouterr().err

    def test_decay_writes_curves_and_plot(self, tmp_path):
        out = tmp_path / "decay.csv"
        code = run(
            [
                "decay",
                "--d",
                "32",
                "--base",
                "10000",
                "--onset",
                "8",
                "--tau-max",
                "4096",
                "--tau-step",
                "16",
                "--out",
                str(out),
                "--plot",
            ]
        )
        assert code == 0
        table = read_csv(out)
        assert table.column("tau")[0] == 0.0
        assert table.column("soft8_normalized")[0] == 1.0
        svg = out.with_suffix(".svg")
        assert svg.exists()
        assert "<svg" in svg.read_text()[:2000]

    def test_gap_reports_z_score(self, tmp_path, capsys):
        out = tmp_path / "gap.csv"
        code = run(
            [
                "gap",
                "--d",
                "8",
                "--base",
                "10000",
                "--clip-mode",
                "none",
                "--onset",
                "4",
                "--tau",
                "17",
                "--n-samples",
                "20000",
                "--seed",
                "3",
                "--out",
                str(out),
            ]
        )
        assert code == 0
        table = read_csv(out)
        assert abs(table.column("z_score")[0]) < 4.0
        assert "analytic" in capsys.readouterr().out

    def test_retrieval_csv_is_byte_identical_across_runs(self, tmp_path):
        args = [
            "retrieval",
            "--d",
            "32",
            "--base",
            "10000",
            "--clip-mode",
            "soft",
            "--onset",
            "10",
            "--distances",
            "64,1024",
            "--n-trials",
            "300",
            "--seed",
            "21",
        ]
        out1, out2 = tmp_path / "r1.csv", tmp_path / "r2.csv"
        assert run(args + ["--out", str(out1)]) == 0
        assert run(args + ["--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_spectrum_columns(self, tmp_path):
        out = tmp_path / "spec.csv"
        code = run(["spectrum", "--d", "128", "--base", "500000", "--onset", "44", "--out", str(out)])
        assert code == 0
        table = read_csv(out)
        assert list(table.columns) == ["chunk_index", "theta", "none", "hard44", "soft44"]
        assert sum(table.column("hard44")) == 44

    def test_ringing_study_cli(self, tmp_path, capsys):
        out = tmp_path / "ring.csv"
        code = run(
            [
                "ringing",
                "--d",
                "32",
                "--base",
                "10000",
                "--onset",
                "8",
                "--ring-periods",
                "20",
                "--panels",
                "1024",
                "--out",
                str(out),
                "--plot",
            ]
        )
        assert code == 0
        assert out.with_suffix(".svg").exists()
        assert "envelope exponents" in capsys.readouterr().out
        table = read_csv(out)
        assert float(table.metadata["hard_envelope_exponent"]) == pytest.approx(1.0, abs=0.3)
