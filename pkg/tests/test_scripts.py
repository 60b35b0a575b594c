#!/usr/bin/env python3
"""
Tests for the command-line front end.
"""

import json
import os
import sys
from unittest.mock import patch

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from scripts.snl_cli import (  # noqa: E402
    EXIT_INPUT,
    EXIT_MAX_ITERS,
    EXIT_NO_INTERIOR,
    EXIT_OK,
    EXIT_UNVERIFIED,
    EXIT_USAGE,
    build_parser,
    exit_code_for,
    main,
    solver_config_from_args,
)
from snl.instance import ProblemInstance, load_instance, save_instance  # noqa: E402
from snl.report import CRITICAL_POINT, MAX_ITERS, NO_INTERIOR, SolveReport  # noqa: E402


def run_cli(argv):
    with pytest.raises(SystemExit) as exc_info:
        main(argv)
    return exc_info.value.code


class TestGenCommand:
    """Test the gen subcommand."""

    def test_complete_noiseless(self, tmp_path):
        """Test gen with a range beyond the region diameter."""
        path = str(tmp_path / "inst.json")
        code = run_cli(["gen", "-n", "5", "--range", "10", "--region", "0,0,1,1",
                        "--anchors", "corners", "--sigma", "0", "-o", path])

        assert code == EXIT_OK
        with open(path, "rb") as f:
            inst, truth = load_instance(f.read())
        assert inst.n_sensors == 5
        assert inst.n_sensor_edges == 10
        assert inst.n_anchor_edges == 20
        assert truth is not None

    def test_preset(self, tmp_path, capsys):
        """Test gen from a preset."""
        path = str(tmp_path / "two.json")
        code = run_cli(["gen", "--preset", "two-sensor", "-o", path])

        assert code == EXIT_OK
        assert "✅ Generated preset two-sensor" in capsys.readouterr().out

    def test_seed_from_environment(self, tmp_path):
        """Test that SNL_DEFAULT_SEED is used when --seed is omitted."""
        first, second = str(tmp_path / "a.json"), str(tmp_path / "b.json")
        with patch.dict(os.environ, {"SNL_DEFAULT_SEED": "9"}):
            run_cli(["gen", "--preset", "s20", "-o", first])
        run_cli(["gen", "--preset", "s20", "--seed", "9", "-o", second])

        with open(first, "rb") as a, open(second, "rb") as b:
            assert a.read() == b.read()

    def test_creates_output_directory(self, tmp_path):
        """Test that gen creates missing parent directories of the output."""
        path = tmp_path / "instances" / "nested" / "two.json"
        code = run_cli(["gen", "--preset", "two-sensor", "-o", str(path)])

        assert code == EXIT_OK
        inst, truth = load_instance(path.read_bytes())
        assert inst.n_sensors == 2
        assert truth is not None

    def test_missing_protocol_flags(self):
        """Test that gen without a preset needs -n and --range."""
        assert run_cli(["gen", "-n", "5"]) == 2

    def test_invalid_config(self, tmp_path):
        """Test that a negative range is a usage error."""
        code = run_cli(["gen", "-n", "5", "--range", "-1", "-o", str(tmp_path / "x.json")])

        assert code == EXIT_USAGE


class TestSolveCommand:
    """Test the solve subcommand."""

    def test_solve_noiseless(self, tmp_path):
        """Test gen followed by solve on a complete noiseless instance."""
        inst_path, report_path = str(tmp_path / "inst.json"), str(tmp_path / "report.json")
        run_cli(["gen", "-n", "5", "--range", "10", "--sigma", "0", "--seed", "1", "-o", inst_path])
        code = run_cli(["solve", inst_path, "-o", report_path])

        assert code == EXIT_OK
        with open(report_path, encoding="utf-8") as f:
            data = json.load(f)
        assert data["status"] == CRITICAL_POINT
        assert data["rmsd"] <= 1e-5
        assert data["verification"]["passed"] is True

    def test_solve_deterministic(self, tmp_path):
        """Test that two solves write identical reports apart from timing."""
        inst_path = str(tmp_path / "inst.json")
        run_cli(["gen", "-n", "4", "--range", "0.8", "--seed", "2", "-o", inst_path])
        reports = []
        for name in ("a.json", "b.json"):
            run_cli(["solve", inst_path, "-o", str(tmp_path / name)])
            with open(tmp_path / name, encoding="utf-8") as f:
                data = json.load(f)
            data.pop("wall_time_s")
            reports.append(data)

        assert reports[0] == reports[1]

    def test_missing_file(self, tmp_path):
        """Test that an unreadable instance exits 1."""
        assert run_cli(["solve", str(tmp_path / "missing.json")]) == EXIT_INPUT

    def test_invalid_instance(self, tmp_path):
        """Test that an invalid instance exits 1."""
        path = tmp_path / "bad.json"
        path.write_text('{"schema": "canonical-snl/1", "dim": 0}', encoding="utf-8")

        assert run_cli(["solve", str(path)]) == EXIT_INPUT

    def test_unanchored(self, tmp_path, capsys):
        """Test that an instance without anchor edges exits 3."""
        path = tmp_path / "free.json"
        inst = ProblemInstance(2, 2, [(5.0, 5.0)], sensor_edges=[(1, 2, 1.0, 1.0)])
        path.write_bytes(save_instance(inst))

        assert run_cli(["solve", str(path), "-o", str(tmp_path / "r.json")]) == EXIT_NO_INTERIOR
        assert "[1, 2]" in capsys.readouterr().out

    def test_delta_flags(self):
        """Test the mapping of perturbation flags."""
        parser = build_parser()

        cfg = solver_config_from_args(parser.parse_args(["solve", "x.json", "--delta", "0.01"]))
        assert cfg.delta_magnitude == 0.01
        assert cfg.force_delta

        cfg = solver_config_from_args(parser.parse_args(["solve", "x.json", "--delta-values", "0.1,0.2"]))
        assert cfg.delta_mode == "user"
        assert cfg.delta_values == (0.1, 0.2)

        cfg = solver_config_from_args(parser.parse_args(["solve", "x.json"]))
        assert not cfg.force_delta
        assert cfg.delta_magnitude == 0.005

    @pytest.mark.parametrize("status,verified,expected", [
        (CRITICAL_POINT, True, EXIT_OK),
        (CRITICAL_POINT, False, EXIT_UNVERIFIED),
        (NO_INTERIOR, False, EXIT_NO_INTERIOR),
        (MAX_ITERS, False, EXIT_MAX_ITERS),
    ])
    def test_exit_codes(self, status, verified, expected):
        """Test the exit code contract."""
        assert exit_code_for(SolveReport(status=status, stage="none", dim=2), verified) == expected


class TestPlotCommand:
    """Test the plot subcommand."""

    def test_plot_two_sensor(self, tmp_path):
        """Test gen, solve and plot on the two-sensor preset."""
        inst_path, report_path = str(tmp_path / "inst.json"), str(tmp_path / "report.json")
        svg_path = str(tmp_path / "out.svg")
        run_cli(["gen", "--preset", "two-sensor", "-o", inst_path])
        run_cli(["solve", inst_path, "--delta", "0.005", "-o", report_path])
        code = run_cli(["plot", inst_path, report_path, "-o", svg_path, "--edges"])

        assert code == EXIT_OK
        with open(svg_path, encoding="utf-8") as f:
            svg = f.read()
        assert svg.count('id="anchor-') == 4
        assert svg.count('id="edge-') == 5

    def test_plot_without_truth(self, tmp_path, capsys):
        """Test the warning when the instance carries no truth."""
        inst_path, report_path = tmp_path / "inst.json", tmp_path / "report.json"
        inst = ProblemInstance(2, 1, [(0.0, 1.0), (0.0, -1.0)], anchor_edges=[(1, 1, 2.0, 1.0), (1, 2, 2.0, 1.0)])
        inst_path.write_bytes(save_instance(inst))
        run_cli(["solve", str(inst_path), "--delta-values", "0.005,0", "-o", str(report_path)])
        capsys.readouterr()

        code = run_cli(["plot", str(inst_path), str(report_path), "-o", str(tmp_path / "p.svg")])

        assert code == EXIT_OK
        assert "⚠️" in capsys.readouterr().out


class TestBenchCommand:
    """Test the bench subcommand."""

    def test_bench_two_sensor(self, tmp_path):
        """Test a one-row bench written to CSV."""
        path = tmp_path / "bench.csv"
        code = run_cli(["bench", "--preset", "two-sensor", "-o", str(path)])

        assert code == EXIT_OK
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0].startswith("instance_id,n,m,range,sigma,rmsd,gap,status,stage,time_s")
        assert lines[1].startswith("two-sensor-0,2,4,,")

    def test_bad_seeds(self):
        """Test that a malformed seed list is a usage error."""
        assert run_cli(["bench", "--seeds", "x"]) == 2

    def test_bad_baseline(self, tmp_path):
        """Test that an invalid baseline exits 1."""
        path = tmp_path / "baseline.json"
        path.write_text("{}", encoding="utf-8")

        assert run_cli(["bench", "--preset", "two-sensor", "--baseline", str(path)]) == EXIT_INPUT


class TestParser:
    """Test argument parsing."""

    def test_command_required(self):
        """Test that a subcommand is required."""
        assert run_cli([]) == 2
