#!/usr/bin/env python3
"""
Tests for benchmark sweeps and baseline ingestion.
"""

import json
import pandas as pd
import pytest

from snl.ascent import SolverConfig
from snl.bench import (
    BENCH_COLUMNS,
    BenchRow,
    instance_id,
    load_baseline,
    merge_baseline,
    parse_seeds,
    run_bench,
    run_cell,
    to_csv,
)
from snl.errors import BaselineSchemaError, InvalidConfigError


def fake_cell(preset_name, seed, cfg):
    return BenchRow(
        instance_id=instance_id(preset_name, seed),
        n=2,
        m=4,
        range=None if preset_name == "two-sensor" else 0.4,
        sigma=0.001,
        rmsd=1e-6,
        gap=1e-9,
        status="critical-point-in-cone",
        stage="none",
        time_s=0.01,
    )


class TestParseSeeds:
    """Test seed list parsing."""

    @pytest.mark.parametrize("text,expected", [
        ("7", [7]),
        ("1,4,9", [1, 4, 9]),
        ("1..5", [1, 2, 3, 4, 5]),
        ("1..3,10", [1, 2, 3, 10]),
    ])
    def test_valid(self, text, expected):
        """Test the accepted forms."""
        assert parse_seeds(text) == expected

    @pytest.mark.parametrize("text", ["", "a", "5..1", "1..", "1;2"])
    def test_invalid(self, text):
        """Test that malformed lists raise InvalidConfigError."""
        with pytest.raises(InvalidConfigError):
            parse_seeds(text)


class TestRunBench:
    """Test the preset × seed sweep."""

    def test_instance_id(self):
        """Test the cell identifier."""
        assert instance_id("s20", 3) == "s20-3"

    def test_rows_sorted(self, mocker):
        """Test that rows are ordered by preset then seed."""
        mock_run_cell = mocker.patch("snl.bench.run_cell", side_effect=fake_cell)
        frame = run_bench(["s20", "s18"], [3, 1, 2])

        assert frame["instance_id"].tolist() == ["s18-1", "s18-2", "s18-3", "s20-1", "s20-2", "s20-3"]
        assert mock_run_cell.call_count == 6
        assert list(frame.columns) == BENCH_COLUMNS + ["verified"]

    def test_fixed_preset_runs_once(self, mocker):
        """Test that a fixed preset ignores the seed list."""
        mock_run_cell = mocker.patch("snl.bench.run_cell", side_effect=fake_cell)
        frame = run_bench(["two-sensor"], [1, 2, 3])

        assert frame["instance_id"].tolist() == ["two-sensor-0"]
        mock_run_cell.assert_called_once()

    def test_run_cell_two_sensor(self):
        """Test one real cell."""
        row = run_cell("two-sensor", 0, SolverConfig())

        assert row.instance_id == "two-sensor-0"
        assert row.n == 2
        assert row.m == 4
        assert row.range is None
        assert row.time_s >= 0

    @pytest.mark.slow
    def test_parallel_matches_serial(self):
        """Test that worker processes give the same table."""
        serial = run_bench(["s18"], [1, 2])
        parallel = run_bench(["s18"], [1, 2], jobs=2)

        columns = [c for c in BENCH_COLUMNS if c != "time_s"]
        pd.testing.assert_frame_equal(serial[columns], parallel[columns])


class TestBaseline:
    """Test baseline ingestion and merging."""

    def test_load_baseline(self):
        """Test a valid baseline document."""
        document = json.dumps({"rows": [{"instance_id": "s20-1", "rmsd": 0.002, "wall_time_s": 3.5}]})
        frame = load_baseline(document.encode("utf-8"))

        assert frame.to_dict("records") == [{"instance_id": "s20-1", "baseline_rmsd": 0.002, "baseline_time_s": 3.5}]

    @pytest.mark.parametrize("document", [
        "not json",
        json.dumps([1, 2]),
        json.dumps({"rows": [{"instance_id": "s20-1"}]}),
        json.dumps({"rows": [{"instance_id": "s20-1", "rmsd": "x", "wall_time_s": 1}]}),
        json.dumps({"rows": [
            {"instance_id": "s20-1", "rmsd": 1, "wall_time_s": 1},
            {"instance_id": "s20-1", "rmsd": 2, "wall_time_s": 2},
        ]}),
    ])
    def test_invalid_baseline(self, document):
        """Test that malformed baselines raise BaselineSchemaError."""
        with pytest.raises(BaselineSchemaError):
            load_baseline(document)

    def test_merge_and_csv(self, mocker):
        """Test the left join and the CSV column order."""
        mocker.patch("snl.bench.run_cell", side_effect=fake_cell)
        frame = run_bench(["two-sensor", "s20"], [1])
        baseline = load_baseline(json.dumps({"rows": [{"instance_id": "s20-1", "rmsd": 0.002, "wall_time_s": 3.5}]}))
        merged = merge_baseline(frame, baseline)
        lines = to_csv(merged).splitlines()

        assert lines[0] == ",".join(BENCH_COLUMNS + ["baseline_rmsd", "baseline_time_s"])
        assert lines[1].startswith("s20-1,2,4,0.4,")
        assert lines[1].endswith(",0.002,3.5")
        assert lines[2].startswith("two-sensor-0,2,4,,")
