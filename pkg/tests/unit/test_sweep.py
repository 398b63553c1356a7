"""Tests for parameter sweeps."""

import csv

import pytest

from agentpolity.core import engine
from agentpolity.core.artifacts import load_report
from agentpolity.core.errors import DeadAgent, InvalidSweep, TickError
from agentpolity.core.models import UNBOUNDED
from agentpolity.core.rng import Phase
from agentpolity.core.sweep import (
    AGGREGATE_COLUMNS,
    AGGREGATE_FILE,
    SweepRow,
    _parse_seeds,
    load_sweep,
    parse_sweep,
    run_directory,
    run_sweep,
    write_aggregate,
)


class TestParseSweep:
    """Test sweep file parsing."""

    def test_parse_seeds(self):
        """Test ranges and single seeds."""
        assert _parse_seeds("1-3, 7") == [1, 2, 3, 7]
        assert _parse_seeds("5") == [5]

    def test_empty_seed_range(self):
        """Test that a descending range is rejected."""
        with pytest.raises(ValueError):
            _parse_seeds("3-1")

    def test_load(self, sweep_file):
        """Test a valid sweep file."""
        spec = load_sweep(sweep_file)
        assert spec.axis == "demon_base_vigilance"
        assert spec.values == ["0", "inf"]
        assert spec.seeds == [1, 2]
        assert spec.workers == 1
        assert spec.base.seed == 7
        assert spec.runs() == [("0", 1), ("0", 2), ("inf", 1), ("inf", 2)]

    def test_config_for(self, sweep_file):
        """Test that each run overrides the axis and the seed."""
        cfg = load_sweep(sweep_file).config_for("inf", 2)
        assert cfg.demon_base_vigilance == UNBOUNDED
        assert cfg.seed == 2
        assert cfg.ticks == 60

    def test_shipped_sweep(self, scenarios_dir):
        """Test the vigilance sweep that ships with the package."""
        spec = load_sweep(scenarios_dir / "vigilance.sweep")
        assert len(spec.runs()) == 30
        assert spec.workers == 4

    @pytest.mark.parametrize(
        "text",
        [
            "base = small.scenario\naxis = ticks\nvalues = 10\n",
            "base = small.scenario\naxis = ticks\nvalues = 10\nseeds = 1\ncolour = red\n",
            "base = small.scenario\naxis = ticks\naxis = sigma_v\nvalues = 10\nseeds = 1\n",
            "base = missing.scenario\naxis = ticks\nvalues = 10\nseeds = 1\n",
            "base = small.scenario\naxis = nations\nvalues = A\nseeds = 1\n",
            "base = small.scenario\naxis = seed\nvalues = 1\nseeds = 1\n",
            "base = small.scenario\naxis = no_such_field\nvalues = 1\nseeds = 1\n",
            "base = small.scenario\naxis = sigma_v\nvalues = abc\nseeds = 1\n",
            "base = small.scenario\naxis = ticks\nvalues = 0\nseeds = 1\n",
            "base = small.scenario\naxis = ticks\nvalues = 10\nseeds = 3-1\n",
            "base = small.scenario\naxis = ticks\nvalues = 10\nseeds = 1\nworkers = 0\n",
        ],
    )
    def test_invalid(self, scenario_file, text):
        """Test that malformed sweeps raise InvalidSweep."""
        with pytest.raises(InvalidSweep):
            parse_sweep(text, scenario_file.parent)

    def test_unreadable(self, tmp_path):
        """Test a sweep file that does not exist."""
        with pytest.raises(InvalidSweep):
            load_sweep(tmp_path / "absent.sweep")


def test_run_directory(tmp_path):
    """Test the per-run directory layout."""
    assert run_directory(tmp_path, "sigma_v", "2.0", 3) == tmp_path / "sigma_v=2.0" / "seed-3"


def test_write_aggregate(tmp_path):
    """Test aggregate rendering of completed and failed rows."""
    rows = [
        SweepRow(axis_value="0", seed=1, classification="Anarchy", mean_legitimacy=0.25, final_price_level=1.0),
        SweepRow(axis_value="0", seed=2, status="failed"),
    ]
    path = write_aggregate(rows, tmp_path / "nested" / AGGREGATE_FILE)
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(AGGREGATE_COLUMNS)
    assert lines[1] == "0,1,Anarchy,0.25,1.0,completed"
    assert lines[2] == "0,2,,,,failed"


class TestRunSweep:
    """Test running sweeps."""

    @pytest.mark.asyncio
    async def test_runs_every_point(self, sweep_file, tmp_path):
        """Test that every (value, seed) pair runs and is aggregated in order."""
        spec = load_sweep(sweep_file)
        out = tmp_path / "out"
        rows = await run_sweep(spec, out, workers=1)
        assert [(r.axis_value, r.seed) for r in rows] == spec.runs()
        assert all(r.status == "completed" for r in rows)
        assert {r.classification for r in rows if r.axis_value == "inf"} == {"Tyranny"}
        for value, seed in spec.runs():
            assert (run_directory(out, spec.axis, value, seed) / "report.json").is_file()
        with open(out / AGGREGATE_FILE, newline="") as f:
            aggregate = list(csv.DictReader(f))
        assert len(aggregate) == 4
        assert aggregate[0]["axis_value"] == "0"

    @pytest.mark.asyncio
    async def test_failed_runs_are_rows(self, sweep_file, tmp_path, mocker):
        """Test that a failing run becomes a failed row, not an exception."""
        mocker.patch("agentpolity.core.engine.run", side_effect=TickError(3, "work", DeadAgent(1)))
        rows = await run_sweep(load_sweep(sweep_file), tmp_path, workers=1)
        assert len(rows) == 4
        assert {r.status for r in rows} == {"failed"}
        assert all(r.classification == "" for r in rows)
        assert "failed" in (tmp_path / AGGREGATE_FILE).read_text()

    @pytest.mark.asyncio
    async def test_unexpected_errors_are_rows(self, sweep_file, tmp_path, monkeypatch):
        """Test that an exception outside the error hierarchy still yields one row per run."""
        def broken(state, rng):
            if state.tick == 1:
                raise TypeError("bad payload")

        monkeypatch.setattr(engine, "PHASES", engine.PHASES + ((Phase.METRICS, broken),))
        spec = load_sweep(sweep_file)
        rows = await run_sweep(spec, tmp_path, workers=1)
        assert [r.status for r in rows] == ["failed"] * 4
        with open(tmp_path / AGGREGATE_FILE, newline="") as f:
            assert len(list(csv.DictReader(f))) == 4
        first = run_directory(tmp_path, spec.axis, "0", 1)
        assert load_report(first).status == "failed"

    @pytest.mark.asyncio
    async def test_crashing_run_becomes_row(self, sweep_file, tmp_path, mocker):
        """Test that a run raising outside the engine's wrapping is recorded as failed."""
        mocker.patch("agentpolity.core.engine.run", side_effect=RuntimeError("worker died"))
        rows = await run_sweep(load_sweep(sweep_file), tmp_path, workers=1)
        assert {r.status for r in rows} == {"failed"}
        assert (tmp_path / AGGREGATE_FILE).is_file()
