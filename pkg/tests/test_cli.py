"""Tests for CLI commands."""

import json
from dataclasses import replace
from pathlib import Path

import pytest
from click.testing import CliRunner

from oprsim.cli import cli
from oprsim.config import get_default_config, save_config
from oprsim.records import read_csv, read_trajectories, write_csv

STRIP = '{"theta1": [1, 0], "theta2": 9.5, "theta3": 10.5}'


@pytest.fixture
def cli_runner():
    """Create a Click CLI runner."""
    return CliRunner()


@pytest.fixture
def config_file(temp_dir, small_config):
    """A fast config on disk: one seed, two controllers."""
    config = replace(
        small_config,
        recovery=replace(small_config.recovery, controllers=("opr-ol", "vs")),
        sweep=replace(small_config.sweep, seeds=1),
    )
    return save_config(config, temp_dir / "experiment.json")


def sweep_into(cli_runner, config_file, temp_dir, *extra):
    out = temp_dir / "results.csv"
    result = cli_runner.invoke(cli, ["sweep", "--config", str(config_file), "--out", str(out), "--quiet", *extra])
    assert result.exit_code == 0, result.output
    return out, result


class TestTopLevel:
    def test_version(self, cli_runner):
        result = cli_runner.invoke(cli, ["--version"])
        assert result.exit_code == 0
        assert result.output.startswith("sim version ")

    def test_unknown_command_is_usage_error(self, cli_runner):
        assert cli_runner.invoke(cli, ["fly"]).exit_code == 1


class TestInitCommand:
    """Tests for init command."""

    def test_init_writes_defaults(self, cli_runner):
        """Test that init writes the default config."""
        with cli_runner.isolated_filesystem():
            result = cli_runner.invoke(cli, ["init"])

            assert result.exit_code == 0
            assert "Default config written" in result.output
            assert json.loads(Path("experiment.json").read_text()) == get_default_config()

    def test_init_refuses_to_overwrite(self, cli_runner):
        with cli_runner.isolated_filesystem():
            Path("experiment.json").write_text("{}")

            result = cli_runner.invoke(cli, ["init"])
            assert result.exit_code == 1
            assert "already exists" in result.output
            assert Path("experiment.json").read_text() == "{}"

            assert cli_runner.invoke(cli, ["init", "--force"]).exit_code == 0


class TestRunCommand:
    """Tests for run command."""

    def test_run_prints_one_line_per_controller(self, cli_runner, config_file):
        result = cli_runner.invoke(cli, ["run", "-c", str(config_file), "-C", "opr-ol", "-C", "vs", "--seed", "3"])

        assert result.exit_code == 0, result.output
        lines = result.output.strip().splitlines()
        assert len(lines) == 2
        assert lines[0].startswith("opr-ol")
        assert lines[1].startswith("vs")

    def test_run_json_and_trajectories(self, cli_runner, config_file, temp_dir):
        traj = temp_dir / "traj.csv"
        result = cli_runner.invoke(cli, [
            "run", "-c", str(config_file), "-C", "opr-ol", "-C", "vs",
            "--seed", "3", "--sigma", "0.5", "--traj", str(traj), "--json",
        ])

        assert result.exit_code == 0, result.output
        records = json.loads(result.output)
        assert [r["controller"] for r in records] == ["opr-ol", "vs"]
        assert all(r["seed"] == 3 and r["sigma"] == 0.5 for r in records)
        # Detection does not depend on the controller.
        assert records[0]["alarm_step"] == records[1]["alarm_step"]
        for r in records:
            assert r["entry_step"] is None or r["entry_step"] >= r["alarm_step"]
        assert [t.controller for t in read_trajectories(traj)] == ["opr-ol", "vs"]

    def test_run_requires_controller(self, cli_runner):
        assert cli_runner.invoke(cli, ["run", "--seed", "0"]).exit_code == 1

    def test_run_rejects_unknown_controller(self, cli_runner):
        assert cli_runner.invoke(cli, ["run", "-C", "pid", "--seed", "0"]).exit_code == 1

    def test_run_rejects_negative_seed(self, cli_runner):
        assert cli_runner.invoke(cli, ["run", "-C", "vs", "--seed", "-1"]).exit_code == 1

    def test_invalid_config_is_usage_error(self, cli_runner, temp_dir):
        """Test that every config problem is reported and the exit code is 1."""
        path = temp_dir / "bad.json"
        path.write_text(json.dumps({"sweep": {"seeds": 0}, "detector": {"window": "long"}}))

        result = cli_runner.invoke(cli, ["run", "-c", str(path), "-C", "vs", "--seed", "0"])

        assert result.exit_code == 1
        assert "sweep.seeds: must be >= 1" in result.output
        assert "detector.window" in result.output

    def test_missing_config_file(self, cli_runner, temp_dir):
        result = cli_runner.invoke(cli, ["run", "-c", str(temp_dir / "nope.json"), "-C", "vs", "--seed", "0"])
        assert result.exit_code == 1

    def test_unwritable_trajectory_is_runtime_failure(self, cli_runner, config_file, temp_dir):
        blocker = temp_dir / "file"
        blocker.write_text("")
        result = cli_runner.invoke(cli, [
            "run", "-c", str(config_file), "-C", "vs", "--seed", "0", "--traj", str(blocker / "traj.csv"),
        ])
        assert result.exit_code == 2


class TestSweepCommand:
    """Tests for sweep command."""

    def test_sweep_writes_results(self, cli_runner, config_file, temp_dir):
        out, result = sweep_into(cli_runner, config_file, temp_dir)

        records = read_csv(out)
        # 2 noise levels x 1 seed x 2 controllers
        assert len(records) == 4
        assert {r.controller for r in records} == {"opr-ol", "vs"}
        assert "4 records written" in result.output

    def test_sweep_stores_in_database(self, cli_runner, config_file, temp_dir):
        db = temp_dir / "results.db"
        _, result = sweep_into(cli_runner, config_file, temp_dir, "--db", str(db), "--label", "smoke")

        assert db.exists()
        assert "Sweep stored as" in result.output

        listed = cli_runner.invoke(cli, ["results", "list", "--db", str(db), "--json"])
        assert listed.exit_code == 0
        sweeps = json.loads(listed.output)
        assert len(sweeps) == 1
        assert sweeps[0]["label"] == "smoke"
        assert sweeps[0]["runs"] == 4

    def test_sweep_rejects_zero_workers(self, cli_runner, config_file):
        assert cli_runner.invoke(cli, ["sweep", "-c", str(config_file), "--workers", "0"]).exit_code == 1


class TestVerifyCommand:
    """Tests for verify command."""

    def test_accepted_strip(self, cli_runner, config_file):
        result = cli_runner.invoke(cli, ["verify", "-c", str(config_file), "--theta", STRIP, "--json"])

        assert result.exit_code == 0, result.output
        verdict = json.loads(result.output)
        assert verdict["safe"] is True
        assert verdict["feasible"] is True
        assert verdict["reasons"] == []

    def test_rejected_strip_still_exits_zero(self, cli_runner, config_file):
        theta = '{"theta1": [1, 0], "theta2": 60.0, "theta3": 61.0}'
        result = cli_runner.invoke(cli, ["verify", "-c", str(config_file), "--theta", theta])

        assert result.exit_code == 0
        assert "safe:        no" in result.output

    def test_invalid_parameters_are_reported(self, cli_runner, config_file):
        theta = '{"theta1": [1, 0], "theta2": 11.0, "theta3": 10.0}'
        result = cli_runner.invoke(cli, ["verify", "-c", str(config_file), "--theta", theta, "--json"])

        assert result.exit_code == 0
        verdict = json.loads(result.output)
        assert verdict["safe"] is False and verdict["feasible"] is False
        assert verdict["reasons"]

    @pytest.mark.parametrize("theta", ["{not json", "[1, 2]"])
    def test_malformed_theta(self, cli_runner, theta):
        result = cli_runner.invoke(cli, ["verify", "--theta", theta])
        assert result.exit_code == 1
        assert "--theta" in result.output


class TestPlotCommand:
    """Tests for plot command."""

    def test_success_rate_from_sweep(self, cli_runner, config_file, temp_dir):
        results, _ = sweep_into(cli_runner, config_file, temp_dir)
        out = temp_dir / "plots" / "success.svg"

        result = cli_runner.invoke(cli, ["plot", "--in", str(results), "--metric", "success_rate", "--out", str(out)])

        assert result.exit_code == 0, result.output
        assert out.read_text().lstrip().startswith("<?xml")

    def test_timeseries_from_run(self, cli_runner, config_file, temp_dir):
        traj = temp_dir / "traj.csv"
        cli_runner.invoke(cli, ["run", "-c", str(config_file), "-C", "opr-ol", "--seed", "1", "--traj", str(traj)])
        out = temp_dir / "ts.svg"

        result = cli_runner.invoke(cli, ["plot", "--traj", str(traj), "--metric", "timeseries", "--out", str(out)])

        assert result.exit_code == 0, result.output
        assert "true altitude (m)" in out.read_text()

    def test_timeseries_needs_trajectories(self, cli_runner, temp_dir):
        result = cli_runner.invoke(cli, ["plot", "--metric", "timeseries", "--out", str(temp_dir / "x.svg")])
        assert result.exit_code == 1

    def test_aggregate_needs_results(self, cli_runner, temp_dir):
        result = cli_runner.invoke(cli, ["plot", "--metric", "mean_distance", "--out", str(temp_dir / "x.svg")])
        assert result.exit_code == 1

    def test_unknown_metric(self, cli_runner, temp_dir):
        result = cli_runner.invoke(cli, ["plot", "--metric", "latency", "--out", str(temp_dir / "x.svg")])
        assert result.exit_code == 1

    def test_empty_results_is_runtime_failure(self, cli_runner, temp_dir):
        results = write_csv([], temp_dir / "empty.csv")
        result = cli_runner.invoke(cli, [
            "plot", "--in", str(results), "--metric", "success_rate", "--out", str(temp_dir / "x.svg"),
        ])
        assert result.exit_code == 2
        assert "empty data" in result.output

    def test_malformed_results_is_runtime_failure(self, cli_runner, temp_dir):
        results = temp_dir / "broken.csv"
        results.write_text("not,a,results,file\n")
        result = cli_runner.invoke(cli, [
            "plot", "--in", str(results), "--metric", "success_rate", "--out", str(temp_dir / "x.svg"),
        ])
        assert result.exit_code == 2
        assert "line 1" in result.output


class TestResultsCommands:
    """Tests for results list/show/export."""

    def test_missing_database(self, cli_runner, temp_dir):
        result = cli_runner.invoke(cli, ["results", "list", "--db", str(temp_dir / "none.db")])
        assert result.exit_code == 2
        assert "sim sweep --db" in result.output

    def test_show_and_export(self, cli_runner, config_file, temp_dir):
        db = temp_dir / "results.db"
        csv_path, _ = sweep_into(cli_runner, config_file, temp_dir, "--db", str(db))
        sweep_id = json.loads(cli_runner.invoke(cli, ["results", "list", "--db", str(db), "--json"]).output)[0]["id"]

        shown = cli_runner.invoke(cli, ["results", "show", "--db", str(db), "--id", sweep_id, "--json"])
        assert shown.exit_code == 0
        data = json.loads(shown.output)
        assert data["id"] == sweep_id
        assert {a["controller"] for a in data["aggregates"]} == {"opr-ol", "vs"}

        exported = temp_dir / "exported.csv"
        result = cli_runner.invoke(cli, ["results", "export", "--db", str(db), "--id", sweep_id, "--out", str(exported)])
        assert result.exit_code == 0
        assert exported.read_bytes() == csv_path.read_bytes()

    def test_show_unknown_sweep(self, cli_runner, config_file, temp_dir):
        db = temp_dir / "results.db"
        sweep_into(cli_runner, config_file, temp_dir, "--db", str(db))

        result = cli_runner.invoke(cli, ["results", "show", "--db", str(db), "--id", "zzzzzz"])
        assert result.exit_code == 2
        assert "not found" in result.output

    def test_list_empty_database(self, cli_runner, temp_dir):
        from oprsim.db.database import init_db

        db = init_db(temp_dir / "empty.db")
        result = cli_runner.invoke(cli, ["results", "list", "--db", str(db)])
        assert result.exit_code == 0
        assert "No sweeps stored." in result.output
