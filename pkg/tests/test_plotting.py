"""Tests for SVG plotting and CLI formatting helpers."""

import xml.etree.ElementTree as ET

import click
import pytest

from oprsim.dynamics import Mode, Trajectory
from oprsim.errors import ContractViolation
from oprsim.planner import Verdict
from oprsim.records import Aggregate, RunRecord
from oprsim.utils import emit_plot, format_record_line, format_verdict

SVG = "{http://www.w3.org/2000/svg}"


def aggregates():
    return [
        Aggregate(0.5, "opr-ol", 10, 1.0, 0.12, 45.0, 0),
        Aggregate(1.0, "opr-ol", 10, 0.9, 0.18, 48.0, 0),
        Aggregate(0.5, "vs", 10, 0.8, 0.31, 400.0, 0),
        Aggregate(1.0, "vs", 10, 0.6, 0.44, 400.0, 1),
    ]


def trajectory(controller, offset=0.0):
    traj = Trajectory(controller=controller, strip_band=(9.5, 10.5))
    for step in range(20):
        mode = Mode.NOMINAL if step < 8 else Mode.RECOVERY
        z = 10.0 - 0.2 * min(step, 8) + offset + 0.1 * max(step - 8, 0)
        traj.append(step, [z, 0.0], [0.0], [z, 0.0], [z + 3.0, 0.0], mode)
    return traj


def texts(path):
    root = ET.parse(path).getroot()
    assert root.tag == f"{SVG}svg"
    return {el.text for el in root.iter(f"{SVG}text") if el.text}


class TestEmitPlot:
    """Tests for emit_plot."""

    def test_success_rate(self, temp_dir):
        labels = texts(emit_plot(aggregates(), "success_rate", temp_dir / "success.svg"))
        assert "success rate (fraction of episodes)" in labels
        assert "noise multiplier (x nominal sensor and process noise std)" in labels
        assert "Success rate vs. noise" in labels
        assert {"opr-ol", "vs"} <= labels

    def test_mean_distance(self, temp_dir):
        labels = texts(emit_plot(aggregates(), "mean_distance", temp_dir / "distance.svg"))
        assert "mean final distance to strip center (m)" in labels

    def test_single_point_series(self, temp_dir):
        path = emit_plot(aggregates()[:1], "success_rate", temp_dir / "one.svg")
        assert "opr-ol" in texts(path)

    def test_timeseries(self, temp_dir):
        path = emit_plot([trajectory("opr-ol"), trajectory("vs", 0.3)], "timeseries", temp_dir / "ts.svg")
        labels = texts(path)
        assert {"true altitude (m)", "step (sample index)", "True altitude per controller"} <= labels
        assert {"opr-ol", "vs", "safe strip", "alarm"} <= labels

    def test_timeseries_without_band_or_alarm(self, temp_dir):
        traj = Trajectory(controller="vs")
        for step in range(5):
            traj.append(step, [10.0, 0.0], [0.0], [10.0, 0.0], [10.0, 0.0], Mode.NOMINAL)
        labels = texts(emit_plot([traj], "timeseries", temp_dir / "plain.svg"))
        assert "vs" in labels
        assert not {"safe strip", "alarm"} & labels

    def test_output_is_reproducible(self, temp_dir):
        first = emit_plot(aggregates(), "success_rate", temp_dir / "a.svg").read_text()
        second = emit_plot(aggregates(), "success_rate", temp_dir / "b.svg").read_text()
        assert first == second
        assert first.lstrip().startswith("<?xml")

    def test_creates_parent_directories(self, temp_dir):
        path = emit_plot(aggregates(), "mean_distance", temp_dir / "plots" / "nested" / "d.svg")
        assert path.exists()

    def test_unknown_metric(self, temp_dir):
        with pytest.raises(ContractViolation, match="unknown metric"):
            emit_plot(aggregates(), "latency", temp_dir / "x.svg")

    @pytest.mark.parametrize("metric", ["timeseries", "success_rate", "mean_distance"])
    def test_empty_data(self, temp_dir, metric):
        with pytest.raises(ContractViolation, match="empty data"):
            emit_plot([], metric, temp_dir / "x.svg")

    def test_wrong_data_kind(self, temp_dir):
        with pytest.raises(ContractViolation):
            emit_plot(aggregates(), "timeseries", temp_dir / "x.svg")
        with pytest.raises(ContractViolation):
            emit_plot([trajectory("vs")], "success_rate", temp_dir / "x.svg")
        assert not (temp_dir / "x.svg").exists()


class TestFormatting:
    def test_record_line(self):
        record = RunRecord(7, 1.0, "opr-ol", 500, 503, 85, 0.0421, True, ("planner fallback: planner timeout",))
        line = click.unstyle(format_record_line(record))
        assert "[success]" in line
        assert "alarm=503" in line
        assert "distance=0.0421 m" in line
        assert "entry=-" in line
        assert line.endswith("- planner fallback: planner timeout")

    def test_failed_record_line(self):
        record = RunRecord(7, 1.0, "vs", 500, None, 0, 0.6, False, ("episode failed: rollback buffer too short",))
        line = click.unstyle(format_record_line(record))
        assert "[failed]" in line
        assert "alarm=-" in line
        assert "entry=" not in line

    def test_record_line_with_entry(self):
        record = RunRecord(7, 1.0, "opr-ol", 500, 503, 85, 0.0421, True, ())
        line = click.unstyle(format_record_line(record, 561))
        assert line.endswith("distance=0.0421 m entry=561")

    def test_verdict(self):
        text = click.unstyle(format_verdict(Verdict(False, True, 0.99, ("outside envelope",))))
        assert "safe:        no" in text
        assert "reasons:     outside envelope" in text
