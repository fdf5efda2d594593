"""SVG charts: altitude time series and sweep aggregates against the noise multiplier."""

from pathlib import Path
from typing import Optional, Sequence

import matplotlib
from matplotlib.axes import Axes
from matplotlib.figure import Figure

from ..dynamics import Mode, Trajectory
from ..errors import ContractViolation
from ..records import Aggregate

METRICS = ("timeseries", "success_rate", "mean_distance")

FIGSIZE = (8.0, 4.8)

CONTROLLER_COLORS = {
    "opr-ol": "#1f77b4",
    "opr-pcl": "#2ca02c",
    "rtr-lqr": "#d62728",
    "vs": "#9467bd",
}
FALLBACK_COLORS = ["#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"]

AGGREGATE_AXES = {
    "success_rate": ("success rate (fraction of episodes)", "Success rate vs. noise"),
    "mean_distance": ("mean final distance to strip center (m)", "Distance to strip center vs. noise"),
}

# Text stays selectable and files are byte-identical across runs.
SVG_STYLE = {"svg.fonttype": "none", "svg.hashsalt": "oprsim"}


def _color(name: str, index: int) -> str:
    return CONTROLLER_COLORS.get(name, FALLBACK_COLORS[index % len(FALLBACK_COLORS)])


def _alarm_step(traj: Trajectory) -> Optional[int]:
    return next((step for step, mode in zip(traj.steps, traj.modes) if mode == Mode.RECOVERY), None)


def plot_timeseries(ax: Axes, trajectories: Sequence[Trajectory]) -> None:
    trajectories = [t for t in trajectories if len(t)]
    if not trajectories:
        raise ContractViolation("empty data")

    band = next((t.strip_band for t in trajectories if t.strip_band is not None), None)
    if band is not None:
        ax.axhspan(band[0], band[1], color="#2ca02c", alpha=0.15, label="safe strip")

    for i, traj in enumerate(trajectories):
        name = traj.controller or f"run {i + 1}"
        ax.plot(traj.steps, traj.state_matrix()[:, 0], color=_color(traj.controller, i), linewidth=1.2, label=name)

    alarm = _alarm_step(trajectories[0])
    if alarm is not None:
        ax.axvline(alarm, color="#ff7f0e", linestyle="--", linewidth=1.0, label="alarm")

    ax.set_title("True altitude per controller")
    ax.set_xlabel("step (sample index)")
    ax.set_ylabel("true altitude (m)")


def plot_aggregate(ax: Axes, aggregates: Sequence[Aggregate], metric: str) -> None:
    if not aggregates:
        raise ContractViolation("empty data")
    y_label, title = AGGREGATE_AXES[metric]

    controllers = list(dict.fromkeys(a.controller for a in aggregates))
    for i, name in enumerate(controllers):
        rows = sorted((a for a in aggregates if a.controller == name), key=lambda a: a.sigma)
        ax.plot([a.sigma for a in rows], [getattr(a, metric) for a in rows],
                color=_color(name, i), marker="o", linewidth=1.2, label=name)

    if metric == "success_rate":
        ax.set_ylim(-0.02, 1.02)
    else:
        ax.set_ylim(bottom=0.0)
    ax.set_title(title)
    ax.set_xlabel("noise multiplier (x nominal sensor and process noise std)")
    ax.set_ylabel(y_label)


def emit_plot(data: Sequence[Aggregate] | Sequence[Trajectory], metric: str, out: Path) -> Path:
    """Render `data` as a self-contained SVG at `out`.

    `timeseries` takes trajectories; `success_rate` and `mean_distance` take aggregates.
    """
    if metric not in METRICS:
        raise ContractViolation(f"unknown metric '{metric}' (choose from {', '.join(METRICS)})")
    data = list(data)
    if not data:
        raise ContractViolation("empty data")
    if metric == "timeseries":
        if not all(isinstance(d, Trajectory) for d in data):
            raise ContractViolation("timeseries plots need trajectories")
    elif not all(isinstance(d, Aggregate) for d in data):
        raise ContractViolation(f"{metric} plots need sweep aggregates")

    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with matplotlib.rc_context(SVG_STYLE):
        fig = Figure(figsize=FIGSIZE)
        ax = fig.subplots()
        if metric == "timeseries":
            plot_timeseries(ax, data)
        else:
            plot_aggregate(ax, data, metric)
        ax.grid(True, color="#dddddd", linewidth=0.6)
        ax.legend(loc="best", fontsize="small")
        fig.tight_layout()
        fig.savefig(out, format="svg", metadata={"Date": None})
    return out
