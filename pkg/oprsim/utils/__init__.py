"""Utility modules for opr-sim."""

from .formatting import aggregate_table, format_record_line, format_verdict, sweeps_table
from .plotting import METRICS, emit_plot

__all__ = ["METRICS", "aggregate_table", "emit_plot", "format_record_line", "format_verdict", "sweeps_table"]
