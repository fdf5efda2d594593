"""Service layer for opr-sim."""

from .episode import Episode, run_episode
from .results import ResultsService
from .sweep import SweepResult, aggregate, episode_tasks, sweep

__all__ = ["Episode", "ResultsService", "SweepResult", "aggregate", "episode_tasks", "run_episode", "sweep"]
