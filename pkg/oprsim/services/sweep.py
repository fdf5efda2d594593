"""Sweep service - Monte-Carlo episodes over the noise grid, and their aggregation."""

import logging
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
from itertools import groupby
from typing import Callable, Iterable, Optional

import numpy as np

from ..config import ExperimentConfig
from ..records import Aggregate, RunRecord
from .episode import run_episode

logger = logging.getLogger(__name__)

# (sigma, controller, seed)
Task = tuple[float, str, int]


@dataclass
class SweepResult:
    records: list[RunRecord]
    aggregates: list[Aggregate]


def episode_tasks(config: ExperimentConfig) -> list[Task]:
    s = config.sweep
    seeds = range(s.base_seed, s.base_seed + s.seeds)
    return [
        (float(sigma), controller, seed)
        for sigma in s.noise
        for controller in config.recovery.controllers
        for seed in seeds
    ]


def _run_task(args: tuple[ExperimentConfig, Task]) -> RunRecord:
    config, (sigma, controller, seed) = args
    record, _ = run_episode(config, controller, seed, sigma)
    return record


def aggregate(records: Iterable[RunRecord]) -> list[Aggregate]:
    """Success rate and mean final distance per (sigma, controller); failed episodes count as non-success."""
    ordered = sorted(records, key=lambda r: r.sort_key)
    rows = []
    for (sigma, controller), group in groupby(ordered, key=lambda r: (r.sigma, r.controller)):
        group = list(group)
        # np.mean uses pairwise summation
        rows.append(
            Aggregate(
                sigma=sigma,
                controller=controller,
                episodes=len(group),
                success_rate=float(np.mean([r.success for r in group], dtype=np.float64)),
                mean_distance=float(np.mean([r.final_distance for r in group], dtype=np.float64)),
                mean_recovery_steps=float(np.mean([r.recovery_steps for r in group], dtype=np.float64)),
                failed=sum(1 for r in group if r.failed),
            )
        )
    return rows


def sweep(
    config: ExperimentConfig,
    workers: Optional[int] = None,
    progress: Optional[Callable[[int, int], None]] = None,
) -> SweepResult:
    """Run every (sigma, controller, seed) episode and aggregate.

    Output order and values do not depend on `workers`: records are sorted by
    (sigma, controller, seed) before aggregation.
    """
    workers = workers or config.sweep.workers
    tasks = episode_tasks(config)
    total = len(tasks)
    logger.info("sweep: %d episodes on %d worker(s)", total, workers)

    records: list[RunRecord] = []
    if workers <= 1:
        for task in tasks:
            records.append(_run_task((config, task)))
            if progress:
                progress(len(records), total)
    else:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            futures = [executor.submit(_run_task, (config, task)) for task in tasks]
            for future in as_completed(futures):
                records.append(future.result())
                if progress:
                    progress(len(records), total)

    records.sort(key=lambda r: r.sort_key)
    return SweepResult(records, aggregate(records))
