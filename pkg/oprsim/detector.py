"""Innovation CUSUM detector and the belief buffer used to roll back before an attack."""

import logging
from collections import deque
from dataclasses import dataclass, replace
from typing import Optional

from numpy.typing import ArrayLike

from .dynamics import GaussianBelief, LinearModel
from .errors import ContractViolation, UnrecoverableEpisode

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DetectorState:
    """Nonparametric CUSUM on |residual|: S' = max(0, S + |r| - drift), alarm when S' > threshold."""

    drift: float
    threshold: float
    S: float = 0.0
    alarm_step: Optional[int] = None

    def __post_init__(self):
        if self.threshold <= 0:
            raise ContractViolation(f"threshold must be > 0 (got {self.threshold})")
        if self.drift < 0:
            raise ContractViolation(f"drift must be >= 0 (got {self.drift})")
        if self.S < 0:
            raise ContractViolation(f"CUSUM statistic must be >= 0 (got {self.S})")

    @property
    def fired(self) -> bool:
        return self.alarm_step is not None


def residual(model: LinearModel, b: GaussianBelief, y: ArrayLike, sensor: int) -> float:
    """r = y[sensor] - (C mean)[sensor], computed against the predicted belief."""
    if not 0 <= sensor < model.p:
        raise ContractViolation(f"sensor {sensor} outside 0..{model.p - 1}")
    return float(y[sensor] - model.C[sensor] @ b.mean)


def cusum_step(d: DetectorState, r: float, step: int) -> DetectorState:
    if d.fired:
        raise ContractViolation(f"detector already fired at step {d.alarm_step}")
    S = max(0.0, d.S + abs(r) - d.drift)
    if S > d.threshold:
        logger.info("CUSUM alarm at step %d (S=%.3f > %.3f)", step, S, d.threshold)
        return replace(d, S=S, alarm_step=step)
    return replace(d, S=S)


class BeliefBuffer:
    """Ring buffer of (step, belief) pairs with strictly increasing steps."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ContractViolation(f"buffer capacity must be >= 1 (got {capacity})")
        self.capacity = capacity
        self._entries: deque[tuple[int, GaussianBelief]] = deque(maxlen=capacity)

    def push(self, step: int, belief: GaussianBelief) -> None:
        if self._entries and step <= self._entries[-1][0]:
            raise ContractViolation(f"buffer steps must increase (got {step} after {self._entries[-1][0]})")
        self._entries.append((step, belief))

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self):
        return iter(self._entries)

    def __reversed__(self):
        return reversed(self._entries)

    @property
    def oldest_step(self) -> Optional[int]:
        return self._entries[0][0] if self._entries else None


def rollback_anchor(buf: BeliefBuffer, alarm_step: int, W: int) -> tuple[int, GaussianBelief]:
    """Newest buffered belief with step <= alarm_step - W."""
    if W < 0:
        raise ContractViolation(f"rollback window must be >= 0 (got {W})")
    cutoff = alarm_step - W
    for step, belief in reversed(buf):
        if step <= cutoff:
            logger.info("rollback anchor at step %d (alarm %d, window %d)", step, alarm_step, W)
            return step, belief
    raise UnrecoverableEpisode(
        f"rollback buffer too short: need an entry at or before step {cutoff}, "
        f"oldest is {buf.oldest_step}"
    )
