"""Input bounds and the recovery plan value type."""

from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..dynamics import GaussianBelief, LinearModel, rollout_belief
from ..errors import ContractViolation
from ..target_set import Strip, strip_probability

BOUNDS_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class InputBounds:
    """Per-channel actuator limits (m/s^2 for the default drone)."""

    u_min: NDArray
    u_max: NDArray

    def __post_init__(self):
        u_min = np.array(self.u_min, dtype=float).reshape(-1)
        u_max = np.array(self.u_max, dtype=float).reshape(-1)
        if u_min.shape != u_max.shape:
            raise ContractViolation(f"bounds differ in length ({u_min.size} vs {u_max.size})")
        if not (np.all(np.isfinite(u_min)) and np.all(np.isfinite(u_max))):
            raise ContractViolation("input bounds must be finite")
        if np.any(u_min > u_max):
            raise ContractViolation(f"u_min must not exceed u_max ({u_min.tolist()} > {u_max.tolist()})")
        u_min.setflags(write=False)
        u_max.setflags(write=False)
        object.__setattr__(self, "u_min", u_min)
        object.__setattr__(self, "u_max", u_max)

    @classmethod
    def symmetric(cls, limit: float, m: int = 1) -> "InputBounds":
        return cls(np.full(m, -abs(limit)), np.full(m, abs(limit)))

    @property
    def m(self) -> int:
        return self.u_min.size

    def clip(self, u: ArrayLike) -> NDArray:
        return np.clip(np.asarray(u, dtype=float).reshape(-1), self.u_min, self.u_max)

    def contains(self, u: ArrayLike) -> bool:
        u = np.asarray(u, dtype=float).reshape(-1)
        return bool(np.all(u >= self.u_min - BOUNDS_TOLERANCE) and np.all(u <= self.u_max + BOUNDS_TOLERANCE))

    def tile(self, k: int) -> tuple[NDArray, NDArray]:
        """Box for a stacked k-step control sequence."""
        return np.tile(self.u_min, k), np.tile(self.u_max, k)


class PlanStatus(str, Enum):
    MET_TARGET_PROBABILITY = "met_target_probability"
    BEST_EFFORT = "best_effort"


@dataclass(frozen=True, eq=False)
class RecoveryPlan:
    horizon: int
    controls: NDArray
    predicted_probability: float
    predicted_final_belief: GaussianBelief
    status: PlanStatus
    strip: Strip

    def control(self, index: int) -> NDArray:
        return self.controls[index]


def build_plan(
    model: LinearModel,
    b0: GaussianBelief,
    strip: Strip,
    bounds: InputBounds,
    controls: ArrayLike,
    status: PlanStatus,
) -> RecoveryPlan:
    """Roll the belief through `controls` and package the result."""
    controls = np.array(controls, dtype=float).reshape(-1, model.m)
    if bounds.m != model.m:
        raise ContractViolation(f"bounds have {bounds.m} channels, model has {model.m}")
    for u in controls:
        if not bounds.contains(u):
            raise ContractViolation(f"control {u.tolist()} outside bounds")
    final = rollout_belief(model, b0, controls)
    controls.setflags(write=False)
    return RecoveryPlan(
        horizon=len(controls),
        controls=controls,
        predicted_probability=strip_probability(strip, final),
        predicted_final_belief=final,
        status=status,
        strip=strip,
    )
