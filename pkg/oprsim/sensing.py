"""Noisy measurements and the GPS-spoofing attack on the measurement channel."""

from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .dynamics import LinearModel
from .errors import ContractViolation


class AttackKind(str, Enum):
    NONE = "none"
    BIAS = "bias"
    RAMP = "ramp"


@dataclass(frozen=True)
class AttackScenario:
    """Additive spoofing signal on one sensor, starting at `start_step`.

    A positive bias on gps_alt makes the vehicle believe it is higher than it is.
    """

    kind: AttackKind = AttackKind.BIAS
    target_sensor: int = 0
    start_step: int = 500
    magnitude: float = 3.0
    slope: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", AttackKind(self.kind))
        if self.kind == AttackKind.NONE:
            return
        if self.target_sensor < 0:
            raise ContractViolation(f"target_sensor must be >= 0 (got {self.target_sensor})")
        if self.start_step < 0:
            raise ContractViolation(f"start_step must be >= 0 (got {self.start_step})")
        if not (np.isfinite(self.magnitude) and np.isfinite(self.slope)):
            raise ContractViolation("attack magnitude and slope must be finite")

    def check_against(self, model: LinearModel) -> None:
        if self.kind != AttackKind.NONE and self.target_sensor >= model.p:
            raise ContractViolation(f"target_sensor {self.target_sensor} outside 0..{model.p - 1}")

    def is_active(self, step: int) -> bool:
        return self.kind != AttackKind.NONE and step >= self.start_step

    def signal(self, step: int) -> float:
        """Value added to the target sensor at `step` (0 when inactive)."""
        if not self.is_active(step):
            return 0.0
        if self.kind == AttackKind.BIAS:
            return float(self.magnitude)
        return float(self.slope) * (step - self.start_step)


NO_ATTACK = AttackScenario(kind=AttackKind.NONE)


def measure(model: LinearModel, x: ArrayLike, rng: np.random.Generator) -> NDArray:
    """y = C x + v with v ~ N(0, R); always consumes p standard normals."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != model.n:
        raise ContractViolation(f"dimension mismatch: state has length {x.size}, model has {model.n}")
    return model.C @ x + model.measurement_std * rng.standard_normal(model.p)


def apply_attack(scenario: AttackScenario, step: int, y: ArrayLike) -> NDArray:
    """Return a copy of `y` with the scheduled spoofing signal added to the target sensor."""
    if step < 0:
        raise ContractViolation(f"step must be >= 0 (got {step})")
    attacked = np.array(y, dtype=float)
    if scenario.is_active(step):
        attacked[scenario.target_sensor] += scenario.signal(step)
    return attacked
