"""Episode-facing recovery controllers and their registry.

Each controller is started once from the re-propagated rollback belief and
then asked for one control per step until it reports completion.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field, replace
from typing import ClassVar, Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..dynamics import GaussianBelief, LinearModel, predict_belief
from ..errors import ContractViolation
from ..target_set import Strip
from .baselines import DEFAULT_LQR_INPUT_COST, DEFAULT_LQR_STATE_COST, solve_rtr_lqr, virtual_sensor_control
from .nominal import NominalController
from .opr import DEFAULT_P_TARGET, DEFAULT_RHO, pcl_replan, solve_opr_ol
from .plan import InputBounds, RecoveryPlan

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class RecoverySettings:
    """Solver constants shared by every controller of an episode."""

    bounds: InputBounds = field(default_factory=lambda: InputBounds.symmetric(5.0))
    p_target: float = DEFAULT_P_TARGET
    k_max: int = 500
    rho: float = DEFAULT_RHO
    horizon: int = 400
    Q_c: NDArray = field(default_factory=lambda: DEFAULT_LQR_STATE_COST)
    R_c: NDArray = field(default_factory=lambda: DEFAULT_LQR_INPUT_COST)
    trusted: tuple[int, ...] = (1,)
    nominal: NominalController = field(default_factory=NominalController)

    def __post_init__(self):
        if not 0.0 < self.p_target <= 1.0:
            raise ContractViolation(f"p_target must be in (0, 1] (got {self.p_target})")
        if self.k_max < 1 or self.horizon < 1:
            raise ContractViolation(f"K_max and horizon must be >= 1 (got {self.k_max}, {self.horizon})")
        if not self.rho > 0:
            raise ContractViolation(f"rho must be > 0 (got {self.rho})")


class RecoveryController(ABC):
    """Stateful wrapper around one recovery strategy."""

    name: ClassVar[str]

    def __init__(self, model: LinearModel, settings: RecoverySettings):
        self.model = model
        self.settings = settings
        self.belief: Optional[GaussianBelief] = None
        self.strip: Optional[Strip] = None
        self.plan: Optional[RecoveryPlan] = None
        self.steps_taken = 0

    def start(self, belief: GaussianBelief, strip: Strip) -> Optional[RecoveryPlan]:
        """Engage from `belief` (the current-step prior) towards `strip`."""
        self.belief = belief
        self.strip = strip
        self.steps_taken = 0
        self.plan = self._plan()
        if self.plan is not None:
            logger.info(
                "%s engaged: horizon %d, predicted probability %.4f (%s)",
                self.name, self.plan.horizon, self.plan.predicted_probability, self.plan.status.value,
            )
        return self.plan

    def act(self, y: ArrayLike) -> NDArray:
        """Control for the current step given this step's (attacked) measurement."""
        if self.belief is None:
            raise ContractViolation(f"{self.name} has not been started")
        if self.done:
            raise ContractViolation(f"{self.name} already completed its plan")
        u = self._next(np.asarray(y, dtype=float))
        if not self.settings.bounds.contains(u):
            raise ContractViolation(f"{self.name} emitted {u.tolist()} outside the input bounds")
        self.steps_taken += 1
        return u

    @property
    @abstractmethod
    def done(self) -> bool:
        ...

    @abstractmethod
    def _plan(self) -> Optional[RecoveryPlan]:
        ...

    @abstractmethod
    def _next(self, y: NDArray) -> NDArray:
        ...


class _OpenLoopPlayback(RecoveryController):
    """Plays a precomputed plan, advancing the belief by prediction only."""

    def _next(self, y: NDArray) -> NDArray:
        u = self.plan.control(self.steps_taken)
        self.belief = predict_belief(self.model, self.belief, u)
        return u

    @property
    def done(self) -> bool:
        return self.plan is not None and self.steps_taken >= self.plan.horizon


class OprOpenLoop(_OpenLoopPlayback):
    """OPR with every sensor distrusted."""

    name = "opr-ol"

    def _plan(self) -> RecoveryPlan:
        s = self.settings
        return solve_opr_ol(self.model, self.belief, self.strip, s.bounds, s.k_max, s.p_target, s.rho)


class RtrLqr(_OpenLoopPlayback):
    name = "rtr-lqr"

    def _plan(self) -> RecoveryPlan:
        s = self.settings
        return solve_rtr_lqr(self.model, self.belief, self.strip, s.horizon, s.Q_c, s.R_c, s.bounds, s.p_target)


class OprPartiallyClosedLoop(RecoveryController):
    """Receding-horizon OPR fed by the trusted sensors.

    The first solve fixes the deadline; each step re-solves over the steps left.
    """

    name = "opr-pcl"

    def __init__(self, model: LinearModel, settings: RecoverySettings):
        super().__init__(model, settings)
        self.deadline = 0
        self._last_horizon: Optional[int] = None

    def _plan(self) -> RecoveryPlan:
        s = self.settings
        plan = solve_opr_ol(self.model, self.belief, self.strip, s.bounds, s.k_max, s.p_target, s.rho)
        self.deadline = plan.horizon
        self._last_horizon = None
        return plan

    def _next(self, y: NDArray) -> NDArray:
        s = self.settings
        remaining = self.deadline - self.steps_taken
        plan, updated = pcl_replan(
            self.model, self.belief, self.strip, s.bounds, s.trusted, y, remaining, s.p_target, s.rho
        )
        u = plan.control(0)
        self.belief = predict_belief(self.model, updated, u)
        self._last_horizon = plan.horizon
        logger.debug("PCL step %d: re-solved horizon %d", self.steps_taken, plan.horizon)
        return u

    @property
    def done(self) -> bool:
        if self.plan is None:
            return False
        return self._last_horizon == 1 or self.steps_taken >= self.deadline


class VirtualSensors(RecoveryController):
    """Nominal control on model predictions, regulating to the strip center altitude."""

    name = "vs"

    def __init__(self, model: LinearModel, settings: RecoverySettings):
        super().__init__(model, settings)
        self.ctrl = settings.nominal

    def _plan(self) -> None:
        self.ctrl = replace(self.settings.nominal, z_ref=float(self.strip.center_point()[0]))
        return None

    def _next(self, y: NDArray) -> NDArray:
        u, self.belief = virtual_sensor_control(self.model, self.belief, self.ctrl)
        return u

    @property
    def done(self) -> bool:
        return self.belief is not None and self.steps_taken >= self.settings.horizon


CONTROLLERS: dict[str, type[RecoveryController]] = {
    cls.name: cls for cls in (OprOpenLoop, OprPartiallyClosedLoop, RtrLqr, VirtualSensors)
}


def make_controller(name: str, model: LinearModel, settings: RecoverySettings) -> RecoveryController:
    try:
        cls = CONTROLLERS[name]
    except KeyError:
        raise ContractViolation(f"unknown controller '{name}' (available: {', '.join(CONTROLLERS)})")
    return cls(model, settings)
