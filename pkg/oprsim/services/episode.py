"""Episode service - runs one simplex episode from nominal flight through recovery."""

import logging
from collections import deque
from typing import Optional

import numpy as np

from ..config import ExperimentConfig
from ..detector import BeliefBuffer, DetectorState, cusum_step, residual, rollback_anchor
from ..dynamics import (
    GaussianBelief,
    Mode,
    Trajectory,
    kalman_update,
    predict_belief,
    rollout_belief,
    sample_process_noise,
    step_truth,
)
from ..errors import ContractViolation, PlannerError, UnrecoverableEpisode
from ..planner import PlannerInput, TargetProposal, altitude_band, plan_target, propose_target
from ..records import FAILED_PREFIX, RunRecord
from ..recovery.controllers import RecoveryController, make_controller
from ..recovery.nominal import nominal_control
from ..sensing import AttackKind, apply_attack, measure
from ..target_set import Strip, TargetForm, contains, distance_to_center, validate_params

logger = logging.getLogger(__name__)

MIN_DETECTOR_SCALE = 0.5


def episode_rng(seed: int, sigma: float) -> np.random.Generator:
    """Random source shared by every controller at (seed, sigma), so comparisons are paired."""
    if seed < 0:
        raise ContractViolation(f"seed must be >= 0 (got {seed})")
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(round(sigma * 1e6))]))


class Episode:
    """State machine: nominal -> attacked-undetected -> recovery."""

    def __init__(self, config: ExperimentConfig, controller: str, seed: int, sigma: float = 1.0):
        self.config = config
        self.controller_name = controller
        self.seed = seed
        self.sigma = float(sigma)

        self.model = config.build_model(sigma)
        self.scenario = config.attack_scenario()
        self.scenario.check_against(self.model)
        self.nominal = config.nominal_controller()
        self.settings = config.recovery_settings(self.model)
        self.controller: RecoveryController = make_controller(controller, self.model, self.settings)
        self.rng = episode_rng(seed, sigma)

        d = config.detector
        scale = max(self.sigma, MIN_DETECTOR_SCALE)
        self.detector = DetectorState(drift=d.drift * scale, threshold=d.threshold * scale)
        self.buffer = BeliefBuffer(d.buffer)
        self.history: deque[np.ndarray] = deque(maxlen=config.planner.history)
        self.applied: list[np.ndarray] = []

        setpoint = config.nominal.setpoint
        self.x = np.array([setpoint, 0.0])
        self.belief = GaussianBelief(self.x, self.model.C.T @ self.model.R @ self.model.C)
        self.mode = Mode.NOMINAL
        self.strip: Optional[Strip] = None
        self.reasons: list[str] = []
        self.failed = False
        self.traj = Trajectory(controller=controller)

    def _engage(self, step: int) -> None:
        """Roll back, re-propagate, plan and verify the target, then start the recovery controller."""
        anchor_step, anchor = rollback_anchor(self.buffer, step, self.config.detector.window)
        b = rollout_belief(self.model, anchor, self.applied[anchor_step:step])

        p = self.config.planner
        request = PlannerInput(b, tuple(self.history), step, self.config.planner_context(), TargetForm.STRIP)
        command = p.command if p.kind == "external" else None
        proposal: TargetProposal = propose_target(
            request, self.model, self.settings.bounds, self.settings.k_max, p.p_min, command, p.timeout
        )
        if not proposal.verdict.accepted:
            raise ContractViolation("recovery target was not verified safe and feasible")
        self.reasons.extend(proposal.notes)
        self.strip = proposal.strip
        self.traj.strip_band = altitude_band(self.strip)
        self.controller.start(b, self.strip)

    def _fail(self, step: int, error: Exception) -> None:
        self.failed = True
        self.reasons.append(f"{FAILED_PREFIX} {error}")
        logger.info("episode failed at step %d (%s, seed %d, sigma %g): %s",
                    step, self.controller_name, self.seed, self.sigma, error)

    def _reference_strip(self) -> Strip:
        """The rule-based target, used to score episodes that never planned one."""
        request = PlannerInput(self.belief, (self.model.C @ self.x,), -1, self.config.planner_context())
        return validate_params(TargetForm.STRIP, plan_target(request), self.model.n)

    def run(self) -> tuple[RunRecord, Trajectory]:
        all_sensors = range(self.model.p)
        monitored = self.config.detector.sensor
        last = self.config.sweep.episode_length - 1
        step = 0
        for step in range(self.config.sweep.episode_length):
            y_raw = measure(self.model, self.x, self.rng)
            y = apply_attack(self.scenario, step, y_raw)
            self.history.append(y)

            if self.mode != Mode.RECOVERY:
                self.buffer.push(step, self.belief)
                # An alarm raised by sample k switches control at step k + 1.
                if self.detector.fired:
                    self.mode = Mode.RECOVERY
                    try:
                        self._engage(step)
                    except (UnrecoverableEpisode, PlannerError) as e:
                        self._fail(step, e)
                        self.traj.append(step, self.x, np.full(self.model.m, np.nan), y_raw, y, self.mode)
                        break
                elif self.scenario.is_active(step):
                    self.mode = Mode.ATTACKED_UNDETECTED

            if self.mode == Mode.RECOVERY:
                u = self.controller.act(y)
            else:
                r = residual(self.model, self.belief, y, monitored)
                posterior = kalman_update(self.model, self.belief, y, all_sensors)
                u = nominal_control(self.nominal, posterior)
                self.belief = predict_belief(self.model, posterior, u)
                if step < last:
                    self.detector = cusum_step(self.detector, r, step + 1)

            self.traj.append(step, self.x, u, y_raw, y, self.mode)
            self.applied.append(u)
            self.x = step_truth(self.model, self.x, u, sample_process_noise(self.model, self.rng))
            if self.mode == Mode.RECOVERY and self.controller.done:
                step += 1
                break
        else:
            step = self.config.sweep.episode_length

        if not self.failed:
            nan = np.full(self.model.p, np.nan)
            self.traj.append(step, self.x, np.full(self.model.m, np.nan), nan, nan, self.mode)
        return self._record(), self.traj

    def _record(self) -> RunRecord:
        final = self.traj.final_state
        strip = self.strip
        if strip is None:
            try:
                strip = self._reference_strip()
            except PlannerError as e:
                self._fail(len(self.applied), e)
        if strip is not None and self.traj.strip_band is None:
            self.traj.strip_band = altitude_band(strip)

        if strip is None:
            # No band to score against: distance to the clamped setpoint.
            p = self.config.planner
            target = min(max(self.config.nominal.setpoint, p.z_min), p.z_max)
            distance = abs(float(final[0]) - target)
        else:
            distance = distance_to_center(strip, final)
        return RunRecord(
            seed=self.seed,
            sigma=self.sigma,
            controller=self.controller_name,
            attack_step=self.scenario.start_step if self.scenario.kind != AttackKind.NONE else None,
            alarm_step=self.detector.alarm_step,
            recovery_steps=self.controller.steps_taken,
            final_distance=distance,
            success=strip is not None and not self.failed and contains(strip, final),
            reasons=tuple(self.reasons),
        )


def run_episode(
    config: ExperimentConfig,
    controller: str,
    seed: int,
    sigma: float = 1.0,
) -> tuple[RunRecord, Trajectory]:
    """Run one episode; deterministic given (config, controller, seed, sigma).

    Rollback underflow and planner failures end the episode at the alarm as a
    failed, non-successful record instead of raising.
    """
    return Episode(config, controller, seed, sigma).run()
