"""Baseline recovery controllers: finite-horizon LQR and virtual sensors."""

from dataclasses import replace

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..dynamics import GaussianBelief, LinearModel, predict_belief
from ..errors import ContractViolation, NumericalError
from ..target_set import Strip
from .nominal import NominalController, nominal_control
from .opr import DEFAULT_P_TARGET
from .plan import InputBounds, PlanStatus, RecoveryPlan, build_plan

DEFAULT_LQR_STATE_COST = np.diag([10.0, 1.0])
DEFAULT_LQR_INPUT_COST = np.array([[0.1]])


def riccati_gains(A: NDArray, B: NDArray, Q_c: NDArray, R_c: NDArray, horizon: int) -> list[NDArray]:
    """Time-varying gains K_0..K_{N-1} of the finite-horizon LQR with terminal cost Q_c."""
    eigvals = np.linalg.eigvalsh(0.5 * (R_c + R_c.T))
    if eigvals[0] <= 0 or eigvals[-1] / eigvals[0] > 1e12:
        raise NumericalError(f"input cost R_c is singular (eigenvalues {eigvals.tolist()})")
    if np.linalg.eigvalsh(0.5 * (Q_c + Q_c.T))[0] < -1e-12:
        raise ContractViolation("state cost Q_c must be positive semidefinite")

    P = np.array(Q_c, dtype=float)
    gains: list[NDArray] = [np.empty(0)] * horizon
    for t in reversed(range(horizon)):
        K = np.linalg.solve(R_c + B.T @ P @ B, B.T @ P @ A)
        gains[t] = K
        P = Q_c + A.T @ P @ (A - B @ K)
        P = 0.5 * (P + P.T)
    return gains


def solve_rtr_lqr(
    model: LinearModel,
    b: GaussianBelief,
    s: Strip,
    horizon: int = 400,
    Q_c: ArrayLike = DEFAULT_LQR_STATE_COST,
    R_c: ArrayLike = DEFAULT_LQR_INPUT_COST,
    bounds: InputBounds = InputBounds.symmetric(5.0),
    p_target: float = DEFAULT_P_TARGET,
) -> RecoveryPlan:
    """LQR regulation of the belief mean to the strip center point, saturated and rolled out open loop."""
    if horizon < 1:
        raise ContractViolation(f"horizon must be >= 1 (got {horizon})")
    Q_c = np.atleast_2d(np.asarray(Q_c, dtype=float))
    R_c = np.atleast_2d(np.asarray(R_c, dtype=float))
    if Q_c.shape != (model.n, model.n) or R_c.shape != (model.m, model.m):
        raise ContractViolation(f"cost shapes {Q_c.shape}/{R_c.shape} do not match n={model.n}, m={model.m}")

    target = s.center_point()
    gains = riccati_gains(model.A, model.B, Q_c, R_c, horizon)
    mean = np.array(b.mean)
    controls = np.empty((horizon, model.m))
    for t, K in enumerate(gains):
        controls[t] = bounds.clip(-K @ (mean - target))
        mean = model.A @ mean + model.B @ controls[t]

    plan = build_plan(model, b, s, bounds, controls, PlanStatus.BEST_EFFORT)
    if plan.predicted_probability >= p_target:
        return replace(plan, status=PlanStatus.MET_TARGET_PROBABILITY)
    return plan


def virtual_sensor_control(
    model: LinearModel,
    b: GaussianBelief,
    ctrl: NominalController,
) -> tuple[NDArray, GaussianBelief]:
    """Nominal control on the model-predicted belief; no measurement is consumed."""
    if model.n != 2:
        raise ContractViolation(f"virtual sensors expect the 2-state drone model (got n={model.n})")
    u = nominal_control(ctrl, b)
    return u, predict_belief(model, b, u)
