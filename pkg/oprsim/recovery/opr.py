"""Optimal Probabilistic Recovery, open loop and partially closed loop.

For a linear system the terminal covariance at horizon k does not depend on
the controls, so the best achievable strip probability at k is obtained by
steering theta1' mean_k as close to the strip center as the input box allows.
The horizon scan therefore only needs the reachable interval of theta1' mean_k;
the selected horizon is then solved as a box-constrained least-squares problem.
"""

import logging
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.optimize import brentq

from ..dynamics import GaussianBelief, LinearModel, kalman_update, predict_belief
from ..errors import ContractViolation
from ..target_set import Strip, band_probabilities
from .plan import InputBounds, PlanStatus, RecoveryPlan, build_plan
from .solver import box_ls_solve

logger = logging.getLogger(__name__)

DEFAULT_P_TARGET = 0.95
DEFAULT_RHO = 1e-6
TIE_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class HorizonScan:
    """Per-horizon quantities; index i describes horizon k = i + 1."""

    probabilities: NDArray
    free_response: NDArray
    std: NDArray
    gains: NDArray  # gains[i] = theta1' A^i B, shape (k_max, m)

    @property
    def best_probability(self) -> float:
        return float(self.probabilities.max())

    def select(self, p_target: float) -> tuple[int, PlanStatus]:
        """Smallest horizon meeting p_target, else the smallest argmax."""
        met = np.flatnonzero(self.probabilities >= p_target)
        if met.size:
            return int(met[0]) + 1, PlanStatus.MET_TARGET_PROBABILITY
        best = self.best_probability
        k = int(np.flatnonzero(self.probabilities >= best - TIE_TOLERANCE)[0]) + 1
        return k, PlanStatus.BEST_EFFORT


def _direction_powers(A: NDArray, theta: NDArray, count: int) -> NDArray:
    """Rows theta' A^k for k = 0..count-1, doubling the block each pass."""
    rows = theta[np.newaxis, :]
    power = A
    while rows.shape[0] < count:
        rows = np.vstack([rows, rows @ power])
        power = power @ power
    return rows[:count]


def _quadratic_forms(rows: NDArray, M: NDArray) -> NDArray:
    return np.einsum("ij,jk,ik->i", rows, M, rows)


def scan_horizons(
    model: LinearModel,
    b0: GaussianBelief,
    s: Strip,
    bounds: InputBounds,
    k_max: int,
) -> HorizonScan:
    """Best strip probability for every horizon 1..k_max."""
    if k_max < 1:
        raise ContractViolation(f"K_max must be >= 1 (got {k_max})")
    if b0.n != model.n or s.n != model.n or bounds.m != model.m:
        raise ContractViolation("dimension mismatch between model, belief, strip and bounds")

    rows = _direction_powers(model.A, s.theta1, k_max + 1)
    gains = rows[:-1] @ model.B
    free = rows[1:] @ b0.mean
    # theta' Sigma_k theta = theta' A^k Sigma_0 A^k' theta + sum_{j<k} theta' A^j Q A^j' theta
    variance = _quadratic_forms(rows[1:], b0.cov) + np.cumsum(_quadratic_forms(rows[:-1], model.Q))
    std = np.sqrt(np.clip(variance, 0.0, None))

    lo = np.cumsum(np.sum(np.minimum(gains * bounds.u_min, gains * bounds.u_max), axis=1))
    hi = np.cumsum(np.sum(np.maximum(gains * bounds.u_min, gains * bounds.u_max), axis=1))
    best_mean = np.minimum(np.maximum(s.center, free + lo), free + hi)
    probabilities = band_probabilities(best_mean, std, s.theta2, s.theta3)

    return HorizonScan(probabilities, free, std, gains)


def _control_row(scan: HorizonScan, k: int) -> NDArray:
    """G with theta1' mean_k = free_k + G @ u for the stacked controls u_0..u_{k-1}."""
    return scan.gains[:k][::-1].reshape(-1)


def _multiplier_start(G: NDArray, d: float, reg: float, lower: NDArray, upper: NDArray) -> NDArray:
    """KKT point u = clip(lam G) of min |G u - d|^2 + reg |u|^2 over the box."""

    def excess(lam: float) -> float:
        return reg * lam + float(G @ np.clip(lam * G, lower, upper)) - d

    if reg <= 0.0:
        # Without regularisation the excess saturates; a target outside the
        # reachable interval is met by the saturated box corner.
        rest = np.clip(0.0, lower, upper)
        highest = np.where(G > 0, upper, np.where(G < 0, lower, rest))
        lowest = np.where(G > 0, lower, np.where(G < 0, upper, rest))
        if float(G @ highest) <= d:
            return highest
        if float(G @ lowest) >= d:
            return lowest

    a, b = -1.0, 1.0
    while excess(a) > 0:
        a *= 2.0
    while excess(b) < 0:
        b *= 2.0
    lam = brentq(excess, a, b, xtol=1e-14, rtol=1e-14, maxiter=500)
    return np.clip(lam * G, lower, upper)


def solve_horizon(
    scan: HorizonScan,
    s: Strip,
    bounds: InputBounds,
    k: int,
    rho: float = DEFAULT_RHO,
) -> NDArray:
    """Controls (k x m) placing theta1' mean_k on the strip center as closely as the box allows.

    Minimizes |G u - (c - free_k)|^2 + rho |G|^2 |u|^2 with box_ls_solve.
    """
    G = _control_row(scan, k)
    d = s.center - float(scan.free_response[k - 1])
    lower, upper = bounds.tile(k)
    gain = float(G @ G)
    if gain == 0.0:
        return np.clip(np.zeros(G.size), lower, upper).reshape(k, -1)

    reg = rho * gain
    H = 2.0 * (np.outer(G, G) + reg * np.eye(G.size))
    g = -2.0 * d * G
    start = _multiplier_start(G, d, reg, lower, upper)
    u = box_ls_solve(H, g, lower, upper, x0=start)
    return u.reshape(k, -1)


def solve_opr_ol(
    model: LinearModel,
    b0: GaussianBelief,
    s: Strip,
    bounds: InputBounds,
    k_max: int,
    p_target: float = DEFAULT_P_TARGET,
    rho: float = DEFAULT_RHO,
) -> RecoveryPlan:
    """Open-loop OPR: the fastest plan reaching p_target, else the most probable one."""
    scan = scan_horizons(model, b0, s, bounds, k_max)
    k, status = scan.select(p_target)
    controls = solve_horizon(scan, s, bounds, k, rho)
    plan = build_plan(model, b0, s, bounds, controls, status)
    logger.debug(
        "OPR plan: horizon %d, status %s, probability %.4f (scan best %.4f)",
        k, status.value, plan.predicted_probability, scan.best_probability,
    )
    return plan


def pcl_replan(
    model: LinearModel,
    b: GaussianBelief,
    s: Strip,
    bounds: InputBounds,
    trusted: Iterable[int],
    y: ArrayLike,
    remaining: int,
    p_target: float = DEFAULT_P_TARGET,
    rho: float = DEFAULT_RHO,
) -> tuple[RecoveryPlan, GaussianBelief]:
    """Update on the trusted sensors, then re-solve OPR with K_max = remaining."""
    if remaining < 1:
        raise ContractViolation(f"remaining steps must be >= 1 (got {remaining})")
    updated = kalman_update(model, b, y, trusted)
    return solve_opr_ol(model, updated, s, bounds, remaining, p_target, rho), updated


def opr_pcl_step(
    model: LinearModel,
    b: GaussianBelief,
    s: Strip,
    bounds: InputBounds,
    trusted: Iterable[int],
    y: ArrayLike,
    remaining: int,
    p_target: float = DEFAULT_P_TARGET,
    rho: float = DEFAULT_RHO,
) -> tuple[NDArray, GaussianBelief]:
    """One receding-horizon PCL step: first control of the new plan and the advanced belief."""
    plan, updated = pcl_replan(model, b, s, bounds, trusted, y, remaining, p_target, rho)
    u = plan.control(0)
    return u, predict_belief(model, updated, u)
