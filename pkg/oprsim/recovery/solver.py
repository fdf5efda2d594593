"""Projected-gradient solver for box-constrained convex quadratics."""

import logging
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..errors import ContractViolation, NumericalError

logger = logging.getLogger(__name__)

POWER_ITERATIONS = 200
STEP_MARGIN = 1.01


def largest_eigenvalue(H: NDArray, iterations: int = POWER_ITERATIONS) -> float:
    """Power-iteration estimate of the largest eigenvalue magnitude of symmetric H."""
    k = H.shape[0]
    v = np.random.default_rng(0).standard_normal(k)
    v /= np.linalg.norm(v)
    estimate = 0.0
    for _ in range(iterations):
        w = H @ v
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        v = w / norm
        rayleigh = abs(float(v @ H @ v))
        if abs(rayleigh - estimate) <= 1e-12 * max(1.0, rayleigh):
            return rayleigh
        estimate = rayleigh
    return estimate


def box_ls_solve(
    H: ArrayLike,
    g: ArrayLike,
    lower: ArrayLike,
    upper: ArrayLike,
    tol: float = 1e-8,
    max_iter: int = 5000,
    x0: Optional[ArrayLike] = None,
) -> NDArray:
    """Approximate minimizer of 0.5 x'Hx + g'x over lower <= x <= upper.

    Projected gradient with step 1/L, L the largest eigenvalue of H. Stops when
    the projected-gradient norm is <= tol or after max_iter iterations. The
    returned point is always inside the box.
    """
    H = np.asarray(H, dtype=float)
    g = np.asarray(g, dtype=float).reshape(-1)
    lower = np.asarray(lower, dtype=float).reshape(-1)
    upper = np.asarray(upper, dtype=float).reshape(-1)
    k = g.size
    if H.shape != (k, k) or lower.size != k or upper.size != k:
        raise ContractViolation(f"dimension mismatch: H {H.shape}, g {k}, box {lower.size}/{upper.size}")
    if np.any(lower > upper):
        raise ContractViolation("box is empty (lower > upper)")

    L = largest_eigenvalue(H)
    if L == 0.0:
        # Linear objective: each coordinate goes to the bound opposite its gradient.
        return np.where(g > 0, lower, np.where(g < 0, upper, np.clip(0.0, lower, upper)))
    step = 1.0 / (STEP_MARGIN * L)
    curvature_floor = -1e-10 * L

    x = np.clip(np.zeros(k) if x0 is None else np.asarray(x0, dtype=float).reshape(-1), lower, upper)
    for iteration in range(max_iter):
        grad = H @ x + g
        if np.linalg.norm(x - np.clip(x - grad, lower, upper)) <= tol:
            logger.debug("box_ls_solve converged in %d iterations (k=%d)", iteration, k)
            return x
        x_next = np.clip(x - step * grad, lower, upper)
        d = x_next - x
        dd = float(d @ d)
        if dd > 0 and float(d @ H @ d) < curvature_floor * dd:
            raise NumericalError("negative curvature along the iterate direction: H is not PSD")
        x = x_next
    logger.debug("box_ls_solve stopped at max_iter=%d (k=%d)", max_iter, k)
    return x
