"""Linear plant model, ground-truth stepping and Gaussian belief propagation."""

import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import ContractViolation, NumericalError

logger = logging.getLogger(__name__)

PSD_TOLERANCE = 1e-9

# Length-n state vector; for the default drone [altitude m, vertical velocity m/s].
State = NDArray[np.float64]


def _frozen_matrix(value: ArrayLike, name: str) -> NDArray:
    arr = np.array(value, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1) if name == "B" else np.atleast_2d(arr)
    if arr.ndim != 2:
        raise ContractViolation(f"{name} must be a matrix (got shape {arr.shape})")
    arr.setflags(write=False)
    return arr


def _frozen_vector(value: ArrayLike, length: int, name: str) -> NDArray:
    arr = np.array(value, dtype=float).reshape(-1)
    if arr.shape != (length,):
        raise ContractViolation(f"dimension mismatch: {name} has length {arr.size}, expected {length}")
    return arr


def symmetrize(cov: NDArray) -> NDArray:
    """Return the symmetric part of `cov` with tiny negative eigenvalues clamped to zero."""
    cov = 0.5 * (cov + cov.T)
    if cov.size == 0:
        return cov
    try:
        np.linalg.cholesky(cov)
        return cov
    except np.linalg.LinAlgError:
        pass
    # Only singular or indefinite matrices reach the eigendecomposition.
    eigvals, eigvecs = np.linalg.eigh(cov)
    smallest = float(eigvals[0])
    if smallest < -PSD_TOLERANCE:
        raise NumericalError(f"covariance is not PSD (smallest eigenvalue {smallest:.3e})")
    if smallest < 0.0:
        cov = (eigvecs * np.clip(eigvals, 0.0, None)) @ eigvecs.T
        cov = 0.5 * (cov + cov.T)
    return cov


def _psd_factor(cov: NDArray) -> NDArray:
    """L with L @ L.T == cov, valid for singular PSD matrices."""
    eigvals, eigvecs = np.linalg.eigh(cov)
    return eigvecs * np.sqrt(np.clip(eigvals, 0.0, None))


@dataclass(frozen=True, eq=False)
class LinearModel:
    """Discrete-time linear system x' = A x + B u + w, y = C x + v."""

    A: NDArray
    B: NDArray
    C: NDArray
    Q: NDArray
    R: NDArray
    dt: float
    labels: tuple[str, ...] = ()
    _q_factor: NDArray = field(init=False, repr=False)

    def __post_init__(self):
        for name in ("A", "B", "C", "Q", "R"):
            object.__setattr__(self, name, _frozen_matrix(getattr(self, name), name))

        n = self.A.shape[0]
        problems = []
        if self.A.shape != (n, n):
            problems.append(f"A must be square (got {self.A.shape})")
        if self.B.shape[0] != n:
            problems.append(f"B must have {n} rows (got {self.B.shape[0]})")
        if self.C.shape[1] != n:
            problems.append(f"C must have {n} columns (got {self.C.shape[1]})")
        if self.Q.shape != (n, n):
            problems.append(f"Q must be {n}x{n} (got {self.Q.shape})")
        p = self.C.shape[0]
        if self.R.shape != (p, p):
            problems.append(f"R must be {p}x{p} (got {self.R.shape})")
        if problems:
            raise ContractViolation("dimension mismatch: " + "; ".join(problems))

        for name in ("Q", "R"):
            mat = getattr(self, name)
            if not np.allclose(mat, mat.T, atol=1e-12):
                raise ContractViolation(f"{name} must be symmetric")
            if np.linalg.eigvalsh(mat)[0] < -PSD_TOLERANCE:
                raise ContractViolation(f"{name} must be positive semidefinite")
        if np.count_nonzero(self.R - np.diag(np.diag(self.R))):
            raise ContractViolation("R must be diagonal")
        if not self.dt > 0:
            raise ContractViolation(f"dt must be positive (got {self.dt})")

        labels = tuple(self.labels) or tuple(f"sensor_{i}" for i in range(p))
        if len(labels) != p:
            raise ContractViolation(f"expected {p} sensor labels (got {len(labels)})")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "dt", float(self.dt))
        object.__setattr__(self, "_q_factor", _psd_factor(self.Q))

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @property
    def p(self) -> int:
        return self.C.shape[0]

    @property
    def process_noise_factor(self) -> NDArray:
        return self._q_factor

    @property
    def measurement_std(self) -> NDArray:
        return np.sqrt(np.diag(self.R))

    def scaled(self, multiplier: float) -> "LinearModel":
        """Copy with every noise standard deviation multiplied by `multiplier`."""
        if multiplier < 0 or not np.isfinite(multiplier):
            raise ContractViolation(f"noise multiplier must be finite and >= 0 (got {multiplier})")
        factor = float(multiplier) ** 2
        return replace(self, Q=self.Q * factor, R=self.R * factor)

    def sensor_index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ContractViolation(f"unknown sensor '{label}' (available: {', '.join(self.labels)})")


@dataclass(frozen=True, eq=False)
class GaussianBelief:
    """Mean and covariance of the state estimate."""

    mean: NDArray
    cov: NDArray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float).reshape(-1)
        cov = np.array(self.cov, dtype=float)
        if cov.shape != (mean.size, mean.size):
            raise ContractViolation(
                f"dimension mismatch: covariance {cov.shape} does not match mean of length {mean.size}"
            )
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
            raise ContractViolation("belief entries must be finite")
        cov = symmetrize(cov)
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def n(self) -> int:
        return self.mean.size

    @classmethod
    def certain(cls, mean: ArrayLike) -> "GaussianBelief":
        mean = np.array(mean, dtype=float).reshape(-1)
        return cls(mean, np.zeros((mean.size, mean.size)))


def _check_belief(model: LinearModel, b: GaussianBelief) -> None:
    if b.n != model.n:
        raise ContractViolation(f"dimension mismatch: belief has {b.n} states, model has {model.n}")


def step_truth(model: LinearModel, x: ArrayLike, u: ArrayLike, w: ArrayLike) -> State:
    """Advance the true state one step: x' = A x + B u + w."""
    x = _frozen_vector(x, model.n, "x")
    u = _frozen_vector(u, model.m, "u")
    w = _frozen_vector(w, model.n, "w")
    if not np.all(np.isfinite(x)):
        raise ContractViolation("state entries must be finite")
    return model.A @ x + model.B @ u + w


def sample_process_noise(model: LinearModel, rng: np.random.Generator) -> NDArray:
    """Draw w ~ N(0, Q); always consumes n standard normals so draw order is fixed."""
    return model.process_noise_factor @ rng.standard_normal(model.n)


def predict_belief(model: LinearModel, b: GaussianBelief, u: ArrayLike) -> GaussianBelief:
    """Prediction-only propagation: mean' = A mean + B u, cov' = A cov A' + Q."""
    _check_belief(model, b)
    u = _frozen_vector(u, model.m, "u")
    mean = model.A @ b.mean + model.B @ u
    cov = model.A @ b.cov @ model.A.T + model.Q
    return GaussianBelief(mean, cov)


def rollout_belief(model: LinearModel, b: GaussianBelief, controls: Iterable[ArrayLike]) -> GaussianBelief:
    """Apply predict_belief over a control sequence."""
    for u in controls:
        b = predict_belief(model, b, u)
    return b


def kalman_update(
    model: LinearModel,
    b: GaussianBelief,
    y: ArrayLike,
    trusted: Iterable[int],
) -> GaussianBelief:
    """Measurement update restricted to the trusted rows of C.

    Uses the Joseph form so the posterior stays PSD. A measured subspace
    that is already certain (C P C' = 0) leaves the belief unchanged.
    """
    _check_belief(model, b)
    idx = sorted(set(int(i) for i in trusted))
    if not idx:
        raise ContractViolation("trusted sensor set must not be empty")
    if idx[0] < 0 or idx[-1] >= model.p:
        raise ContractViolation(f"trusted sensors {idx} outside 0..{model.p - 1}")
    y = _frozen_vector(y, model.p, "y")

    C = model.C[idx]
    R = model.R[np.ix_(idx, idx)]
    projected = C @ b.cov @ C.T
    if not np.any(projected):
        return b

    S = projected + R
    try:
        if np.any(np.diag(S) <= 0.0):
            raise np.linalg.LinAlgError("zero innovation variance")
        K = np.linalg.solve(S, C @ b.cov).T
    except np.linalg.LinAlgError:
        labels = [model.labels[i] for i in idx]
        raise NumericalError(f"singular innovation covariance for sensors {labels}: S={S.tolist()}")

    innovation = y[idx] - C @ b.mean
    mean = b.mean + K @ innovation
    I_KC = np.eye(model.n) - K @ C
    cov = I_KC @ b.cov @ I_KC.T + K @ R @ K.T
    return GaussianBelief(mean, cov)


def build_default_drone_model(
    dt: float = 0.02,
    sigma_gps: float = 0.1,
    sigma_vel: float = 0.05,
    q_alt: float = 1e-6,
    q_vel: float = 1e-4,
) -> LinearModel:
    """Vertical double integrator driven by net acceleration, with GPS altitude and velocity sensors."""
    if not dt > 0:
        raise ContractViolation(f"dt must be positive (got {dt})")
    return LinearModel(
        A=[[1.0, dt], [0.0, 1.0]],
        B=[[dt * dt / 2.0], [dt]],
        C=np.eye(2),
        Q=np.diag([q_alt, q_vel]),
        R=np.diag([sigma_gps**2, sigma_vel**2]),
        dt=dt,
        labels=("gps_alt", "velocity"),
    )


class Mode(str, Enum):
    NOMINAL = "nominal"
    ATTACKED_UNDETECTED = "attacked-undetected"
    RECOVERY = "recovery"


MODE_ORDER = [Mode.NOMINAL, Mode.ATTACKED_UNDETECTED, Mode.RECOVERY]


@dataclass
class Trajectory:
    """Per-step record of one episode; all columns have equal length."""

    controller: str = ""
    steps: list[int] = field(default_factory=list)
    states: list[NDArray] = field(default_factory=list)
    inputs: list[NDArray] = field(default_factory=list)
    raw: list[NDArray] = field(default_factory=list)
    attacked: list[NDArray] = field(default_factory=list)
    modes: list[Mode] = field(default_factory=list)
    strip_band: Optional[tuple[float, float]] = None

    def append(
        self,
        step: int,
        state: ArrayLike,
        u: ArrayLike,
        raw: ArrayLike,
        attacked: ArrayLike,
        mode: Mode,
    ) -> None:
        if self.steps and step <= self.steps[-1]:
            raise ContractViolation(f"trajectory steps must increase (got {step} after {self.steps[-1]})")
        if self.modes and MODE_ORDER.index(mode) < MODE_ORDER.index(self.modes[-1]):
            raise ContractViolation(f"mode cannot go back from {self.modes[-1].value} to {mode.value}")
        self.steps.append(int(step))
        self.states.append(np.array(state, dtype=float))
        self.inputs.append(np.array(u, dtype=float).reshape(-1))
        self.raw.append(np.array(raw, dtype=float))
        self.attacked.append(np.array(attacked, dtype=float))
        self.modes.append(Mode(mode))

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def final_state(self) -> NDArray:
        return self.states[-1]

    def state_matrix(self) -> NDArray:
        return np.vstack(self.states) if self.states else np.empty((0, 0))

    def first_step_in(self, predicate, after: int = 0) -> Optional[int]:
        """First recorded step >= `after` whose true state satisfies `predicate`."""
        for step, state in zip(self.steps, self.states):
            if step >= after and predicate(state):
                return step
        return None
