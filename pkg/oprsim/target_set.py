"""Strip target sets: validation, membership, distance to center and terminal probability.

A strip is the region between two parallel hyperplanes,
T(theta) = {x | theta1' x >= theta2 and theta1' x <= theta3}.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Mapping

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import ndtr

from .dynamics import GaussianBelief
from .errors import ContractViolation, InvalidTarget

ZERO_DIRECTION = "zero direction"
EMPTY_STRIP = "empty strip"
NON_FINITE = "non-finite entries"
DIMENSION_MISMATCH = "dimension mismatch"
MALFORMED = "malformed parameters"


class TargetForm(str, Enum):
    STRIP = "strip"


@dataclass(frozen=True, eq=False)
class Strip:
    theta1: NDArray
    theta2: float
    theta3: float

    def __post_init__(self):
        theta1 = np.array(self.theta1, dtype=float).reshape(-1)
        theta1.setflags(write=False)
        object.__setattr__(self, "theta1", theta1)
        object.__setattr__(self, "theta2", float(self.theta2))
        object.__setattr__(self, "theta3", float(self.theta3))
        violations = _strip_violations(theta1, self.theta2, self.theta3)
        if violations:
            raise InvalidTarget(violations)

    @property
    def n(self) -> int:
        return self.theta1.size

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.theta1))

    @property
    def center(self) -> float:
        """Offset of the center hyperplane, (theta2 + theta3) / 2."""
        return 0.5 * (self.theta2 + self.theta3)

    def center_point(self) -> NDArray:
        """Point of the center hyperplane closest to the origin."""
        return self.theta1 * self.center / (self.norm**2)

    def to_params(self) -> dict[str, Any]:
        return {"theta1": self.theta1.tolist(), "theta2": self.theta2, "theta3": self.theta3}


def _strip_violations(theta1: NDArray, theta2: float, theta3: float) -> list[str]:
    violations = []
    finite = bool(np.all(np.isfinite(theta1)) and math.isfinite(theta2) and math.isfinite(theta3))
    if not finite:
        violations.append(NON_FINITE)
    if theta1.size == 0 or (finite and not np.linalg.norm(theta1) > 0):
        violations.append(ZERO_DIRECTION)
    if finite and theta2 > theta3:
        violations.append(EMPTY_STRIP)
    return violations


def _validate_strip(theta: Mapping[str, Any], n: int | None) -> Strip:
    try:
        theta1 = np.array(theta["theta1"], dtype=float).reshape(-1)
        theta2 = float(theta["theta2"])
        theta3 = float(theta["theta3"])
    except (KeyError, TypeError, ValueError):
        raise InvalidTarget([MALFORMED])

    violations = _strip_violations(theta1, theta2, theta3)
    if n is not None and theta1.size != n:
        violations.append(DIMENSION_MISMATCH)
    if violations:
        raise InvalidTarget(violations)
    return Strip(theta1, theta2, theta3)


_VALIDATORS: dict[TargetForm, Callable[[Mapping[str, Any], int | None], Strip]] = {
    TargetForm.STRIP: _validate_strip,
}


def validate_params(form: TargetForm | str, theta: Mapping[str, Any], n: int | None = None) -> Strip:
    """Membership test for the valid parameter set of `form`.

    Returns the constructed target set, or raises InvalidTarget listing every
    violated constraint. `n`, when given, is the expected state dimension.
    """
    try:
        form = TargetForm(form)
    except ValueError:
        raise InvalidTarget([f"unknown form '{form}'"])
    if not isinstance(theta, Mapping):
        raise InvalidTarget([MALFORMED])
    return _VALIDATORS[form](theta, n)


def _projection(s: Strip, x: ArrayLike) -> float:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != s.n:
        raise ContractViolation(f"dimension mismatch: state has length {x.size}, strip has {s.n}")
    return float(s.theta1 @ x)


def contains(s: Strip, x: ArrayLike) -> bool:
    value = _projection(s, x)
    return s.theta2 <= value <= s.theta3


def distance_to_center(s: Strip, x: ArrayLike) -> float:
    """|theta1' x - center| / |theta1|, in state units."""
    return abs(_projection(s, x) - s.center) / s.norm


def strip_probability(s: Strip, b: GaussianBelief) -> float:
    """P(theta2 <= theta1' x <= theta3) for x ~ N(mean, cov)."""
    if b.n != s.n:
        raise ContractViolation(f"dimension mismatch: belief has {b.n} states, strip has {s.n}")
    m = float(s.theta1 @ b.mean)
    variance = float(s.theta1 @ b.cov @ s.theta1)
    return band_probability(m, math.sqrt(max(variance, 0.0)), s.theta2, s.theta3)


def band_probability(m: float, std: float, lower: float, upper: float) -> float:
    """Mass of N(m, std^2) on [lower, upper]; indicator when std == 0."""
    if std <= 0.0:
        return 1.0 if lower <= m <= upper else 0.0
    upper_z = (upper - m) / std
    lower_z = (lower - m) / std
    # Use the tail on the same side as the band for accuracy far from the mean.
    if lower_z > 0:
        p = ndtr(-lower_z) - ndtr(-upper_z)
    else:
        p = ndtr(upper_z) - ndtr(lower_z)
    return float(min(1.0, max(0.0, p)))


def band_probabilities(m: ArrayLike, std: ArrayLike, lower: float, upper: float) -> NDArray:
    """band_probability over arrays of means and standard deviations."""
    m = np.asarray(m, dtype=float)
    std = np.asarray(std, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        upper_z = (upper - m) / std
        lower_z = (lower - m) / std
        p = np.where(lower_z > 0, ndtr(-lower_z) - ndtr(-upper_z), ndtr(upper_z) - ndtr(lower_z))
    indicator = ((lower <= m) & (m <= upper)).astype(float)
    return np.clip(np.where(std > 0, p, indicator), 0.0, 1.0)
