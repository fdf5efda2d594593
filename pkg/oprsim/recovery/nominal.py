"""Nominal PD altitude controller (the performance side of the simplex pair)."""

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from ..dynamics import GaussianBelief
from ..errors import ContractViolation
from .plan import InputBounds


@dataclass(frozen=True)
class NominalController:
    k_p: float = 2.0
    k_d: float = 2.0
    z_ref: float = 10.0
    bounds: InputBounds = field(default_factory=lambda: InputBounds.symmetric(5.0))

    def __post_init__(self):
        if self.k_p <= 0 or self.k_d <= 0:
            raise ContractViolation(f"gains must be positive (k_p={self.k_p}, k_d={self.k_d})")


def nominal_control(ctrl: NominalController, b: GaussianBelief) -> NDArray:
    """u = clamp(-k_p (z - z_ref) - k_d zdot) on the belief mean."""
    if b.n != 2:
        raise ContractViolation(f"nominal controller expects a 2-state belief (got {b.n})")
    z, zdot = b.mean
    u = -ctrl.k_p * (z - ctrl.z_ref) - ctrl.k_d * zdot
    return ctrl.bounds.clip(np.array([u]))
