"""Recovery controllers: OPR (open and partially closed loop), RTR-LQR and virtual sensors."""

from .baselines import riccati_gains, solve_rtr_lqr, virtual_sensor_control
from .controllers import (
    CONTROLLERS,
    OprOpenLoop,
    OprPartiallyClosedLoop,
    RecoveryController,
    RecoverySettings,
    RtrLqr,
    VirtualSensors,
    make_controller,
)
from .nominal import NominalController, nominal_control
from .opr import HorizonScan, opr_pcl_step, pcl_replan, scan_horizons, solve_horizon, solve_opr_ol
from .plan import InputBounds, PlanStatus, RecoveryPlan, build_plan
from .solver import box_ls_solve, largest_eigenvalue

__all__ = [
    "CONTROLLERS",
    "HorizonScan",
    "InputBounds",
    "NominalController",
    "OprOpenLoop",
    "OprPartiallyClosedLoop",
    "PlanStatus",
    "RecoveryController",
    "RecoveryPlan",
    "RecoverySettings",
    "RtrLqr",
    "VirtualSensors",
    "box_ls_solve",
    "build_plan",
    "largest_eigenvalue",
    "make_controller",
    "nominal_control",
    "opr_pcl_step",
    "pcl_replan",
    "riccati_gains",
    "scan_horizons",
    "solve_horizon",
    "solve_opr_ol",
    "solve_rtr_lqr",
    "virtual_sensor_control",
]
