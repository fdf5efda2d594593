"""Target-set planner F: observations x form x context -> theta, and its verifier.

The built-in planner is rule-based. An external planner can be attached as a
subprocess speaking one newline-terminated JSON document each way; any failure
of the exchange falls back to the built-in planner and is recorded.
"""

import json
import logging
import shlex
import subprocess
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional, Sequence

import numpy as np
from numpy.typing import NDArray

from .dynamics import GaussianBelief, LinearModel
from .errors import ContractViolation, ExternalPlannerError, InvalidTarget, PlannerError
from .recovery.opr import scan_horizons
from .recovery.plan import InputBounds
from .target_set import Strip, TargetForm, validate_params

logger = logging.getLogger(__name__)

DEFAULT_TIMEOUT = 10.0
DEFAULT_P_MIN = 0.8

NO_ADMISSIBLE_BAND = "no admissible band"
OUTSIDE_ENVELOPE = "outside envelope"
UNVERIFIABLE_DIRECTION = "unverifiable direction"
INFEASIBLE = "infeasible"
PLANNER_TIMEOUT = "planner timeout"
MALFORMED_RESPONSE = "malformed planner response"
NOT_CONFIGURED = "planner not configured"
FAILED_TO_START = "planner failed to start"

AXIS_TOLERANCE = 1e-12


@dataclass(frozen=True)
class PlannerContext:
    """Mission context: setpoint and safe altitude envelope in metres, desired band width."""

    setpoint: float = 10.0
    z_min: float = 0.0
    z_max: float = 50.0
    width: float = 1.0

    def __post_init__(self):
        if not self.z_min < self.z_max:
            raise ContractViolation(f"envelope must satisfy z_min < z_max (got [{self.z_min}, {self.z_max}])")
        if not self.width > 0:
            raise ContractViolation(f"band width must be > 0 (got {self.width})")


@dataclass(frozen=True, eq=False)
class PlannerInput:
    belief: GaussianBelief
    measurements: tuple[NDArray, ...]
    alarm_step: int
    context: PlannerContext = field(default_factory=PlannerContext)
    form: TargetForm = TargetForm.STRIP

    def __post_init__(self):
        if not self.measurements:
            raise ContractViolation("planner input needs at least one measurement")
        object.__setattr__(self, "form", TargetForm(self.form))


@dataclass(frozen=True)
class Verdict:
    safe: bool
    feasible: bool
    achievable_probability: float
    reasons: tuple[str, ...] = ()

    @property
    def accepted(self) -> bool:
        return self.safe and self.feasible


@dataclass(frozen=True)
class TargetProposal:
    """A target that passed validation and verification, with the fallback notes collected on the way."""

    strip: Strip
    verdict: Verdict
    source: str
    notes: tuple[str, ...] = ()


def plan_target(request: PlannerInput) -> dict[str, Any]:
    """Rule-based planner: a band of the requested width around the clamped setpoint."""
    if request.form != TargetForm.STRIP:
        raise PlannerError(f"unsupported form '{request.form.value}'")
    ctx = request.context
    half = ctx.width / 2.0
    lowest, highest = ctx.z_min + half, ctx.z_max - half
    if lowest > highest:
        raise PlannerError(NO_ADMISSIBLE_BAND)
    center = min(max(ctx.setpoint, lowest), highest)

    theta1 = [0.0] * request.belief.n
    theta1[0] = 1.0
    return {"theta1": theta1, "theta2": center - half, "theta3": center + half}


def altitude_band(strip: Strip) -> Optional[tuple[float, float]]:
    """Altitude band of an axis-aligned strip, None for any other direction."""
    direction = strip.theta1
    if np.any(np.abs(direction[1:]) > AXIS_TOLERANCE * strip.norm):
        return None
    a = float(direction[0])
    lo, hi = strip.theta2 / a, strip.theta3 / a
    return (lo, hi) if a > 0 else (hi, lo)


def verify_target(
    theta: Mapping[str, Any],
    model: LinearModel,
    b: GaussianBelief,
    bounds: InputBounds,
    k_max: int,
    p_min: float = DEFAULT_P_MIN,
    context: PlannerContext = PlannerContext(),
) -> Verdict:
    """Certify safety (band inside the envelope) and feasibility (OPR can reach p_min)."""
    try:
        strip = validate_params(TargetForm.STRIP, theta, model.n)
    except InvalidTarget as e:
        return Verdict(safe=False, feasible=False, achievable_probability=0.0, reasons=tuple(e.violations))

    reasons = []
    band = altitude_band(strip)
    if band is None:
        safe = False
        reasons.append(UNVERIFIABLE_DIRECTION)
    else:
        safe = context.z_min <= band[0] and band[1] <= context.z_max
        if not safe:
            reasons.append(OUTSIDE_ENVELOPE)

    achievable = scan_horizons(model, b, strip, bounds, k_max).best_probability
    feasible = achievable >= p_min
    if not feasible:
        reasons.append(INFEASIBLE)
    return Verdict(safe, feasible, achievable, tuple(reasons))


def request_document(request: PlannerInput) -> dict[str, Any]:
    ctx = request.context
    return {
        "belief": {"mean": request.belief.mean.tolist(), "cov": request.belief.cov.tolist()},
        "form": request.form.value,
        "context": {
            "setpoint": float(ctx.setpoint),
            "z_min": float(ctx.z_min),
            "z_max": float(ctx.z_max),
            "width": float(ctx.width),
        },
        "measurements": [np.asarray(y, dtype=float).tolist() for y in request.measurements],
        "alarm_step": int(request.alarm_step),
    }


def _parse_response(stdout: str) -> dict[str, Any]:
    lines = [line for line in stdout.splitlines() if line.strip()]
    if not lines:
        raise ExternalPlannerError(MALFORMED_RESPONSE, "empty output")
    try:
        response = json.loads(lines[0])
    except json.JSONDecodeError as e:
        raise ExternalPlannerError(MALFORMED_RESPONSE, str(e))
    if not isinstance(response, dict) or not {"theta1", "theta2", "theta3"} <= response.keys():
        raise ExternalPlannerError(MALFORMED_RESPONSE, "expected an object with theta1, theta2, theta3")
    return {key: response[key] for key in ("theta1", "theta2", "theta3")}


def external_plan_target(
    request: PlannerInput,
    command: Optional[Sequence[str] | str],
    timeout: float = DEFAULT_TIMEOUT,
) -> dict[str, Any]:
    """One request/response exchange with an external planner process."""
    if not command:
        raise ExternalPlannerError(NOT_CONFIGURED)
    args = shlex.split(command) if isinstance(command, str) else list(command)
    payload = json.dumps(request_document(request)) + "\n"
    try:
        result = subprocess.run(
            args,
            input=payload,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            text=True,
            timeout=timeout,
            check=False,
        )
    except subprocess.TimeoutExpired:
        raise ExternalPlannerError(PLANNER_TIMEOUT, f"no response within {timeout:g} s")
    except OSError as e:
        raise ExternalPlannerError(FAILED_TO_START, str(e))
    if result.returncode != 0:
        raise ExternalPlannerError(f"planner exited with code {result.returncode}", result.stderr.strip())
    return _parse_response(result.stdout)


def propose_target(
    request: PlannerInput,
    model: LinearModel,
    bounds: InputBounds,
    k_max: int,
    p_min: float = DEFAULT_P_MIN,
    command: Optional[Sequence[str] | str] = None,
    timeout: float = DEFAULT_TIMEOUT,
) -> TargetProposal:
    """Ask the configured planner for a target and return it only once it is validated and verified.

    External failures fall back to the rule-based planner with a note. Raises
    PlannerError when the rule-based candidate is rejected too.
    """
    notes: list[str] = []
    verify_args = (model, request.belief, bounds, k_max, p_min, request.context)

    if command:
        try:
            theta = external_plan_target(request, command, timeout)
            verdict = verify_target(theta, *verify_args)
            if verdict.accepted:
                strip = validate_params(TargetForm.STRIP, theta, model.n)
                return TargetProposal(strip, verdict, "external")
            findings = list(verdict.reasons)
        except ExternalPlannerError as e:
            findings = [e.reason]
        for finding in findings:
            notes.append(f"planner fallback: {finding}")
        logger.info("external planner rejected (%s); falling back to rule-based", ", ".join(findings))

    theta = plan_target(request)
    verdict = verify_target(theta, *verify_args)
    if not verdict.accepted:
        raise PlannerError(f"verifier rejected the target: {', '.join(verdict.reasons)}")
    strip = validate_params(TargetForm.STRIP, theta, model.n)
    return TargetProposal(strip, verdict, "rule-based", tuple(notes))
