"""Tests for the target planner, the verifier and the external planner exchange."""

import json

import numpy as np
import pytest

from oprsim.dynamics import GaussianBelief
from oprsim.errors import ContractViolation, ExternalPlannerError, PlannerError
from oprsim.planner import (
    FAILED_TO_START,
    INFEASIBLE,
    MALFORMED_RESPONSE,
    NO_ADMISSIBLE_BAND,
    NOT_CONFIGURED,
    OUTSIDE_ENVELOPE,
    PLANNER_TIMEOUT,
    UNVERIFIABLE_DIRECTION,
    PlannerContext,
    PlannerInput,
    altitude_band,
    external_plan_target,
    plan_target,
    propose_target,
    request_document,
    verify_target,
)
from oprsim.recovery import InputBounds
from oprsim.target_set import EMPTY_STRIP, Strip

ECHO_RULE_BASED = """
request = json.loads(sys.stdin.readline())
c = request["context"]
half = c["width"] / 2
print(json.dumps({"theta1": [1.0, 0.0], "theta2": c["setpoint"] - half, "theta3": c["setpoint"] + half}))
"""


@pytest.fixture
def request_at_hover(hover_belief):
    return PlannerInput(hover_belief, (np.array([13.0, 0.0]),), 512)


@pytest.fixture
def loose_bounds():
    return InputBounds.symmetric(5.0)


class TestPlanTarget:
    """Test the rule-based planner."""

    def test_centered_band(self, request_at_hover):
        assert plan_target(request_at_hover) == {"theta1": [1.0, 0.0], "theta2": 9.5, "theta3": 10.5}

    def test_clamped_to_envelope_top(self, hover_belief):
        request = PlannerInput(hover_belief, (np.zeros(2),), 0, PlannerContext(setpoint=49.9))
        theta = plan_target(request)
        assert theta["theta2"] == pytest.approx(49.0)
        assert theta["theta3"] == pytest.approx(50.0)

    def test_no_admissible_band(self, hover_belief):
        request = PlannerInput(hover_belief, (np.zeros(2),), 0, PlannerContext(z_min=10.0, z_max=10.5))
        with pytest.raises(PlannerError, match=NO_ADMISSIBLE_BAND):
            plan_target(request)

    def test_needs_measurements(self, hover_belief):
        with pytest.raises(ContractViolation):
            PlannerInput(hover_belief, (), 0)

    def test_context_validation(self):
        with pytest.raises(ContractViolation):
            PlannerContext(z_min=5.0, z_max=5.0)
        with pytest.raises(ContractViolation):
            PlannerContext(width=0.0)


class TestVerifyTarget:
    """Test the safety and feasibility verdicts."""

    def test_safe_and_feasible(self, drone, hover_belief, loose_bounds):
        verdict = verify_target({"theta1": [1, 0], "theta2": 9.5, "theta3": 10.5}, drone, hover_belief, loose_bounds, 500)
        assert verdict.safe and verdict.feasible and verdict.accepted
        assert verdict.achievable_probability >= 0.95
        assert verdict.reasons == ()

    def test_outside_envelope(self, drone, hover_belief, loose_bounds):
        verdict = verify_target({"theta1": [1, 0], "theta2": 55, "theta3": 56}, drone, hover_belief, loose_bounds, 500)
        assert not verdict.safe
        assert verdict.feasible
        assert verdict.reasons == (OUTSIDE_ENVELOPE,)

    def test_zero_authority_is_infeasible(self, drone, loose_bounds):
        below = GaussianBelief([4.5, 0.0], drone.R)
        verdict = verify_target(
            {"theta1": [1, 0], "theta2": 9.5, "theta3": 10.5}, drone, below, InputBounds([0.0], [0.0]), 500
        )
        assert verdict.safe
        assert not verdict.feasible
        assert verdict.reasons == (INFEASIBLE,)

    def test_invalid_parameters(self, drone, hover_belief, loose_bounds):
        verdict = verify_target({"theta1": [1, 0], "theta2": 11, "theta3": 9}, drone, hover_belief, loose_bounds, 500)
        assert not verdict.accepted
        assert verdict.achievable_probability == 0.0
        assert verdict.reasons == (EMPTY_STRIP,)

    def test_tilted_strip_is_unverifiable(self, drone, hover_belief, loose_bounds):
        verdict = verify_target({"theta1": [1, 1], "theta2": 9.5, "theta3": 10.5}, drone, hover_belief, loose_bounds, 500)
        assert not verdict.safe
        assert UNVERIFIABLE_DIRECTION in verdict.reasons


class TestAltitudeBand:
    def test_axis_aligned(self, default_strip):
        assert altitude_band(default_strip) == (9.5, 10.5)

    def test_negative_direction(self):
        assert altitude_band(Strip([-2.0, 0.0], -21.0, -19.0)) == pytest.approx((9.5, 10.5))

    def test_tilted(self):
        assert altitude_band(Strip([1.0, 0.5], 9.5, 10.5)) is None


class TestRequestDocument:
    def test_wire_fields(self, request_at_hover):
        doc = request_document(request_at_hover)
        assert doc["form"] == "strip"
        assert doc["alarm_step"] == 512
        assert doc["measurements"] == [[13.0, 0.0]]
        assert doc["context"] == {"setpoint": 10.0, "z_min": 0.0, "z_max": 50.0, "width": 1.0}
        assert doc["belief"]["mean"] == [10.0, 0.0]
        json.dumps(doc)


class TestExternalPlanTarget:
    """Test one exchange with an external planner process."""

    def test_echo(self, request_at_hover, planner_script):
        theta = external_plan_target(request_at_hover, planner_script(ECHO_RULE_BASED))
        assert theta == plan_target(request_at_hover)

    def test_string_command(self, request_at_hover, planner_script):
        command = " ".join(f"'{part}'" for part in planner_script(ECHO_RULE_BASED))
        assert external_plan_target(request_at_hover, command)["theta2"] == 9.5

    def test_extra_keys_dropped(self, request_at_hover, planner_script):
        command = planner_script(
            'print(json.dumps({"theta1": [1, 0], "theta2": 1, "theta3": 2, "why": "x"}))\n'
        )
        assert set(external_plan_target(request_at_hover, command)) == {"theta1", "theta2", "theta3"}

    def test_timeout(self, request_at_hover, planner_script):
        command = planner_script("import time\ntime.sleep(5)\n")
        with pytest.raises(ExternalPlannerError) as exc:
            external_plan_target(request_at_hover, command, timeout=0.5)
        assert exc.value.reason == PLANNER_TIMEOUT

    @pytest.mark.parametrize("body", ['print("not json")\n', "print(json.dumps([1, 2]))\n", "pass\n"])
    def test_malformed(self, request_at_hover, planner_script, body):
        with pytest.raises(ExternalPlannerError) as exc:
            external_plan_target(request_at_hover, planner_script(body))
        assert exc.value.reason == MALFORMED_RESPONSE

    def test_non_zero_exit(self, request_at_hover, planner_script):
        with pytest.raises(ExternalPlannerError) as exc:
            external_plan_target(request_at_hover, planner_script("sys.exit(3)\n"))
        assert exc.value.reason == "planner exited with code 3"

    def test_not_configured(self, request_at_hover):
        with pytest.raises(ExternalPlannerError) as exc:
            external_plan_target(request_at_hover, None)
        assert exc.value.reason == NOT_CONFIGURED

    def test_missing_executable(self, request_at_hover, temp_dir):
        with pytest.raises(ExternalPlannerError) as exc:
            external_plan_target(request_at_hover, [str(temp_dir / "no-such-planner")])
        assert exc.value.reason == FAILED_TO_START


class TestProposeTarget:
    """Test planner selection, verification and fallback."""

    def test_rule_based(self, drone, request_at_hover, loose_bounds):
        proposal = propose_target(request_at_hover, drone, loose_bounds, 500)
        assert proposal.source == "rule-based"
        assert proposal.notes == ()
        assert (proposal.strip.theta2, proposal.strip.theta3) == (9.5, 10.5)

    def test_external_accepted(self, drone, request_at_hover, loose_bounds, planner_script):
        proposal = propose_target(request_at_hover, drone, loose_bounds, 500, command=planner_script(ECHO_RULE_BASED))
        assert proposal.source == "external"
        assert proposal.notes == ()

    def test_fallback_on_empty_strip(self, drone, request_at_hover, loose_bounds, planner_script):
        command = planner_script('print(json.dumps({"theta1": [1, 0], "theta2": 11, "theta3": 9}))\n')
        proposal = propose_target(request_at_hover, drone, loose_bounds, 500, command=command)
        assert proposal.source == "rule-based"
        assert proposal.notes == (f"planner fallback: {EMPTY_STRIP}",)

    def test_fallback_on_unsafe_target(self, drone, request_at_hover, loose_bounds, planner_script):
        command = planner_script('print(json.dumps({"theta1": [1, 0], "theta2": 60, "theta3": 61}))\n')
        proposal = propose_target(request_at_hover, drone, loose_bounds, 500, command=command)
        assert proposal.notes == (f"planner fallback: {OUTSIDE_ENVELOPE}",)

    def test_fallback_on_timeout(self, drone, request_at_hover, loose_bounds, planner_script):
        command = planner_script("import time\ntime.sleep(5)\n")
        proposal = propose_target(request_at_hover, drone, loose_bounds, 500, command=command, timeout=0.5)
        assert proposal.source == "rule-based"
        assert proposal.notes == (f"planner fallback: {PLANNER_TIMEOUT}",)

    def test_fallback_on_malformed(self, drone, request_at_hover, loose_bounds, planner_script):
        proposal = propose_target(request_at_hover, drone, loose_bounds, 500, command=planner_script("print('{')\n"))
        assert proposal.notes == (f"planner fallback: {MALFORMED_RESPONSE}",)

    def test_rule_based_rejected(self, drone, loose_bounds):
        far = PlannerInput(GaussianBelief([2.0, 0.0], drone.R), (np.zeros(2),), 0)
        with pytest.raises(PlannerError, match="verifier rejected"):
            propose_target(far, drone, InputBounds([0.0], [0.0]), 500)
