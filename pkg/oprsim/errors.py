"""Exception hierarchy for oprsim."""


class OprSimError(Exception):
    """Base class for every error raised by oprsim."""


class ContractViolation(OprSimError, ValueError):
    """A precondition or value invariant was violated by the caller."""


class InvalidTarget(ContractViolation):
    """Target-set parameters outside the valid set; lists every finding."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__(", ".join(self.violations))


class NumericalError(OprSimError, ArithmeticError):
    """A numerical routine met a singular or indefinite matrix."""


class PlannerError(OprSimError):
    """The planner could not produce a target set."""


class ExternalPlannerError(PlannerError):
    """The external planner exchange failed; `reason` is the recorded finding."""

    def __init__(self, reason: str, detail: str = ""):
        self.reason = reason
        super().__init__(f"{reason}: {detail}" if detail else reason)


class UnrecoverableEpisode(OprSimError):
    """The episode cannot enter recovery (e.g. rollback buffer too short)."""


class ConfigError(OprSimError, ValueError):
    """Experiment configuration is invalid; lists every problem."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class CsvFormatError(OprSimError, ValueError):
    """A results CSV row could not be parsed."""

    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")
