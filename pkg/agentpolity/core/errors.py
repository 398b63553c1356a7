"""Exception hierarchy for agentpolity."""

from typing import Any, List, Optional


class SimulationError(Exception):
    """Base class for every error raised by agentpolity."""


# Configuration

class ConfigError(SimulationError):
    """Scenario configuration could not be read or is invalid."""


class ScenarioFormatError(ConfigError):
    """A scenario file line could not be parsed."""

    def __init__(self, message: str, line_no: Optional[int] = None):
        self.line_no = line_no
        prefix = f"line {line_no}: " if line_no is not None else ""
        super().__init__(f"{prefix}{message}")


class ConfigViolation(ConfigError):
    """A single violated configuration invariant, naming the offending field."""

    code = "violation"

    def __init__(self, field: str, detail: str = ""):
        self.field = field
        self.detail = detail
        message = f"{self.code}({field})"
        if detail:
            message += f": {detail}"
        super().__init__(message)


class ZeroPopulation(ConfigViolation):
    code = "ZeroPopulation"


class NonPositiveParameter(ConfigViolation):
    code = "NonPositiveParameter"


class MissingOrchestrator(ConfigViolation):
    code = "MissingOrchestrator"


class ParameterOutOfRange(ConfigViolation):
    code = "ParameterOutOfRange"


class InvalidScenario(ConfigError):
    """Raised by validate_config with the complete list of violations."""

    def __init__(self, violations: List[ConfigViolation]):
        self.violations = list(violations)
        listing = "; ".join(str(v) for v in self.violations)
        super().__init__(f"{len(self.violations)} invalid setting(s): {listing}")


# Dynamics

class DynamicsError(SimulationError):
    pass


class NegativeDensity(DynamicsError):
    pass


class NonPositiveCOrg(DynamicsError):
    pass


class DeadAgent(DynamicsError):
    def __init__(self, agent_id: int):
        self.agent_id = agent_id
        super().__init__(f"agent {agent_id} is not alive")


# Organizations

class OrganizationError(SimulationError):
    pass


class DuplicateSingleton(OrganizationError):
    def __init__(self, kind: Any):
        self.kind = kind
        super().__init__(f"{kind} already exists in this simulation")


class IneligibleFounder(OrganizationError):
    def __init__(self, kind: Any, agent: int, reason: str = ""):
        self.kind = kind
        self.agent = agent
        message = f"agent {agent} cannot found {kind}"
        if reason:
            message += f" ({reason})"
        super().__init__(message)


class EmptyOrganization(OrganizationError):
    pass


class TierViolation(OrganizationError):
    """Abuse must flow down the hierarchy and challenges must flow up."""


# Governance

class GovernanceError(SimulationError):
    pass


class ObserverBallot(GovernanceError):
    pass


class DoubleVote(GovernanceError):
    pass


class IncompleteBallot(GovernanceError):
    pass


class NotProposed(GovernanceError):
    pass


class NotAdopted(GovernanceError):
    pass


# Economy

class EconomyError(SimulationError):
    pass


class UbcDisabled(EconomyError):
    pass


class InsufficientCookies(EconomyError):
    def __init__(self, agent_id: int, balance: float, amount: float):
        self.agent_id = agent_id
        self.balance = balance
        self.amount = amount
        super().__init__(f"agent {agent_id} holds {balance} cookies, needs {amount}")


# Engine

class EngineError(SimulationError):
    pass


class WindowTooShort(EngineError):
    pass


class EmptyWorkforce(EngineError):
    pass


class TickError(EngineError):
    """A module error raised while stepping, with the tick and phase it happened in."""

    def __init__(self, tick: int, phase: str, cause: Exception):
        self.tick = tick
        self.phase = phase
        self.cause = cause
        super().__init__(f"tick {tick}, phase {phase}: {type(cause).__name__}: {cause}")


# Artifacts and sweeps

class ReportError(SimulationError):
    pass


class MissingReport(ReportError):
    pass


class SweepError(SimulationError):
    pass


class InvalidSweep(SweepError):
    pass
