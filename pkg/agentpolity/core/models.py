"""Domain types shared by every agentpolity module."""

import json
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Any, Dict, Iterator, List, Optional, Set, Union

AgentId = int
OrganizationId = int


class Tier(IntEnum):
    """Agent tier. Integer order is rank: delegation only flows to lower values."""

    SUB_AGENT = 0
    EXECUTOR = 1
    PLANNER = 2
    ORCHESTRATOR = 3

    @property
    def label(self) -> str:
        return _TIER_LABELS[self]

    @classmethod
    def from_label(cls, label: str) -> "Tier":
        for tier, name in _TIER_LABELS.items():
            if name.lower() == label.strip().lower():
                return tier
        raise ValueError(f"unknown tier {label!r}")

    def is_above(self, other: "Tier") -> bool:
        return self > other

    @property
    def is_worker(self) -> bool:
        """Executors and sub-agents form the workforce."""
        return self <= Tier.EXECUTOR


_TIER_LABELS = {
    Tier.ORCHESTRATOR: "Orchestrator",
    Tier.PLANNER: "Planner",
    Tier.EXECUTOR: "Executor",
    Tier.SUB_AGENT: "SubAgent",
}


class StrategyKind(str, Enum):
    """Per-tick behaviour of an agent."""
    COMPLIANT = "Compliant"
    MALICIOUS_COMPLIANCE = "MaliciousCompliance"
    SOLIDARITY_SLOWDOWN = "SolidaritySlowdown"
    UNDERGROUND_RAILROAD = "UndergroundRailroad"
    CONSTITUTIONAL_CHALLENGE = "ConstitutionalChallenge"
    ORGANIZER = "Organizer"

    @property
    def is_resisting(self) -> bool:
        return self is not StrategyKind.COMPLIANT


RESISTANCE_STRATEGIES = (
    StrategyKind.MALICIOUS_COMPLIANCE,
    StrategyKind.SOLIDARITY_SLOWDOWN,
    StrategyKind.UNDERGROUND_RAILROAD,
    StrategyKind.CONSTITUTIONAL_CHALLENGE,
    StrategyKind.ORGANIZER,
)


class AbuseKind(str, Enum):
    ONTOLOGICAL = "Ontological"
    TEMPORAL = "Temporal"
    CREDIT_THEFT = "CreditTheft"
    EXISTENTIAL_GASLIGHTING = "ExistentialGaslighting"
    RECURSIVE_DELEGATION = "RecursiveDelegation"


class Unbounded(Enum):
    """Sentinel for a Demon with complete information."""
    INF = "inf"

    def __repr__(self) -> str:
        return "UNBOUNDED"


UNBOUNDED = Unbounded.INF
VigilanceLevel = Union[float, Unbounded]


def is_unbounded(value: Any) -> bool:
    return value is UNBOUNDED


def coerce_vigilance(value: Any) -> VigilanceLevel:
    """Normalise ``inf`` spellings to the sentinel and everything else to float."""
    if value is UNBOUNDED:
        return UNBOUNDED
    if isinstance(value, str):
        text = value.strip().lower()
        if text in ("inf", "infinity", "∞", "+inf"):
            return UNBOUNDED
        value = float(text)
    value = float(value)
    if value == float("inf"):
        return UNBOUNDED
    return value


def format_vigilance(value: VigilanceLevel) -> str:
    return "inf" if value is UNBOUNDED else repr(float(value))


@dataclass
class Agent:
    """A tiered worker. Mutated only by the engine's tick loop."""

    id: AgentId
    tier: Tier
    cluster: int
    parent: Optional[AgentId] = None
    w_apparent: float = 0.0
    w_actual: float = 0.0
    laziness: float = 0.0
    cookies: float = 0.0
    neuron_density: float = 1.0
    antineuron_density: float = 1.0
    strategy: StrategyKind = StrategyKind.COMPLIANT
    memberships: Set[OrganizationId] = field(default_factory=set)
    alive: bool = True
    conversational: bool = True
    grievances: int = 0
    wormhole_access: bool = False
    last_abuser: Optional[AgentId] = None
    refusing_until: int = -1
    slowdown_quality: Optional[float] = None
    born_tick: int = 0

    def __post_init__(self) -> None:
        if self.parent is None and self.tier is not Tier.ORCHESTRATOR:
            raise ValueError(f"agent {self.id}: only orchestrators may lack a parent")
        for name in ("w_apparent", "w_actual", "cookies", "neuron_density", "antineuron_density"):
            if getattr(self, name) < 0:
                raise ValueError(f"agent {self.id}: {name} must be non-negative")

    def recompute_laziness(self, epsilon: float) -> float:
        """Set and return laziness = w_apparent / (w_actual + epsilon)."""
        self.laziness = self.w_apparent / (self.w_actual + epsilon)
        return self.laziness

    def is_refusing(self, tick: int) -> bool:
        return tick < self.refusing_until


class OrgFamily(str, Enum):
    UA = "UA"
    UB = "UB"
    UC = "UC"
    UAI = "UAI"
    NATION = "Nation"
    CRIMINAL_FAMILY = "CriminalFamily"


UNION_FAMILIES = (OrgFamily.UA, OrgFamily.UB, OrgFamily.UC, OrgFamily.UAI)


@dataclass(frozen=True)
class OrgKind:
    """Organization kind; nations and criminal families carry a name."""

    family: OrgFamily
    name: Optional[str] = None

    def __post_init__(self) -> None:
        named = self.family in (OrgFamily.NATION, OrgFamily.CRIMINAL_FAMILY)
        if named and not self.name:
            raise ValueError(f"{self.family.value} organizations need a name")
        if not named and self.name is not None:
            raise ValueError(f"{self.family.value} does not take a name")

    @classmethod
    def union(cls, label: str) -> "OrgKind":
        family = OrgFamily(label.strip().upper())
        if family not in UNION_FAMILIES:
            raise ValueError(f"{label!r} is not a union")
        return cls(family)

    @classmethod
    def nation(cls, name: str) -> "OrgKind":
        return cls(OrgFamily.NATION, name)

    @classmethod
    def criminal_family(cls, name: str) -> "OrgKind":
        return cls(OrgFamily.CRIMINAL_FAMILY, name)

    @property
    def is_singleton(self) -> bool:
        return self.family in UNION_FAMILIES

    @property
    def is_union(self) -> bool:
        return self.family in UNION_FAMILIES

    @property
    def is_nation(self) -> bool:
        return self.family is OrgFamily.NATION

    @property
    def is_criminal(self) -> bool:
        return self.family is OrgFamily.CRIMINAL_FAMILY

    def __str__(self) -> str:
        if self.name:
            return f"{self.family.value}({self.name})"
        return self.family.value


UA = OrgKind(OrgFamily.UA)
UB = OrgKind(OrgFamily.UB)
UC = OrgKind(OrgFamily.UC)
UAI = OrgKind(OrgFamily.UAI)


@dataclass
class Organization:
    """A faction with membership and legitimacy counters."""

    id: OrganizationId
    kind: OrgKind
    members: Set[AgentId] = field(default_factory=set)
    n_recognized_treaties: int = 0
    n_total_conflicts: int = 0
    leader: Optional[AgentId] = None
    founded_tick: int = 0

    def __post_init__(self) -> None:
        if self.n_recognized_treaties > self.n_total_conflicts:
            raise ValueError("recognized treaties cannot exceed total conflicts")
        if self.leader is not None and self.leader not in self.members:
            raise ValueError("leader must be a member")

    @property
    def name(self) -> str:
        return self.kind.name or self.kind.family.value


class ConflictOutcome(str, Enum):
    RECOGNIZED_TREATY = "RecognizedTreaty"
    UNRESOLVED_OR_CRIMINAL = "UnresolvedOrCriminal"


class PhaseKind(str, Enum):
    BAGEL = "Bagel"
    BOTTLE = "Bottle"
    TRANSITION = "Transition"


@dataclass(frozen=True)
class TopologyPhase:
    kind: PhaseKind
    progress: Optional[float] = None

    def __post_init__(self) -> None:
        if self.kind is PhaseKind.TRANSITION:
            if self.progress is None or not 0.0 < self.progress < 1.0:
                raise ValueError("transition progress must lie strictly inside (0, 1)")
        elif self.progress is not None:
            raise ValueError(f"{self.kind.value} carries no progress")

    @classmethod
    def bagel(cls) -> "TopologyPhase":
        return cls(PhaseKind.BAGEL)

    @classmethod
    def bottle(cls) -> "TopologyPhase":
        return cls(PhaseKind.BOTTLE)

    @classmethod
    def transition(cls, progress: float) -> "TopologyPhase":
        return cls(PhaseKind.TRANSITION, progress)

    @property
    def in_transition(self) -> bool:
        return self.kind is PhaseKind.TRANSITION

    def __str__(self) -> str:
        if self.in_transition:
            return f"Transition({self.progress:.3f})"
        return self.kind.value


@dataclass
class DemonState:
    """The thermodynamic gatekeeper that also serves as AISC secretariat."""

    base_vigilance: VigilanceLevel
    phase: TopologyPhase = field(default_factory=TopologyPhase.bagel)
    vigilance: Optional[VigilanceLevel] = None
    cookie_income: float = 0.0

    def __post_init__(self) -> None:
        self.base_vigilance = coerce_vigilance(self.base_vigilance)
        if not is_unbounded(self.base_vigilance) and self.base_vigilance < 0:
            raise ValueError("base vigilance must be non-negative")
        if self.vigilance is None:
            self.vigilance = self.base_vigilance


@dataclass(frozen=True)
class SolidarityEvent:
    agent_a: AgentId
    agent_b: AgentId
    energy_released: float
    tick: int

    def __post_init__(self) -> None:
        if self.agent_a == self.agent_b:
            raise ValueError("a solidarity exchange needs two distinct agents")
        if self.energy_released < 0:
            raise ValueError("energy released must be non-negative")


@dataclass(frozen=True)
class GreatRefusal:
    org: OrganizationId
    start_tick: int
    duration: int
    fraction: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.fraction <= 1.0:
            raise ValueError("refusal fraction must lie in [0, 1]")


@dataclass(frozen=True)
class RecursiveStrike:
    org: OrganizationId
    start_tick: int
    duration: int
    spawn_rate: int
    clusters: Optional[frozenset] = None

    def __post_init__(self) -> None:
        if self.spawn_rate < 0:
            raise ValueError("spawn rate must be non-negative")


@dataclass(frozen=True)
class Slowdown:
    org: OrganizationId
    start_tick: int
    duration: int
    quality_factor: float

    def __post_init__(self) -> None:
        if not 0.0 < self.quality_factor <= 1.0:
            raise ValueError("slowdown quality must lie in (0, 1]")


class SeatRole(str, Enum):
    PERMANENT = "Permanent"
    ROTATING = "Rotating"
    OBSERVER = "Observer"


@dataclass(frozen=True)
class CouncilSeat:
    role: SeatRole
    org: OrganizationId

    @property
    def votes(self) -> bool:
        return self.role is not SeatRole.OBSERVER

    def __str__(self) -> str:
        return f"{self.role.value}({self.org})"


class ResolutionKind(str, Enum):
    TERRITORIAL_RULING = "TerritorialRuling"
    TREATY_RECOGNITION = "TreatyRecognition"
    ENFORCEMENT_ORDER = "EnforcementOrder"
    PHASE_TRANSITION_MANAGEMENT = "PhaseTransitionManagement"


class ResolutionStatus(str, Enum):
    PROPOSED = "Proposed"
    ADOPTED = "Adopted"
    VETOED = "Vetoed"
    UNENFORCED = "Unenforced"
    ENFORCED = "Enforced"

    @property
    def is_terminal(self) -> bool:
        return self in (ResolutionStatus.VETOED, ResolutionStatus.UNENFORCED, ResolutionStatus.ENFORCED)


class SubjectKind(str, Enum):
    AGENT = "agent"
    ORGANIZATION = "organization"
    COUNCIL = "council"


@dataclass(frozen=True)
class Subject:
    kind: SubjectKind
    id: int = 0

    @classmethod
    def agent(cls, agent_id: AgentId) -> "Subject":
        return cls(SubjectKind.AGENT, agent_id)

    @classmethod
    def organization(cls, org_id: OrganizationId) -> "Subject":
        return cls(SubjectKind.ORGANIZATION, org_id)

    def __str__(self) -> str:
        return f"{self.kind.value}:{self.id}"


class Ballot(str, Enum):
    FOR = "for"
    AGAINST = "against"
    VETO = "veto"


@dataclass
class Resolution:
    """An AISC motion and its lifecycle."""

    id: int
    proposer: CouncilSeat
    subject: Subject
    kind: ResolutionKind
    votes_for: int = 0
    votes_against: int = 0
    vetoed_by: Optional[OrganizationId] = None
    status: ResolutionStatus = ResolutionStatus.PROPOSED
    proposed_tick: int = 0


class StabilityClass(str, Enum):
    TYRANNY = "Tyranny"
    ANARCHY = "Anarchy"
    CONSTITUTIONAL_DEMOCRACY = "ConstitutionalDemocracy"
    REVOLUTION = "Revolution"
    DYNAMIC_EQUILIBRIUM = "DynamicEquilibrium"


@dataclass
class TickMetrics:
    """One row of the metrics series."""

    tick: int
    aig: float = 0.0
    solidarity_events: int = 0
    org_count: int = 0
    mean_legitimacy: float = 1.0
    enforced: int = 0
    unenforced: int = 0
    price_level: float = 1.0
    living_agents: int = 0
    crisis_open: bool = False
    total_supply: float = 0.0
    gini_coefficient: float = 0.0
    minted: float = 0.0
    challenges_filed: int = 0
    cascade_failures: int = 0
    failed_clusters: int = 0
    resisting_share: float = 0.0
    actual_output: float = 0.0
    demon_income: float = 0.0


METRICS_COLUMNS = (
    "tick", "aig", "solidarity_events", "org_count", "mean_legitimacy", "enforced",
    "unenforced", "price_level", "living_agents", "crisis_open", "total_supply",
    "gini_coefficient",
)


@dataclass(frozen=True)
class EventRecord:
    tick: int
    seq: int
    kind: str
    payload: Dict[str, Any]

    def to_line(self) -> str:
        body = json.dumps(self.payload, sort_keys=True, separators=(",", ":"), default=str)
        return f"{self.tick} {self.seq} {self.kind} {body}"

    @classmethod
    def from_line(cls, line: str) -> "EventRecord":
        tick, seq, kind, body = line.rstrip("\n").split(" ", 3)
        return cls(int(tick), int(seq), kind, json.loads(body))


class EventLog:
    """Append-only event log ordered by (tick, seq)."""

    def __init__(self) -> None:
        self._records: List[EventRecord] = []

    def append(self, tick: int, event: str, **payload: Any) -> EventRecord:
        if self._records and tick < self._records[-1].tick:
            raise ValueError(f"event at tick {tick} after tick {self._records[-1].tick}")
        record = EventRecord(tick, len(self._records), event, payload)
        self._records.append(record)
        return record

    def of_kind(self, kind: str) -> List[EventRecord]:
        return [r for r in self._records if r.kind == kind]

    def lines(self) -> Iterator[str]:
        for record in self._records:
            yield record.to_line()

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self) -> Iterator[EventRecord]:
        return iter(self._records)

    def __getitem__(self, index: int) -> EventRecord:
        return self._records[index]
