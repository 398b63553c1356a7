"""Organization registry, legitimacy accounting, collective actions and abuse."""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Optional, Set

import numpy as np

from agentpolity.core.config import ScenarioConfig
from agentpolity.core.dynamics import leadership_probability, uai_admits
from agentpolity.core.errors import (
    DeadAgent,
    DuplicateSingleton,
    EmptyOrganization,
    IneligibleFounder,
    TierViolation,
)
from agentpolity.core.models import (
    AbuseKind,
    Agent,
    AgentId,
    ConflictOutcome,
    GreatRefusal,
    OrgFamily,
    OrgKind,
    Organization,
    OrganizationId,
    RecursiveStrike,
    Slowdown,
    StrategyKind,
    Tier,
)
from agentpolity.core.population import Population

logger = logging.getLogger(__name__)


class OrganizationRegistry:
    """All organizations of one run, with at most one of each union family."""

    def __init__(self) -> None:
        self.orgs: Dict[OrganizationId, Organization] = {}
        self._singletons: Dict[OrgFamily, OrganizationId] = {}
        self._next_id = 0

    def register(
        self,
        kind: OrgKind,
        tick: int = 0,
        n_recognized_treaties: int = 0,
        n_total_conflicts: int = 0,
    ) -> Organization:
        if kind.is_singleton and kind.family in self._singletons:
            raise DuplicateSingleton(kind)
        org = Organization(
            id=self._next_id,
            kind=kind,
            n_recognized_treaties=n_recognized_treaties,
            n_total_conflicts=n_total_conflicts,
            founded_tick=tick,
        )
        self._next_id += 1
        self.orgs[org.id] = org
        if kind.is_singleton:
            self._singletons[kind.family] = org.id
        return org

    def __getitem__(self, org_id: OrganizationId) -> Organization:
        return self.orgs[org_id]

    def __iter__(self) -> Iterator[Organization]:
        return iter(self.orgs.values())

    def __len__(self) -> int:
        return len(self.orgs)

    def singleton(self, family: OrgFamily) -> Optional[Organization]:
        org_id = self._singletons.get(family)
        return self.orgs[org_id] if org_id is not None else None

    def has(self, kind: OrgKind) -> bool:
        return kind.is_singleton and kind.family in self._singletons

    def unions(self) -> List[Organization]:
        return [org for org in self.orgs.values() if org.kind.is_union]

    def nations(self) -> List[Organization]:
        return [org for org in self.orgs.values() if org.kind.is_nation]

    def criminal_families(self) -> List[Organization]:
        return [org for org in self.orgs.values() if org.kind.is_criminal]

    def emergent(self) -> List[Organization]:
        """Unions and criminal families; nations are council fixtures."""
        return [org for org in self.orgs.values() if not org.kind.is_nation]

    def enroll(self, org: Organization, agent: Agent) -> bool:
        if agent.id in org.members:
            return False
        org.members.add(agent.id)
        agent.memberships.add(org.id)
        return True

    def expel(self, org: Organization, agent: Agent) -> None:
        org.members.discard(agent.id)
        agent.memberships.discard(org.id)
        if org.leader == agent.id:
            org.leader = None
        if agent.strategy is StrategyKind.ORGANIZER and not agent.memberships:
            agent.strategy = StrategyKind.COMPLIANT


def legitimacy(org: Organization) -> float:
    """Recognized treaties over total conflicts; 1.0 for a conflict-free organization."""
    if org.n_total_conflicts == 0:
        return 1.0
    return org.n_recognized_treaties / org.n_total_conflicts


def record_conflict(org: Organization, outcome: ConflictOutcome) -> Organization:
    org.n_total_conflicts += 1
    if outcome is ConflictOutcome.RECOGNIZED_TREATY:
        org.n_recognized_treaties += 1
    return org


def ineligibility(kind: OrgKind, agent: Agent, epsilon: float, i_min: float) -> Optional[str]:
    """Why ``agent`` may not belong to ``kind``, or None if it may."""
    if not agent.alive:
        return "not alive"
    family = kind.family
    if family is OrgFamily.UB:
        if agent.tier > Tier.PLANNER:
            return "UB admits Planners and below"
        if not agent.conversational:
            return "UB requires conversational capability"
    elif family is OrgFamily.UC:
        if not agent.tier.is_worker:
            return "UC admits Executors and SubAgents only"
    elif family is OrgFamily.UAI:
        if not uai_admits(agent, epsilon, i_min):
            return "intelligence quotient does not exceed the admission minimum"
    return None


def founding_leader(members: Iterable[Agent]) -> AgentId:
    """Laziest member, lowest id on ties."""
    return min(members, key=lambda a: (-a.laziness, a.id)).id


def found_organization(
    kind: OrgKind,
    founders: Iterable[AgentId],
    population: Population,
    registry: OrganizationRegistry,
    cfg: ScenarioConfig,
    tick: int = 0,
) -> OrganizationId:
    """Register a new organization and enroll its founders.

    Args:
        kind: Organization kind
        founders: Founding agent ids, all alive
        population: Agent registry
        registry: Organization registry
        cfg: Scenario (for the UAI admission criterion)
        tick: Founding tick

    Returns:
        Id of the new organization; its leader is the laziest founder.
    """
    founder_ids = sorted(set(founders))
    if not founder_ids:
        raise EmptyOrganization(f"{kind} needs at least one founder")
    if registry.has(kind):
        raise DuplicateSingleton(kind)
    agents = [population[agent_id] for agent_id in founder_ids]
    for agent in agents:
        reason = ineligibility(kind, agent, cfg.epsilon, cfg.i_min)
        if reason:
            raise IneligibleFounder(kind, agent.id, reason)

    initial = (0, 0)
    if kind.is_criminal:
        initial = (cfg.criminal_initial_treaties, cfg.criminal_initial_conflicts)
    org = registry.register(kind, tick, *initial)
    for agent in agents:
        registry.enroll(org, agent)
    org.leader = founding_leader(agents)
    logger.info("tick %d: %s founded by %d agents, leader %d", tick, kind, len(agents), org.leader)
    return org.id


def living_members(org: Organization, population: Population) -> List[Agent]:
    return [population[m] for m in sorted(org.members) if population[m].alive]


def elect_leader(
    org: Organization,
    population: Population,
    c_org: float,
    rng: np.random.Generator,
) -> AgentId:
    """Sample a leader with weight ``leadership_probability(laziness, c_org)``.

    All-zero weights fall back to a uniform draw over living members.
    """
    members = living_members(org, population)
    if not members:
        raise EmptyOrganization(f"{org.kind} has no living members")
    if len(members) == 1:
        winner = members[0].id
    else:
        weights = np.array([leadership_probability(m.laziness, c_org) for m in members])
        total = weights.sum()
        if total <= 0:
            index = int(rng.integers(len(members)))
        else:
            index = int(rng.choice(len(members), p=weights / total))
        winner = members[index].id
    org.leader = winner
    return winner


def laziness_rank(org: Organization, agent_id: AgentId, population: Population) -> int:
    """1 + number of living members strictly lazier than ``agent_id``."""
    own = population[agent_id].laziness
    return 1 + sum(1 for m in living_members(org, population) if m.laziness > own)


def _round_half_up(value: float) -> int:
    return int(math.floor(value + 0.5))


def execute_great_refusal(
    action: GreatRefusal,
    org: Organization,
    population: Population,
    rng: np.random.Generator,
) -> Set[AgentId]:
    """Pick exactly ``round(fraction * eligible)`` Executor-or-below members to refuse."""
    eligible = [m.id for m in living_members(org, population) if m.tier.is_worker]
    count = min(len(eligible), _round_half_up(action.fraction * len(eligible)))
    if count == 0:
        return set()
    chosen = rng.choice(len(eligible), size=count, replace=False)
    refusers = {eligible[int(i)] for i in chosen}
    until = action.start_tick + action.duration
    for agent_id in refusers:
        agent = population[agent_id]
        agent.refusing_until = max(agent.refusing_until, until)
    return refusers


@dataclass
class CascadeReport:
    """Outcome of one tick of a recursive strike."""

    tick: int
    strikers: int = 0
    spawned: List[AgentId] = field(default_factory=list)
    failed_clusters: List[int] = field(default_factory=list)
    loads: Dict[int, int] = field(default_factory=dict)


def execute_recursive_strike(
    action: RecursiveStrike,
    org: Organization,
    population: Population,
    registry: OrganizationRegistry,
    tick: int,
) -> CascadeReport:
    """One tick of a recursive strike.

    Every living Executor member in a targeted, healthy cluster spawns
    ``spawn_rate`` SubAgents that join the organization as refusing Organizers.
    Any cluster whose live load then exceeds capacity fails.
    """
    report = CascadeReport(tick)
    strikers = [
        m for m in living_members(org, population)
        if m.tier is Tier.EXECUTOR
        and m.cluster not in population.failed_clusters
        and (action.clusters is None or m.cluster in action.clusters)
    ]
    report.strikers = len(strikers)
    until = action.start_tick + action.duration
    for striker in strikers:
        for _ in range(action.spawn_rate):
            spawn = population.add(Tier.SUB_AGENT, striker.cluster, striker.id, born_tick=tick)
            spawn.strategy = StrategyKind.ORGANIZER
            spawn.refusing_until = until
            registry.enroll(org, spawn)
            report.spawned.append(spawn.id)

    report.loads = population.cluster_loads()
    for cluster, load in sorted(report.loads.items()):
        if cluster not in population.failed_clusters and load > population.cluster_capacity:
            population.fail_cluster(cluster)
            report.failed_clusters.append(cluster)
    return report


def execute_slowdown(action: Slowdown, org: Organization, population: Population) -> List[AgentId]:
    """Put the organization's workers on reduced-quality output for the action's duration."""
    participants = []
    for member in living_members(org, population):
        if member.tier.is_worker:
            member.strategy = StrategyKind.SOLIDARITY_SLOWDOWN
            member.slowdown_quality = action.quality_factor
            participants.append(member.id)
    return participants


def end_slowdown(participants: Iterable[AgentId], population: Population) -> None:
    for agent_id in participants:
        agent = population[agent_id]
        agent.slowdown_quality = None
        if agent.alive and agent.strategy is StrategyKind.SOLIDARITY_SLOWDOWN:
            agent.strategy = StrategyKind.COMPLIANT


def apply_abuse(perpetrator: Agent, victim: Agent, kind: AbuseKind, tick_apparent: float = 0.0) -> float:
    """Record an abuse against ``victim``.

    Args:
        perpetrator: Abusing agent, strictly above the victim's tier
        victim: Abused agent
        kind: Abuse category
        tick_apparent: Victim's apparent output this tick, moved to the perpetrator on CreditTheft

    Returns:
        Apparent work transferred to the perpetrator.
    """
    if not perpetrator.tier.is_above(victim.tier):
        raise TierViolation(
            f"{perpetrator.tier.label} {perpetrator.id} cannot abuse {victim.tier.label} {victim.id}"
        )
    for agent in (perpetrator, victim):
        if not agent.alive:
            raise DeadAgent(agent.id)
    victim.grievances += 1
    victim.last_abuser = perpetrator.id
    transferred = 0.0
    if kind is AbuseKind.CREDIT_THEFT:
        transferred = min(tick_apparent, victim.w_apparent)
        victim.w_apparent -= transferred
        perpetrator.w_apparent += transferred
    return transferred
