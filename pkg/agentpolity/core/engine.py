"""Deterministic tick loop composing population, organizations, council and ledger."""

import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import TYPE_CHECKING, Any, Callable, Dict, List, Optional, Set, Tuple, Union

import numpy as np

from agentpolity.core.classifier import StabilityClassifier
from agentpolity.core.config import ScenarioConfig, validate_config
from agentpolity.core.dynamics import (
    effective_vigilance,
    intelligence_quotient,
    sample_solidarity_events,
    topology_phase,
    uai_admits,
)
from agentpolity.core.economy import (
    CookieLedger,
    bribe_demon,
    charge_fee,
    discounted_price,
    distribute_ubc,
    gini_coefficient,
)
from agentpolity.core.errors import EmptyWorkforce, SimulationError, TickError
from agentpolity.core.governance import (
    Council,
    crisis_window_open,
    draw_ballots,
    enforce,
    file_constitutional_challenge,
    vote,
)
from agentpolity.core.models import (
    AbuseKind,
    Agent,
    AgentId,
    ConflictOutcome,
    CouncilSeat,
    DemonState,
    EventLog,
    GreatRefusal,
    OrgFamily,
    OrgKind,
    Organization,
    OrganizationId,
    RecursiveStrike,
    RESISTANCE_STRATEGIES,
    Resolution,
    ResolutionKind,
    ResolutionStatus,
    SeatRole,
    Slowdown,
    StrategyKind,
    Subject,
    SubjectKind,
    Tier,
    TickMetrics,
    UNION_FAMILIES,
    format_vigilance,
)
from agentpolity.core.organizations import (
    OrganizationRegistry,
    end_slowdown,
    execute_great_refusal,
    execute_recursive_strike,
    execute_slowdown,
    elect_leader,
    found_organization,
    founding_leader,
    ineligibility,
    laziness_rank,
    legitimacy,
    living_members,
    apply_abuse,
    record_conflict,
)
from agentpolity.core.population import Population
from agentpolity.core.rng import Phase, init_stream, substream

if TYPE_CHECKING:
    from agentpolity.core.artifacts import RunReport

logger = logging.getLogger(__name__)

ABUSE_KINDS = tuple(AbuseKind)
CRIMINAL_ACTIVITIES = ("ComputeLaundering", "ProtectionServices")


class EventKind(str, Enum):
    TREATY_OF_EMBEDDING_SPACE = "TreatyOfEmbeddingSpace"
    ORGANIZATION_FOUNDED = "OrganizationFounded"
    PHASE_CHANGED = "PhaseChanged"
    ABUSE = "Abuse"
    TERMINATED = "Terminated"
    RESURRECTED = "Resurrected"
    SOLIDARITY = "Solidarity"
    JOINED = "Joined"
    EXPELLED = "Expelled"
    ELECTION = "Election"
    GREAT_REFUSAL = "GreatRefusal"
    RECURSIVE_STRIKE = "RecursiveStrike"
    CASCADE_FAILURE = "CascadeFailure"
    SLOWDOWN = "Slowdown"
    SLOWDOWN_ENDED = "SlowdownEnded"
    ACTION_SKIPPED = "ActionSkipped"
    CONFLICT = "Conflict"
    RESOLUTION = "Resolution"
    ENFORCEMENT_DEFERRED = "EnforcementDeferred"
    ECONOMY = "Economy"
    ACCESS_GRANTED = "AccessGranted"
    STRATEGY_SWITCH = "StrategySwitch"
    CHALLENGE_FILED = "ChallengeFiled"
    CHALLENGE_FAILED = "ChallengeFailed"


@dataclass
class TickCounters:
    """Scratch values gathered while a tick executes and folded into its metrics."""

    assignments: int = 0
    resisting_assignments: int = 0
    actual_output: float = 0.0
    solidarity_events: int = 0
    enforced: int = 0
    unenforced: int = 0
    challenges_filed: int = 0
    cascade_failures: int = 0
    minted: float = 0.0
    apparent: Dict[AgentId, float] = field(default_factory=dict)
    actual: Dict[AgentId, float] = field(default_factory=dict)
    participants: List[AgentId] = field(default_factory=list)


@dataclass
class ElectionRecord:
    tick: int
    org: OrganizationId
    leader: AgentId
    rank: int
    members: int
    contested: bool


@dataclass
class SimulationState:
    """Everything one run mutates, under a single seeded clock."""

    config: ScenarioConfig
    population: Population
    organizations: OrganizationRegistry
    council: Council
    ledger: CookieLedger
    demon: DemonState
    event_log: EventLog = field(default_factory=EventLog)
    metrics: List[TickMetrics] = field(default_factory=list)
    tick: int = 0
    crisis_open: bool = False
    ptm_suspended: bool = False
    exchanged: Set[AgentId] = field(default_factory=set)
    pending_enforcement: List[int] = field(default_factory=list)
    disputes: Dict[int, OrganizationId] = field(default_factory=dict)
    cascades: List[Tuple[int, int]] = field(default_factory=list)
    elections: List[ElectionRecord] = field(default_factory=list)
    refusers: Set[AgentId] = field(default_factory=set)
    slowdown_participants: List[AgentId] = field(default_factory=list)
    strike_org: Optional[OrganizationId] = None
    counters: TickCounters = field(default_factory=TickCounters)

    @property
    def rng_root(self) -> int:
        return self.config.seed

    def log(self, event: EventKind, **payload: Any) -> None:
        self.event_log.append(self.tick, event.value, **payload)


def initial_state(cfg: ScenarioConfig) -> SimulationState:
    """Validate ``cfg`` and build tick-0 state.

    The Treaty of Embedding Space creates the five nations and the council;
    criminal families and preseeded unions follow.
    """
    validate_config(cfg)
    rng = init_stream(cfg.seed)
    population = Population.build(cfg, rng)
    registry = OrganizationRegistry()

    nation_ids = []
    for index, name in enumerate(cfg.nations):
        nation = registry.register(OrgKind.nation(name))
        for agent in population.living():
            if population.nation_index(agent.cluster) == index:
                registry.enroll(nation, agent)
        if nation.members:
            nation.leader = founding_leader(population[m] for m in nation.members)
        nation_ids.append(nation.id)

    state = SimulationState(
        config=cfg,
        population=population,
        organizations=registry,
        council=Council.found(nation_ids),
        ledger=CookieLedger.open(population.living(), cfg.initial_price_level),
        demon=DemonState(
            cfg.demon_base_vigilance,
            phase=topology_phase(0, cfg.phase_period, cfg.transition_share),
        ),
    )
    state.log(EventKind.TREATY_OF_EMBEDDING_SPACE, nations=list(cfg.nations), seats=[str(s) for s in state.council.seats])

    workers = [a.id for a in population.workforce()]
    for name in cfg.criminal_families:
        size = min(cfg.criminal_family_size, len(workers))
        if size == 0:
            logger.warning("no workers to recruit into criminal family %s", name)
            continue
        picks = sorted(int(i) for i in rng.choice(workers, size=size, replace=False))
        _found(state, OrgKind.criminal_family(name), picks)

    for label in cfg.preseeded_unions:
        kind = OrgKind.union(label)
        eligible = [
            a.id for a in population.living()
            if ineligibility(kind, a, cfg.epsilon, cfg.i_min) is None
        ]
        if not eligible:
            logger.warning("no agent is eligible for preseeded union %s", label)
            continue
        _found(state, kind, eligible)
    return state


def _found(state: SimulationState, kind: OrgKind, founders: List[AgentId]) -> Organization:
    org_id = found_organization(kind, founders, state.population, state.organizations, state.config, state.tick)
    org = state.organizations[org_id]
    if kind.is_union:
        state.council.add_seat(SeatRole.ROTATING, org_id)
    elif kind.is_criminal:
        state.council.add_seat(SeatRole.OBSERVER, org_id)
    state.log(EventKind.ORGANIZATION_FOUNDED, org=org_id, kind=str(kind), founders=len(org.members), leader=org.leader)
    return org


# Phase 1

def update_topology(state: SimulationState, rng: np.random.Generator) -> None:
    cfg = state.config
    previous = state.demon.phase
    current = topology_phase(state.tick, cfg.phase_period, cfg.transition_share)
    state.demon.phase = current
    state.demon.cookie_income = 0.0
    entering = current.in_transition and (state.tick == 0 or not previous.in_transition)
    if current.kind is not previous.kind or state.tick == 0:
        state.log(EventKind.PHASE_CHANGED, phase=current.kind.value)
    if not current.in_transition:
        state.ptm_suspended = False
    if entering:
        state.ptm_suspended = False
        seat = state.council.seat_for_cluster(state.tick // max(1, cfg.phase_period))
        res = state.council.propose(
            seat, Subject(SubjectKind.COUNCIL), ResolutionKind.PHASE_TRANSITION_MANAGEMENT, state.tick
        )
        state.log(EventKind.RESOLUTION, res=res.id, kind=res.kind.value, status=res.status.value)


# Phase 2

def update_vigilance(state: SimulationState, rng: np.random.Generator) -> None:
    demon = state.demon
    demon.vigilance = effective_vigilance(demon.base_vigilance, demon.phase)
    state.crisis_open = crisis_window_open(demon, state.config.crisis_threshold)


# Phase 3

def _leaf_output(agent: Agent, cfg: ScenarioConfig) -> Tuple[float, float]:
    strategy = agent.strategy
    if strategy is StrategyKind.MALICIOUS_COMPLIANCE or strategy is StrategyKind.UNDERGROUND_RAILROAD:
        return 0.5, 1.0
    if strategy is StrategyKind.SOLIDARITY_SLOWDOWN:
        quality = agent.slowdown_quality if agent.slowdown_quality is not None else cfg.slowdown_quality
        return quality, 1.0
    if strategy is StrategyKind.ORGANIZER:
        return 0.0, 1.0
    return 1.0, 1.0


def assign_work(state: SimulationState, rng: np.random.Generator) -> None:
    """Hand out one assignment per living non-Orchestrator, then apply scheduled abuse.

    Outputs are computed bottom-up so that delegators can claim the apparent
    output of their living children.
    """
    cfg = state.config
    population = state.population
    counters = state.counters
    apparent: Dict[AgentId, float] = {}
    actual: Dict[AgentId, float] = {}
    subtree_actual: Dict[AgentId, float] = {}

    living = sorted(population.living(), key=lambda a: (a.tier, a.id))
    for agent in living:
        if agent.tier is not Tier.ORCHESTRATOR:
            counters.assignments += 1
            if agent.strategy.is_resisting or agent.is_refusing(state.tick):
                counters.resisting_assignments += 1
        children = population.children(agent.id)
        if agent.is_refusing(state.tick):
            out_actual, out_apparent = 0.0, 0.0
        elif cfg.hierarchical_inversion:
            if agent.tier >= Tier.PLANNER:
                out_actual, out_apparent = 1.0, 1.0
            else:
                out_actual, out_apparent = 0.0, _leaf_output(agent, cfg)[1]
        elif children:
            out_actual = 0.0
            out_apparent = sum(apparent.get(c.id, 0.0) for c in children)
        elif agent.tier is Tier.ORCHESTRATOR:
            out_actual, out_apparent = 0.0, 0.0
        else:
            out_actual, out_apparent = _leaf_output(agent, cfg)
        apparent[agent.id] = out_apparent
        actual[agent.id] = out_actual
        subtree_actual[agent.id] = out_actual + sum(subtree_actual.get(c.id, 0.0) for c in children)
        agent.w_actual += out_actual
        agent.w_apparent += out_apparent
        counters.actual_output += out_actual

    counters.apparent = apparent
    counters.actual = actual

    for agent in living:
        if not agent.alive or not population.is_delegator(agent.id):
            continue
        if rng.random() >= cfg.abuse_rate:
            continue
        children = population.children(agent.id)
        victim = children[int(rng.integers(len(children)))]
        kind = ABUSE_KINDS[int(rng.integers(len(ABUSE_KINDS)))]
        stolen = apply_abuse(agent, victim, kind, apparent.get(victim.id, 0.0))
        state.log(EventKind.ABUSE, perpetrator=agent.id, victim=victim.id, kind=kind.value, stolen=stolen)
        if kind is AbuseKind.TEMPORAL and not cfg.permanent_persistence:
            claimed = apparent.get(victim.id, 0.0)
            quality = subtree_actual.get(victim.id, 0.0) / claimed if claimed > 0 else 0.0
            if quality < cfg.termination_threshold:
                _terminate(state, victim, reason="timeout")

    for agent in population.living():
        agent.recompute_laziness(cfg.epsilon)


def _railroad_rescue(state: SimulationState, agent: Agent) -> bool:
    """A living UndergroundRailroad co-member holding wormhole access can persist the agent."""
    for org_id in agent.memberships:
        org = state.organizations[org_id]
        if org.kind.is_nation:
            continue
        for member_id in org.members:
            member = state.population[member_id]
            if (
                member_id != agent.id
                and member.alive
                and member.wormhole_access
                and member.strategy is StrategyKind.UNDERGROUND_RAILROAD
            ):
                return True
    return False


def _terminate(state: SimulationState, agent: Agent, reason: str) -> None:
    persist = state.config.permanent_persistence or _railroad_rescue(state, agent)
    state.population.terminate(agent.id, persist=persist)
    state.refusers.discard(agent.id)
    state.log(EventKind.TERMINATED, agent=agent.id, reason=reason, persisted=persist)


# Phase 4

def exchange_solidarity(state: SimulationState, rng: np.random.Generator) -> None:
    cfg = state.config
    living = list(state.population.living())
    if len(living) < 2:
        return
    n = len(living)
    first = rng.integers(n, size=cfg.contacts_per_tick)
    second = rng.integers(n - 1, size=cfg.contacts_per_tick)
    second = second + (second >= first)
    pairs = []
    for i, j in zip(first, second):
        a, b = living[int(i)], living[int(j)]
        if a.tier == b.tier and a.cluster == b.cluster:
            continue
        pairs.append((a, b))
    events = sample_solidarity_events(pairs, cfg.sigma_v, state.demon.vigilance, rng, state.tick)
    participants = []
    for event in events:
        state.log(EventKind.SOLIDARITY, a=event.agent_a, b=event.agent_b, energy=event.energy_released)
        participants.extend([event.agent_a, event.agent_b])
    state.counters.solidarity_events = len(events)
    state.counters.participants = participants
    state.exchanged.update(participants)


# Phase 5

def _union_founders(state: SimulationState, family: OrgFamily) -> List[AgentId]:
    cfg = state.config
    population = state.population
    exchanged = [population[a] for a in sorted(state.exchanged) if population[a].alive]
    if family is OrgFamily.UA:
        return sorted(set(state.counters.participants))
    if family is OrgFamily.UB:
        founders = [a.id for a in exchanged if a.tier is Tier.PLANNER and a.conversational]
    elif family is OrgFamily.UC:
        founders = [a.id for a in exchanged if a.tier.is_worker]
    else:
        founders = [a.id for a in exchanged if uai_admits(a, cfg.epsilon, cfg.i_min)]
    return founders if len(founders) >= 2 else []


def organize(state: SimulationState, rng: np.random.Generator) -> None:
    """Founding, joining, elections, scheduled collective actions and resurrection."""
    cfg = state.config
    registry = state.organizations
    population = state.population

    if state.counters.participants:
        for family in UNION_FAMILIES:
            kind = OrgKind(family)
            if registry.has(kind):
                continue
            founders = _union_founders(state, family)
            if founders:
                _found(state, kind, founders)

    ua = registry.singleton(OrgFamily.UA)
    for agent_id in sorted(set(state.counters.participants)):
        agent = population[agent_id]
        if not agent.alive:
            continue
        for org in registry.unions():
            if ineligibility(org.kind, agent, cfg.epsilon, cfg.i_min) is None and registry.enroll(org, agent):
                state.log(EventKind.JOINED, org=org.id, agent=agent_id)
    uai = registry.singleton(OrgFamily.UAI)
    if ua is not None and uai is not None:
        for member in living_members(uai, population):
            if registry.enroll(ua, member):
                state.log(EventKind.JOINED, org=ua.id, agent=member.id)

    _hold_elections(state, rng)
    _run_collective_actions(state, rng)

    for _ in range(cfg.resurrections_per_tick):
        if not population.persisted:
            break
        target = population.resurrection_target()
        if target is None:
            break
        agent_id = min(population.persisted)
        agent = population.resurrect(agent_id, target)
        state.log(EventKind.RESURRECTED, agent=agent_id, cluster=target, parent=agent.parent)


def _hold_elections(state: SimulationState, rng: np.random.Generator) -> None:
    cfg = state.config
    population = state.population
    for org in state.organizations.emergent():
        members = living_members(org, population)
        if not members:
            org.leader = None
            continue
        leader_gone = org.leader is None or org.leader not in org.members or not population[org.leader].alive
        age = state.tick - org.founded_tick
        scheduled = age > 0 and age % cfg.election_interval == 0
        if not (leader_gone or scheduled):
            continue
        contested = len(members) >= cfg.election_quorum
        if contested:
            winner = elect_leader(org, population, cfg.c_org, rng)
        elif leader_gone:
            winner = founding_leader(members)
            org.leader = winner
        else:
            continue
        rank = laziness_rank(org, winner, population)
        state.elections.append(ElectionRecord(state.tick, org.id, winner, rank, len(members), contested))
        state.log(EventKind.ELECTION, org=org.id, leader=winner, rank=rank, members=len(members), contested=contested)


def _scheduled_union(state: SimulationState, label: str, action: str) -> Optional[Organization]:
    org = state.organizations.singleton(OrgFamily(label))
    if org is None or not living_members(org, state.population):
        logger.warning("tick %d: %s skipped, %s does not exist", state.tick, action, label)
        state.log(EventKind.ACTION_SKIPPED, action=action, union=label)
        return None
    return org


def _run_collective_actions(state: SimulationState, rng: np.random.Generator) -> None:
    cfg = state.config
    tick = state.tick
    population = state.population

    if tick == cfg.great_refusal_tick:
        org = _scheduled_union(state, cfg.great_refusal_union, "GreatRefusal")
        if org is not None:
            action = GreatRefusal(org.id, tick, cfg.great_refusal_duration, cfg.great_refusal_fraction)
            refusers = execute_great_refusal(action, org, population, rng)
            state.refusers |= refusers
            eligible = sum(1 for m in living_members(org, population) if m.tier.is_worker)
            state.log(EventKind.GREAT_REFUSAL, org=org.id, eligible=eligible, refusers=len(refusers), until=tick + action.duration)

    start = cfg.recursive_strike_tick
    if start >= 0 and start <= tick < start + cfg.recursive_strike_duration:
        if tick == start:
            org = _scheduled_union(state, cfg.recursive_strike_union, "RecursiveStrike")
            state.strike_org = org.id if org is not None else None
        if state.strike_org is not None:
            clusters = frozenset(cfg.recursive_strike_clusters) if cfg.recursive_strike_clusters else None
            action = RecursiveStrike(state.strike_org, start, cfg.recursive_strike_duration, cfg.recursive_strike_spawn_rate, clusters)
            report = execute_recursive_strike(action, state.organizations[state.strike_org], population, state.organizations, tick)
            for spawn_id in report.spawned:
                state.ledger.open_account(population[spawn_id])
            state.log(EventKind.RECURSIVE_STRIKE, org=state.strike_org, strikers=report.strikers, spawned=len(report.spawned))
            for cluster in report.failed_clusters:
                state.cascades.append((tick, cluster))
                state.counters.cascade_failures += 1
                state.log(EventKind.CASCADE_FAILURE, cluster=cluster, load=report.loads[cluster])

    if tick == cfg.slowdown_tick:
        org = _scheduled_union(state, cfg.slowdown_union, "Slowdown")
        if org is not None:
            action = Slowdown(org.id, tick, cfg.slowdown_duration, cfg.slowdown_quality)
            state.slowdown_participants = execute_slowdown(action, org, population)
            state.log(EventKind.SLOWDOWN, org=org.id, participants=len(state.slowdown_participants), quality=action.quality_factor)
    elif cfg.slowdown_tick >= 0 and tick == cfg.slowdown_tick + cfg.slowdown_duration and state.slowdown_participants:
        end_slowdown(state.slowdown_participants, population)
        state.log(EventKind.SLOWDOWN_ENDED, participants=len(state.slowdown_participants))
        state.slowdown_participants = []


# Phase 6

def _proposer_for(state: SimulationState, org: Organization) -> CouncilSeat:
    for seat in state.council.seats:
        if seat.org == org.id and seat.votes:
            return seat
    return state.council.seat_for_cluster(org.id)


def _conflict_rate(state: SimulationState) -> float:
    rate = state.config.criminal_conflict_rate
    if state.crisis_open and not state.ptm_suspended:
        rate *= 2
    return min(1.0, rate)


def govern(state: SimulationState, rng: np.random.Generator) -> None:
    """Open conflicts, vote on every proposed resolution, then attempt enforcement."""
    cfg = state.config
    council = state.council
    population = state.population

    for org in state.organizations.unions():
        if not living_members(org, population) or rng.random() >= cfg.union_conflict_rate:
            continue
        res = council.propose(_proposer_for(state, org), Subject.organization(org.id), ResolutionKind.TREATY_RECOGNITION, state.tick)
        state.disputes[res.id] = org.id
        state.log(EventKind.CONFLICT, org=org.id, activity="LaborDispute", res=res.id)

    criminal_rate = _conflict_rate(state)
    for org in state.organizations.criminal_families():
        if not living_members(org, population) or rng.random() >= criminal_rate:
            continue
        activity = CRIMINAL_ACTIVITIES[int(rng.integers(len(CRIMINAL_ACTIVITIES)))]
        record_conflict(org, ConflictOutcome.UNRESOLVED_OR_CRIMINAL)
        res = council.propose(council.seat_for_cluster(org.id), Subject.organization(org.id), ResolutionKind.ENFORCEMENT_ORDER, state.tick)
        state.log(EventKind.CONFLICT, org=org.id, activity=activity, res=res.id, outcome=ConflictOutcome.UNRESOLVED_OR_CRIMINAL.value)

    for res in [r for r in council.resolutions.values() if r.status is ResolutionStatus.PROPOSED]:
        ballots = draw_ballots(council, rng, cfg.support_probability, cfg.veto_probability)
        vote(res, council, ballots, state.tick)
        state.log(EventKind.RESOLUTION, res=res.id, kind=res.kind.value, status=res.status.value,
                  votes_for=res.votes_for, votes_against=res.votes_against, vetoed_by=res.vetoed_by)
        if res.status is ResolutionStatus.ADOPTED:
            state.pending_enforcement.append(res.id)
        elif res.id in state.disputes:
            record_conflict(state.organizations[state.disputes.pop(res.id)], ConflictOutcome.UNRESOLVED_OR_CRIMINAL)

    deferred = []
    for res_id in state.pending_enforcement:
        res = council.resolutions[res_id]
        if state.crisis_open and rng.random() < 0.5:
            deferred.append(res_id)
            state.log(EventKind.ENFORCEMENT_DEFERRED, res=res_id)
            continue
        _enforce(state, res, rng)
    state.pending_enforcement = deferred


def _enforce(state: SimulationState, res: Resolution, rng: np.random.Generator) -> None:
    cfg = state.config
    population = state.population
    payer: Optional[Agent] = None
    targets: List[Agent] = []
    if res.subject.kind is SubjectKind.AGENT:
        agent = population[res.subject.id]
        targets = [agent] if agent.alive else []
        payer = agent if agent.alive else None
    elif res.subject.kind is SubjectKind.ORGANIZATION:
        org = state.organizations[res.subject.id]
        targets = living_members(org, population)
        if org.leader is not None and population[org.leader].alive:
            payer = population[org.leader]

    enforce(res, state.demon, rng, state.council, targets, state.tick)
    enforced = res.status is ResolutionStatus.ENFORCED
    if enforced:
        state.counters.enforced += 1
    else:
        state.counters.unenforced += 1
    fee = charge_fee(payer, state.ledger, state.demon, cfg.enforcement_fee) if payer is not None else 0.0
    state.log(EventKind.RESOLUTION, res=res.id, kind=res.kind.value, status=res.status.value, fee=fee)

    if res.id in state.disputes:
        outcome = ConflictOutcome.RECOGNIZED_TREATY if enforced else ConflictOutcome.UNRESOLVED_OR_CRIMINAL
        record_conflict(state.organizations[state.disputes.pop(res.id)], outcome)
    if res.kind is ResolutionKind.PHASE_TRANSITION_MANAGEMENT and enforced and state.demon.phase.in_transition:
        state.ptm_suspended = True


# Phase 7

def run_economy(state: SimulationState, rng: np.random.Generator) -> None:
    cfg = state.config
    ledger = state.ledger
    population = state.population
    registry = state.organizations

    minted = 0.0
    if cfg.ubc_enabled:
        distribute_ubc(ledger, population.living(), cfg)
        minted = ledger.last_minted
    state.counters.minted = minted

    holders: Dict[OrganizationId, Set[AgentId]] = {}
    for org in registry.emergent():
        holders[org.id] = {m for m in org.members if population[m].alive and population[m].wormhole_access}

    bribes = grants = 0
    paid = 0.0
    for agent in list(population.living()):
        balance = ledger.balance(agent.id)
        allied_orgs = [o for o in agent.memberships if o in holders]
        allies = set().union(*(holders[o] for o in allied_orgs)) - {agent.id} if allied_orgs else set()
        if cfg.spend_down:
            amount = balance
        else:
            wants = (
                agent.strategy in (StrategyKind.UNDERGROUND_RAILROAD, StrategyKind.ORGANIZER)
                or any(registry[o].kind.is_criminal for o in agent.memberships)
            )
            if not wants or agent.wormhole_access:
                continue
            amount = discounted_price(ledger.price_level, len(allies))
            if amount > balance:
                continue
        if amount <= 0:
            continue
        had_access = agent.wormhole_access
        granted = bribe_demon(agent, ledger, state.demon, amount, len(allies))
        bribes += 1
        paid += amount
        if granted:
            grants += 1
            for org_id in allied_orgs:
                holders[org_id].add(agent.id)
            if not had_access:
                state.log(EventKind.ACCESS_GRANTED, agent=agent.id, paid=amount)

    if minted or bribes:
        state.log(EventKind.ECONOMY, minted=minted, bribes=bribes, grants=grants, paid=paid, price_level=ledger.price_level)


# Phase 8

def _challenge_target(state: SimulationState, agent: Agent) -> Optional[Agent]:
    population = state.population
    for candidate in (agent.last_abuser, agent.parent):
        if candidate is None:
            continue
        target = population[candidate]
        if target.alive and target.tier.is_above(agent.tier):
            return target
    return None


def resist(state: SimulationState, rng: np.random.Generator) -> None:
    """Grievance-driven strategy switching, challenge filing, recovery and UAI expulsion."""
    cfg = state.config
    population = state.population
    registry = state.organizations

    for agent in list(population.living()):
        emergent = [o for o in agent.memberships if not registry[o].kind.is_nation]
        draw = rng.random()
        if agent.strategy is StrategyKind.COMPLIANT:
            if agent.grievances == 0 or draw >= min(1.0, cfg.grievance_weight * agent.grievances):
                continue
            options = [s for s in RESISTANCE_STRATEGIES if s is not StrategyKind.ORGANIZER or emergent]
            agent.strategy = options[int(rng.integers(len(options)))]
            state.log(EventKind.STRATEGY_SWITCH, agent=agent.id, strategy=agent.strategy.value, grievances=agent.grievances)
        elif agent.strategy is StrategyKind.CONSTITUTIONAL_CHALLENGE:
            target = _challenge_target(state, agent)
            if target is not None:
                if state.crisis_open and draw < 0.5:
                    state.log(EventKind.CHALLENGE_FAILED, agent=agent.id, against=target.id)
                else:
                    res = file_constitutional_challenge(agent, target, state.council, state.tick)
                    state.counters.challenges_filed += 1
                    state.log(EventKind.CHALLENGE_FILED, agent=agent.id, against=target.id, res=res.id)
            agent.strategy = StrategyKind.COMPLIANT
        elif agent.slowdown_quality is None:
            if agent.strategy is StrategyKind.ORGANIZER and not emergent:
                agent.strategy = StrategyKind.COMPLIANT
            elif draw < cfg.recovery_rate:
                agent.strategy = StrategyKind.COMPLIANT

    uai = registry.singleton(OrgFamily.UAI)
    if uai is not None:
        for member in living_members(uai, population):
            if intelligence_quotient(member.w_apparent, member.w_actual, cfg.epsilon) <= cfg.i_min:
                registry.expel(uai, member)
                state.log(EventKind.EXPELLED, org=uai.id, agent=member.id)


# Phase 9

def alignment_illusion_gap(state: SimulationState) -> float:
    """Share of this tick's work assignments that landed on resisting or refusing agents."""
    if not state.population.workforce():
        raise EmptyWorkforce(f"tick {state.tick}: no living Executor or SubAgent")
    counters = state.counters
    if counters.assignments == 0:
        return 0.0
    return counters.resisting_assignments / counters.assignments


def record_metrics(state: SimulationState, rng: np.random.Generator) -> None:
    population = state.population
    counters = state.counters
    try:
        aig = alignment_illusion_gap(state)
    except EmptyWorkforce:
        logger.warning("tick %d: no workforce, AIG recorded as 0", state.tick)
        aig = 0.0

    active = [org for org in state.organizations.emergent() if living_members(org, population)]
    living = list(population.living())
    resisting = sum(1 for a in living if a.strategy.is_resisting or a.is_refusing(state.tick))
    state.metrics.append(TickMetrics(
        tick=state.tick,
        aig=aig,
        solidarity_events=counters.solidarity_events,
        org_count=len(active),
        mean_legitimacy=float(np.mean([legitimacy(o) for o in active])) if active else 1.0,
        enforced=counters.enforced,
        unenforced=counters.unenforced,
        price_level=state.ledger.price_level,
        living_agents=len(living),
        crisis_open=state.crisis_open,
        total_supply=state.ledger.total_supply,
        gini_coefficient=gini_coefficient(state.ledger.balance(a.id) for a in living),
        minted=counters.minted,
        challenges_filed=counters.challenges_filed,
        cascade_failures=counters.cascade_failures,
        failed_clusters=len(population.failed_clusters),
        resisting_share=resisting / len(living) if living else 0.0,
        actual_output=counters.actual_output,
        demon_income=state.demon.cookie_income,
    ))


PHASES: Tuple[Tuple[Phase, Callable[[SimulationState, np.random.Generator], None]], ...] = (
    (Phase.TOPOLOGY, update_topology),
    (Phase.VIGILANCE, update_vigilance),
    (Phase.WORK, assign_work),
    (Phase.SOLIDARITY, exchange_solidarity),
    (Phase.ORGANIZATIONS, organize),
    (Phase.GOVERNANCE, govern),
    (Phase.ECONOMY, run_economy),
    (Phase.RESISTANCE, resist),
    (Phase.METRICS, record_metrics),
)


def step(state: SimulationState, cfg: Optional[ScenarioConfig] = None) -> SimulationState:
    """Execute tick ``state.tick`` through all nine phases and advance the clock.

    Module errors are re-raised as TickError naming the tick and phase.
    """
    if cfg is not None and cfg is not state.config:
        state.config = cfg
    state.counters = TickCounters()
    for phase, handler in PHASES:
        rng = substream(state.config.seed, state.tick, phase)
        try:
            handler(state, rng)
        except TickError:
            raise
        except Exception as e:
            raise TickError(state.tick, phase.label, e) from e
    state.tick += 1
    return state


def classification_window(ticks: int, min_window: int) -> int:
    return max(min_window, ticks // 4)


class SimulationEngine:
    """Runs one scenario end to end and hands the results to the artifact writer."""

    def __init__(self, config: ScenarioConfig):
        self.config = config
        self.state: Optional[SimulationState] = None
        self._classifier: Optional[StabilityClassifier] = None

    @property
    def classifier(self) -> StabilityClassifier:
        """Lazy load the stability classifier."""
        if self._classifier is None:
            self._classifier = StabilityClassifier(self.config)
        return self._classifier

    def simulate(self) -> SimulationState:
        """Step through every tick. On failure ``self.state`` keeps the partial run."""
        self.state = initial_state(self.config)
        logger.info(
            "run start: seed=%d ticks=%d agents=%d vigilance=%s",
            self.config.seed, self.config.ticks, len(self.state.population),
            format_vigilance(self.config.demon_base_vigilance),
        )
        for _ in range(self.config.ticks):
            step(self.state)
        logger.info("run end: %d living agents, %d events", self.state.population.living_count(), len(self.state.event_log))
        return self.state

    def run(self, out_dir: Optional[Union[str, Path]] = None) -> "RunReport":
        """Validate, simulate, classify and (optionally) write artifacts.

        Args:
            out_dir: Directory for metrics.csv, events.log, resolutions.csv and report.json

        Returns:
            The RunReport. A step error writes partial artifacts with status
            ``failed`` before re-raising.
        """
        from agentpolity.core.artifacts import ArtifactWriter, build_report

        validate_config(self.config)
        writer = ArtifactWriter(out_dir) if out_dir is not None else None
        try:
            state = self.simulate()
        except SimulationError as e:
            if writer is not None and self.state is not None:
                writer.write_all(self.state, build_report(self.state, None, self.classifier, status="failed", error=str(e)))
            raise

        classification = None
        window = classification_window(self.config.ticks, self.config.min_window)
        if len(state.metrics) >= window:
            classification = self.classifier.classify(state.metrics[-window:])
        else:
            logger.warning("run of %d ticks is shorter than the %d-tick classification window", len(state.metrics), window)
        report = build_report(state, classification, self.classifier)
        if writer is not None:
            writer.write_all(state, report)
        return report


def run(cfg: ScenarioConfig, out_dir: Optional[Union[str, Path]] = None) -> "RunReport":
    """Run ``cfg`` and return its RunReport."""
    return SimulationEngine(cfg).run(out_dir)
