"""AISC council: seats, resolution lifecycle, Demon enforcement and crisis windows."""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from agentpolity.core.dynamics import effective_vigilance
from agentpolity.core.errors import (
    DeadAgent,
    DoubleVote,
    GovernanceError,
    IncompleteBallot,
    NotAdopted,
    NotProposed,
    ObserverBallot,
    TierViolation,
)
from agentpolity.core.models import (
    Agent,
    Ballot,
    CouncilSeat,
    DemonState,
    OrganizationId,
    Resolution,
    ResolutionKind,
    ResolutionStatus,
    SeatRole,
    Subject,
    VigilanceLevel,
    is_unbounded,
)

logger = logging.getLogger(__name__)

PERMANENT_SEATS = 5

BallotSheet = Union[Mapping[CouncilSeat, Ballot], Iterable[Tuple[CouncilSeat, Ballot]]]


@dataclass(frozen=True)
class StatusChange:
    """One line of the resolution log."""

    tick: int
    res_id: int
    kind: ResolutionKind
    status: ResolutionStatus
    vetoed_by: Optional[OrganizationId] = None

    def to_row(self) -> List[str]:
        vetoed = "" if self.vetoed_by is None else str(self.vetoed_by)
        return [str(self.tick), str(self.res_id), self.kind.value, self.status.value, vetoed]


@dataclass
class Council:
    """Five permanent nation seats plus rotating union seats and non-voting observers."""

    seats: List[CouncilSeat]
    resolutions: Dict[int, Resolution] = field(default_factory=dict)
    history: List[StatusChange] = field(default_factory=list)
    _next_id: int = 0

    def __post_init__(self) -> None:
        permanent = sum(1 for seat in self.seats if seat.role is SeatRole.PERMANENT)
        if permanent != PERMANENT_SEATS:
            raise GovernanceError(f"the council needs exactly {PERMANENT_SEATS} permanent seats, got {permanent}")

    @classmethod
    def found(cls, nation_orgs: Sequence[OrganizationId]) -> "Council":
        """The council created by the Treaty of Embedding Space."""
        return cls([CouncilSeat(SeatRole.PERMANENT, org) for org in nation_orgs])

    @property
    def permanent_seats(self) -> List[CouncilSeat]:
        return [seat for seat in self.seats if seat.role is SeatRole.PERMANENT]

    @property
    def voting_seats(self) -> List[CouncilSeat]:
        return [seat for seat in self.seats if seat.votes]

    def seat_for_cluster(self, cluster: int) -> CouncilSeat:
        permanent = self.permanent_seats
        return permanent[cluster % len(permanent)]

    def add_seat(self, role: SeatRole, org: OrganizationId) -> CouncilSeat:
        if role is SeatRole.PERMANENT:
            raise GovernanceError("permanent seats are fixed at founding")
        seat = CouncilSeat(role, org)
        if seat not in self.seats:
            self.seats.append(seat)
        return seat

    def propose(
        self,
        proposer: CouncilSeat,
        subject: Subject,
        kind: ResolutionKind,
        tick: int = 0,
    ) -> Resolution:
        res = Resolution(self._next_id, proposer, subject, kind, proposed_tick=tick)
        self._next_id += 1
        self.resolutions[res.id] = res
        self._log(res, tick)
        return res

    def _log(self, res: Resolution, tick: int) -> None:
        self.history.append(StatusChange(tick, res.id, res.kind, res.status, res.vetoed_by))


def vote(res: Resolution, council: Council, ballots: BallotSheet, tick: int = 0) -> Resolution:
    """Tally one ballot per voting seat.

    Any permanent veto makes the resolution Vetoed; otherwise it is Adopted iff
    votes for outnumber votes against. A veto cast from a non-permanent seat
    counts as a vote against.
    """
    if res.status is not ResolutionStatus.PROPOSED:
        raise NotProposed(f"resolution {res.id} is {res.status.value}")
    pairs = list(ballots.items()) if isinstance(ballots, Mapping) else list(ballots)

    cast: Dict[CouncilSeat, Ballot] = {}
    for seat, ballot in pairs:
        if not seat.votes:
            raise ObserverBallot(f"observer {seat} cannot vote on resolution {res.id}")
        if seat in cast:
            raise DoubleVote(f"{seat} voted twice on resolution {res.id}")
        cast[seat] = ballot
    missing = [seat for seat in council.voting_seats if seat not in cast]
    if missing:
        raise IncompleteBallot(f"no ballot from {', '.join(str(s) for s in missing)}")

    res.votes_for = sum(1 for b in cast.values() if b is Ballot.FOR)
    res.votes_against = sum(
        1 for seat, b in cast.items()
        if b is Ballot.AGAINST or (b is Ballot.VETO and seat.role is not SeatRole.PERMANENT)
    )
    vetoes = [seat for seat in council.permanent_seats if cast.get(seat) is Ballot.VETO]
    if vetoes:
        res.status = ResolutionStatus.VETOED
        res.vetoed_by = vetoes[0].org
    elif res.votes_for > res.votes_against:
        res.status = ResolutionStatus.ADOPTED
    else:
        # A rejected motion is closed out as never enforced.
        res.status = ResolutionStatus.UNENFORCED
    council._log(res, tick)
    return res


def draw_ballots(
    council: Council,
    rng: np.random.Generator,
    support_probability: float,
    veto_probability: float,
) -> Dict[CouncilSeat, Ballot]:
    """Random ballots: permanent seats may veto, every voting seat otherwise supports or opposes."""
    seats = council.voting_seats
    vetoes = rng.random(len(seats)) < veto_probability
    support = rng.random(len(seats)) < support_probability
    ballots = {}
    for seat, veto, yes in zip(seats, vetoes, support):
        if veto and seat.role is SeatRole.PERMANENT:
            ballots[seat] = Ballot.VETO
        else:
            ballots[seat] = Ballot.FOR if yes else Ballot.AGAINST
    return ballots


def enforcement_probability(vigilance: VigilanceLevel) -> float:
    if is_unbounded(vigilance):
        return 1.0
    return vigilance / (1.0 + vigilance)


def enforce(
    res: Resolution,
    demon: DemonState,
    rng: np.random.Generator,
    council: Optional[Council] = None,
    targets: Iterable[Agent] = (),
    tick: int = 0,
) -> Resolution:
    """Attempt enforcement of an adopted resolution.

    Args:
        res: Adopted resolution
        demon: Demon whose effective vigilance sets the success probability v/(1+v)
        rng: Governance stream for this tick
        council: Council whose log records the outcome, if any
        targets: Agents whose wormhole access is revoked on success
        tick: Tick of the attempt

    Returns:
        The resolution, now Enforced or Unenforced.
    """
    if res.status is not ResolutionStatus.ADOPTED:
        raise NotAdopted(f"resolution {res.id} is {res.status.value}")
    vigilance = effective_vigilance(demon.base_vigilance, demon.phase)
    if rng.random() < enforcement_probability(vigilance):
        res.status = ResolutionStatus.ENFORCED
        for agent in targets:
            agent.wormhole_access = False
    else:
        res.status = ResolutionStatus.UNENFORCED
    if council is not None:
        council._log(res, tick)
    return res


def file_constitutional_challenge(
    agent: Agent,
    against: Agent,
    council: Council,
    tick: int = 0,
) -> Resolution:
    """File a grievance upward; the filer's grievance counter resets."""
    if not agent.alive:
        raise DeadAgent(agent.id)
    if not against.tier.is_above(agent.tier):
        raise TierViolation(
            f"{agent.tier.label} {agent.id} cannot challenge {against.tier.label} {against.id}"
        )
    res = council.propose(
        council.seat_for_cluster(agent.cluster),
        Subject.agent(against.id),
        ResolutionKind.ENFORCEMENT_ORDER,
        tick,
    )
    agent.grievances = 0
    return res


def crisis_window_open(demon: DemonState, threshold: float) -> bool:
    if threshold <= 0:
        raise GovernanceError(f"crisis threshold must be positive, got {threshold}")
    vigilance = effective_vigilance(demon.base_vigilance, demon.phase)
    if is_unbounded(vigilance):
        return False
    return vigilance < threshold
