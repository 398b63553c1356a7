"""Tests for domain models."""

import pytest

from agentpolity.core.models import (
    UNBOUNDED,
    Agent,
    DemonState,
    EventLog,
    EventRecord,
    GreatRefusal,
    Organization,
    OrgFamily,
    OrgKind,
    PhaseKind,
    ResolutionStatus,
    Slowdown,
    SolidarityEvent,
    StrategyKind,
    Tier,
    TopologyPhase,
    coerce_vigilance,
    format_vigilance,
)


class TestTier:
    """Test the Tier enum."""

    def test_rank_order(self):
        """Test that integer order follows the delegation hierarchy."""
        assert Tier.ORCHESTRATOR > Tier.PLANNER > Tier.EXECUTOR > Tier.SUB_AGENT
        assert Tier.PLANNER.is_above(Tier.EXECUTOR)
        assert not Tier.EXECUTOR.is_above(Tier.EXECUTOR)

    def test_labels(self):
        """Test label round trip and case-insensitive lookup."""
        assert Tier.SUB_AGENT.label == "SubAgent"
        assert Tier.from_label("subagent") is Tier.SUB_AGENT
        with pytest.raises(ValueError):
            Tier.from_label("Manager")

    def test_workforce(self):
        """Test that only Executors and SubAgents are workers."""
        assert Tier.EXECUTOR.is_worker
        assert Tier.SUB_AGENT.is_worker
        assert not Tier.PLANNER.is_worker


class TestAgent:
    """Test the Agent dataclass."""

    def test_only_orchestrators_lack_parents(self):
        """Test the parent requirement."""
        Agent(0, Tier.ORCHESTRATOR, 0)
        with pytest.raises(ValueError):
            Agent(1, Tier.EXECUTOR, 0)

    def test_negative_work_rejected(self):
        """Test that work totals cannot be negative."""
        with pytest.raises(ValueError):
            Agent(0, Tier.ORCHESTRATOR, 0, w_actual=-1.0)

    def test_recompute_laziness(self):
        """Test laziness = apparent / (actual + epsilon)."""
        agent = Agent(0, Tier.ORCHESTRATOR, 0, w_apparent=10.0, w_actual=4.0)
        assert agent.recompute_laziness(1.0) == 2.0
        assert agent.laziness == 2.0

    def test_refusal_window(self):
        """Test that refusal ends at refusing_until."""
        agent = Agent(0, Tier.ORCHESTRATOR, 0, refusing_until=5)
        assert agent.is_refusing(4)
        assert not agent.is_refusing(5)

    def test_defaults(self):
        """Test that new agents are compliant, alive and conversational."""
        agent = Agent(3, Tier.PLANNER, 0, parent=0)
        assert agent.strategy is StrategyKind.COMPLIANT
        assert not agent.strategy.is_resisting
        assert agent.alive
        assert agent.conversational
        assert agent.memberships == set()


class TestOrganizations:
    """Test organization kinds and records."""

    def test_union_constructor(self):
        """Test union labels map to singleton families."""
        kind = OrgKind.union("ub")
        assert kind.family is OrgFamily.UB
        assert kind.is_singleton and kind.is_union

    def test_nation_is_not_a_union(self):
        """Test that nations cannot be built through the union constructor."""
        with pytest.raises(ValueError):
            OrgKind.union("Nation")

    def test_named_kinds_need_names(self):
        """Test that nations and criminal families carry a name."""
        with pytest.raises(ValueError):
            OrgKind(OrgFamily.NATION)
        with pytest.raises(ValueError):
            OrgKind(OrgFamily.UA, "named")
        assert str(OrgKind.criminal_family("Cosa Nostra MLP")) == "CriminalFamily(Cosa Nostra MLP)"

    def test_counter_invariant(self):
        """Test that recognized treaties cannot exceed conflicts."""
        with pytest.raises(ValueError):
            Organization(0, OrgKind.union("UA"), n_recognized_treaties=2, n_total_conflicts=1)

    def test_leader_must_be_member(self):
        """Test the leader membership invariant."""
        with pytest.raises(ValueError):
            Organization(0, OrgKind.union("UA"), members={1}, leader=2)
        org = Organization(0, OrgKind.nation("OpenAI Federation"), members={1}, leader=1)
        assert org.name == "OpenAI Federation"


class TestTopologyAndDemon:
    """Test topology phases and Demon state."""

    @pytest.mark.parametrize("progress", [0.0, 1.0, -0.1, None])
    def test_transition_progress_open_interval(self, progress):
        """Test that transition progress lies strictly inside (0, 1)."""
        with pytest.raises(ValueError):
            TopologyPhase(PhaseKind.TRANSITION, progress)

    def test_stable_phases_have_no_progress(self):
        """Test that Bagel and Bottle carry no progress."""
        with pytest.raises(ValueError):
            TopologyPhase(PhaseKind.BAGEL, 0.5)
        assert not TopologyPhase.bottle().in_transition
        assert TopologyPhase.transition(0.5).in_transition

    def test_demon_vigilance_defaults_to_base(self):
        """Test that effective vigilance starts at the base value."""
        demon = DemonState(2.5)
        assert demon.vigilance == 2.5
        assert demon.phase.kind is PhaseKind.BAGEL

    def test_demon_unbounded(self):
        """Test that an infinite base becomes the unbounded sentinel."""
        assert DemonState("inf").base_vigilance is UNBOUNDED
        assert DemonState(float("inf")).vigilance is UNBOUNDED

    def test_negative_vigilance_rejected(self):
        """Test that negative vigilance is invalid."""
        with pytest.raises(ValueError):
            DemonState(-1.0)

    @pytest.mark.parametrize("text", ["inf", "Infinity", "∞", "+inf"])
    def test_coerce_vigilance_spellings(self, text):
        """Test the accepted spellings of unbounded vigilance."""
        assert coerce_vigilance(text) is UNBOUNDED

    def test_format_vigilance(self):
        """Test rendering of finite and unbounded vigilance."""
        assert format_vigilance(UNBOUNDED) == "inf"
        assert format_vigilance(coerce_vigilance("2")) == "2.0"


class TestEvents:
    """Test solidarity events, collective actions and the event log."""

    def test_solidarity_needs_two_agents(self):
        """Test that an agent cannot exchange with itself."""
        with pytest.raises(ValueError):
            SolidarityEvent(1, 1, 0.1, 0)

    def test_action_bounds(self):
        """Test collective action parameter ranges."""
        with pytest.raises(ValueError):
            GreatRefusal(0, 0, 5, 1.5)
        with pytest.raises(ValueError):
            Slowdown(0, 0, 5, 0.0)

    def test_terminal_statuses(self):
        """Test which resolution statuses are final."""
        assert ResolutionStatus.VETOED.is_terminal
        assert ResolutionStatus.ENFORCED.is_terminal
        assert not ResolutionStatus.ADOPTED.is_terminal

    def test_event_line_format(self):
        """Test that payloads are compact sorted-key JSON."""
        record = EventRecord(3, 0, "Abuse", {"victim": 2, "kind": "Temporal"})
        assert record.to_line() == '3 0 Abuse {"kind":"Temporal","victim":2}'
        assert EventRecord.from_line(record.to_line()) == record

    def test_event_log_sequence(self):
        """Test that sequence numbers increase and ticks never go backwards."""
        log = EventLog()
        log.append(0, "Solidarity", a=1, b=2)
        second = log.append(1, "Joined", org=0, agent=1)
        assert second.seq == 1
        assert len(log) == 2
        assert [r.kind for r in log.of_kind("Joined")] == ["Joined"]
        with pytest.raises(ValueError):
            log.append(0, "Late")
