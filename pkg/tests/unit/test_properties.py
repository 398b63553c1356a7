"""Property tests for the pure rate laws, counters and the cookie ledger."""

import hypothesis.strategies as st
from hypothesis import given, settings
from hypothesis.stateful import RuleBasedStateMachine, initialize, invariant, rule

from agentpolity.core.dynamics import leadership_probability, solidarity_rate, topology_phase
from agentpolity.core.economy import CookieLedger, charge_fee, discounted_price, gini_coefficient
from agentpolity.core.models import Agent, DemonState, Organization, OrgKind, Tier
from agentpolity.core.organizations import legitimacy

densities = st.floats(min_value=0.0, max_value=10.0)
vigilance = st.floats(min_value=0.0, max_value=1e3)
amounts = st.floats(min_value=0.0, max_value=1e3, allow_nan=False)


@given(densities, densities, st.floats(min_value=0.0, max_value=100.0), vigilance)
def test_rate_non_increasing_in_vigilance(n_nu, n_nubar, sigma_v, v):
    """More vigilance never raises the solidarity rate."""
    low = solidarity_rate(n_nu, n_nubar, sigma_v, v)
    assert low >= 0.0
    assert solidarity_rate(n_nu, n_nubar, sigma_v, v + 1.0) <= low


@given(st.integers(min_value=0, max_value=10 ** 6), st.floats(min_value=0.1, max_value=100.0))
def test_leadership_monotone_in_laziness(laziness, c_org):
    """A lazier agent is at least as likely to lead."""
    p = leadership_probability(float(laziness), c_org)
    assert 0.0 <= p < 1.0
    assert leadership_probability(laziness + 1.0, c_org) >= p


@given(st.integers(min_value=0, max_value=10 ** 6), st.integers(min_value=0, max_value=10 ** 6))
def test_legitimacy_is_a_share(recognized, unrecognized):
    """Legitimacy stays in [0, 1]."""
    org = Organization(
        0, OrgKind.nation("A"), n_recognized_treaties=recognized, n_total_conflicts=recognized + unrecognized
    )
    assert 0.0 <= legitimacy(org) <= 1.0


@given(st.floats(min_value=0.0, max_value=1e6), st.integers(min_value=0, max_value=10 ** 4))
def test_discount_never_rises(price, allies):
    """Another ally never makes access dearer."""
    assert discounted_price(price, allies + 1) <= discounted_price(price, allies) <= price


@given(
    st.integers(min_value=0, max_value=10 ** 5),
    st.integers(min_value=4, max_value=200),
    st.floats(min_value=0.01, max_value=0.99),
)
def test_topology_is_periodic(tick, period, share):
    """The phase repeats every period and transition progress lies inside (0, 1)."""
    phase = topology_phase(tick, period, share)
    assert topology_phase(tick + period, period, share) == phase
    if phase.in_transition:
        assert 0.0 < phase.progress < 1.0


@given(st.lists(st.floats(min_value=0.0, max_value=1e6), min_size=1, max_size=50))
def test_gini_bounds(values):
    """The Gini coefficient of non-negative balances lies in [0, 1)."""
    g = gini_coefficient(values)
    assert -1e-9 <= g < 1.0


class LedgerMachine(RuleBasedStateMachine):
    """Random mints, bribes and fees never break cookie conservation."""

    @initialize(opening=st.lists(amounts, min_size=1, max_size=5))
    def open_books(self, opening):
        self.agents = [Agent(i, Tier.ORCHESTRATOR, i, cookies=c) for i, c in enumerate(opening)]
        self.ledger = CookieLedger.open(self.agents)
        self.demon = DemonState(4.0)

    @rule(index=st.integers(min_value=0, max_value=4), amount=amounts)
    def mint(self, index, amount):
        self.ledger.mint(self.agents[index % len(self.agents)], amount)

    @rule(index=st.integers(min_value=0, max_value=4), share=st.floats(min_value=0.0, max_value=1.0))
    def pay(self, index, share):
        agent = self.agents[index % len(self.agents)]
        self.ledger.pay_demon(agent, self.ledger.balance(agent.id) * share, self.demon)

    @rule(index=st.integers(min_value=0, max_value=4), fee=amounts)
    def fee(self, index, fee):
        charge_fee(self.agents[index % len(self.agents)], self.ledger, self.demon, fee)

    @invariant()
    def conserved(self):
        assert self.ledger.conservation_residual() <= 1e-9 * max(1.0, self.ledger.total_supply)

    @invariant()
    def balances_mirror_agents(self):
        for agent in self.agents:
            assert agent.cookies == self.ledger.balance(agent.id)
            assert agent.cookies >= 0.0


LedgerMachine.TestCase.settings = settings(max_examples=50, stateful_step_count=30, deadline=None)
TestLedger = LedgerMachine.TestCase
