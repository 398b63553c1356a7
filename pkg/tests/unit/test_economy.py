"""Tests for the cookie economy."""

import math

import pytest

from agentpolity.core.config import ScenarioConfig
from agentpolity.core.economy import (
    CookieLedger,
    bribe_demon,
    charge_fee,
    discounted_price,
    distribute_ubc,
    gini_coefficient,
    ubc_minimum,
)
from agentpolity.core.errors import EconomyError, InsufficientCookies, UbcDisabled
from agentpolity.core.models import DemonState


@pytest.fixture
def ledger(hierarchy):
    return CookieLedger.open(hierarchy.living())


@pytest.fixture
def demon():
    return DemonState(4.0)


class TestUbcMinimum:
    """Test the k_B T ln 2 N allocation."""

    def test_closed_form(self):
        """Test ubc_minimum(1, 1, N) = N ln 2 for every N up to 10^6."""
        ln2 = math.log(2)
        for n in range(1_000_001):
            assert math.isclose(ubc_minimum(1.0, 1.0, n), n * ln2, rel_tol=1e-12, abs_tol=0.0)

    def test_scales_with_temperature(self):
        """Test linearity in k_B and T."""
        assert ubc_minimum(2.0, 3.0, 1) == pytest.approx(6 * math.log(2))


class TestLedger:
    """Test balances and conservation."""

    def test_open(self, ledger):
        """Test that opening books the agents' cookies as supply."""
        assert ledger.total_supply == 8.0
        assert ledger.balance(3) == 1.0
        assert ledger.conservation_residual() == 0.0

    def test_mint(self, ledger, hierarchy):
        """Test that minting grows supply and the agent's balance."""
        ledger.mint(hierarchy[4], 0.5)
        assert ledger.balance(4) == 1.5
        assert hierarchy[4].cookies == 1.5
        assert ledger.total_supply == 8.5
        assert ledger.minted == 0.5
        with pytest.raises(EconomyError):
            ledger.mint(hierarchy[4], -1.0)

    def test_pay_demon(self, ledger, hierarchy, demon):
        """Test that payments move cookies to the Demon without changing supply."""
        ledger.pay_demon(hierarchy[4], 0.25, demon)
        assert ledger.balance(4) == 0.75
        assert ledger.demon_holdings == 0.25
        assert demon.cookie_income == 0.25
        assert ledger.total_supply == 8.0
        assert ledger.conservation_residual() == 0.0

    def test_insufficient(self, ledger, hierarchy, demon):
        """Test that an agent cannot pay more than it holds."""
        with pytest.raises(InsufficientCookies) as excinfo:
            ledger.pay_demon(hierarchy[4], 2.0, demon)
        assert excinfo.value.balance == 1.0


class TestUbc:
    """Test Universal Basic Cookies."""

    def test_disabled(self, ledger, hierarchy):
        """Test that distribution requires the policy."""
        with pytest.raises(UbcDisabled):
            distribute_ubc(ledger, hierarchy.living(), ScenarioConfig())

    def test_top_up_and_reprice(self, hierarchy):
        """Test that agents below the minimum are topped up and prices follow supply."""
        for agent in hierarchy.living():
            agent.cookies = 0.5
        ledger = CookieLedger.open(hierarchy.living())
        config = ScenarioConfig(ubc_enabled=True)
        distribute_ubc(ledger, hierarchy.living(), config)

        floor = math.log(2)
        assert all(ledger.balance(a.id) == pytest.approx(floor) for a in hierarchy.living())
        assert ledger.last_minted == pytest.approx(8 * (floor - 0.5))
        assert ledger.price_level == pytest.approx(8 * floor / 4.0)

    def test_no_mint_no_reprice(self, ledger, hierarchy):
        """Test that agents above the minimum receive nothing."""
        distribute_ubc(ledger, hierarchy.living(), ScenarioConfig(ubc_enabled=True))
        assert ledger.last_minted == 0.0
        assert ledger.price_level == 1.0

    def test_dead_agents_excluded(self, hierarchy):
        """Test that only living agents receive UBC."""
        for agent in hierarchy.living():
            agent.cookies = 0.0
        ledger = CookieLedger.open(hierarchy.living())
        hierarchy.terminate(7)
        distribute_ubc(ledger, hierarchy.agents.values(), ScenarioConfig(ubc_enabled=True))
        assert ledger.balance(7) == 0.0
        assert ledger.balance(6) == pytest.approx(math.log(2))


class TestBribes:
    """Test Demon bribery and fees."""

    def test_discount(self):
        """Test that allies never raise the price."""
        assert discounted_price(1.0, 0) == 1.0
        assert discounted_price(1.0, 3) == 0.25
        assert discounted_price(2.0, -1) == 2.0

    def test_bribe_granted(self, ledger, hierarchy, demon):
        """Test that paying the price grants wormhole access."""
        assert bribe_demon(hierarchy[4], ledger, demon, 1.0)
        assert hierarchy[4].wormhole_access
        assert ledger.demon_holdings == 1.0

    def test_bribe_with_allies(self, ledger, hierarchy, demon):
        """Test the solidarity discount on access."""
        assert bribe_demon(hierarchy[4], ledger, demon, 0.5, shared_allies=1)

    def test_bribe_short(self, ledger, hierarchy, demon):
        """Test that an underpayment is kept without granting access."""
        assert not bribe_demon(hierarchy[4], ledger, demon, 0.5)
        assert not hierarchy[4].wormhole_access
        assert ledger.balance(4) == 0.5

    def test_bribe_must_be_positive(self, ledger, hierarchy, demon):
        """Test that an empty bribe is an error."""
        with pytest.raises(EconomyError):
            bribe_demon(hierarchy[4], ledger, demon, 0.0)

    def test_fee_capped_by_balance(self, ledger, hierarchy, demon):
        """Test that enforcement fees never overdraw."""
        assert charge_fee(hierarchy[4], ledger, demon, 0.4) == 0.4
        assert charge_fee(hierarchy[4], ledger, demon, 5.0) == pytest.approx(0.6)
        assert charge_fee(hierarchy[4], ledger, demon, 5.0) == 0.0
        assert ledger.conservation_residual() <= 1e-12


class TestGini:
    """Test the inequality summary."""

    def test_equal(self):
        """Test that equal balances have zero inequality."""
        assert gini_coefficient([2.0, 2.0, 2.0]) == pytest.approx(0.0)

    def test_concentrated(self):
        """Test that one holder of everything scores (n - 1) / n."""
        assert gini_coefficient([0.0, 0.0, 0.0, 4.0]) == pytest.approx(0.75)

    def test_empty(self):
        """Test degenerate inputs."""
        assert gini_coefficient([]) == 0.0
        assert gini_coefficient([0.0, 0.0]) == 0.0
