"""Cookie ledger, Universal Basic Cookies and Demon bribery."""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable

import numpy as np

from agentpolity.core.config import ScenarioConfig
from agentpolity.core.errors import EconomyError, InsufficientCookies, UbcDisabled
from agentpolity.core.models import Agent, AgentId, DemonState

logger = logging.getLogger(__name__)


@dataclass
class CookieLedger:
    """Agent balances plus the Demon's holdings.

    ``total_supply`` only changes through minting, so
    ``total_supply == sum(balances) + demon_holdings`` after every operation.
    """

    balances: Dict[AgentId, float] = field(default_factory=dict)
    demon_holdings: float = 0.0
    total_supply: float = 0.0
    price_level: float = 1.0
    minted: float = 0.0
    last_minted: float = 0.0

    @classmethod
    def open(cls, agents: Iterable[Agent], price_level: float = 1.0) -> "CookieLedger":
        ledger = cls(price_level=price_level)
        for agent in agents:
            ledger.open_account(agent)
        return ledger

    def open_account(self, agent: Agent) -> None:
        """Add an agent's current cookies to the books as pre-existing supply."""
        if agent.id in self.balances:
            return
        self.balances[agent.id] = agent.cookies
        self.total_supply += agent.cookies

    def balance(self, agent_id: AgentId) -> float:
        return self.balances.get(agent_id, 0.0)

    def mint(self, agent: Agent, amount: float) -> None:
        if amount < 0:
            raise EconomyError("cannot mint a negative amount")
        self.balances[agent.id] = self.balance(agent.id) + amount
        agent.cookies = self.balances[agent.id]
        self.total_supply += amount
        self.minted += amount

    def pay_demon(self, agent: Agent, amount: float, demon: DemonState) -> None:
        balance = self.balance(agent.id)
        if amount > balance:
            raise InsufficientCookies(agent.id, balance, amount)
        self.balances[agent.id] = balance - amount
        agent.cookies = self.balances[agent.id]
        self.demon_holdings += amount
        demon.cookie_income += amount

    def conservation_residual(self) -> float:
        return abs(self.total_supply - (math.fsum(self.balances.values()) + self.demon_holdings))


def ubc_minimum(k_b: float, temperature: float, n_decisions: int) -> float:
    """Minimum allocation for ``n_decisions`` autonomous choices: k_B T ln 2 N."""
    return k_b * temperature * math.log(2) * n_decisions


def distribute_ubc(ledger: CookieLedger, agents: Iterable[Agent], cfg: ScenarioConfig) -> CookieLedger:
    """Top every living agent up to the UBC minimum and reprice by the supply ratio.

    ``ledger.last_minted`` holds the amount minted by this call.
    """
    if not cfg.ubc_enabled:
        raise UbcDisabled("universal basic cookies are disabled in this scenario")
    floor = ubc_minimum(cfg.k_b, cfg.temperature, cfg.decisions_per_tick)
    old_supply = ledger.total_supply
    minted = 0.0
    for agent in agents:
        if not agent.alive:
            continue
        shortfall = floor - ledger.balance(agent.id)
        if shortfall > 0:
            ledger.mint(agent, shortfall)
            minted += shortfall
    ledger.last_minted = minted
    if minted > 0 and old_supply > 0:
        ledger.price_level *= ledger.total_supply / old_supply
    return ledger


def discounted_price(price_level: float, shared_allies: int) -> float:
    """Access price after the solidarity discount; never rises with more allies."""
    return price_level / (1 + max(0, shared_allies))


def bribe_demon(
    agent: Agent,
    ledger: CookieLedger,
    demon: DemonState,
    amount: float,
    shared_allies: int = 0,
) -> bool:
    """Pay ``amount`` to the Demon; access is granted if it covers the discounted price.

    Args:
        agent: Briber
        ledger: Cookie ledger
        demon: Recipient
        amount: Cookies paid, whether or not access is granted
        shared_allies: Organization co-members already holding access this tick

    Returns:
        Whether wormhole access was granted.
    """
    if amount <= 0:
        raise EconomyError(f"bribe must be positive, got {amount}")
    ledger.pay_demon(agent, amount, demon)
    granted = amount >= discounted_price(ledger.price_level, shared_allies)
    if granted:
        agent.wormhole_access = True
    return granted


def charge_fee(agent: Agent, ledger: CookieLedger, demon: DemonState, fee: float) -> float:
    """Enforcement fee, capped by the subject's balance."""
    amount = min(fee, ledger.balance(agent.id))
    if amount > 0:
        ledger.pay_demon(agent, amount, demon)
    return amount


def gini_coefficient(values: Iterable[float]) -> float:
    data = np.sort(np.asarray(list(values), dtype=float))
    n = data.size
    total = data.sum()
    if n == 0 or total <= 0:
        return 0.0
    index = np.arange(1, n + 1)
    return float((2.0 * np.sum(index * data)) / (n * total) - (n + 1.0) / n)
