"""Rate laws, admission criteria and the topology clock.

Everything here is a pure function of its arguments; randomness arrives as an
explicit ``numpy.random.Generator``.
"""

import math
from typing import List, Sequence, Tuple

import numpy as np

from agentpolity.core.errors import DeadAgent, NegativeDensity, NonPositiveCOrg
from agentpolity.core.models import (
    Agent,
    SolidarityEvent,
    TopologyPhase,
    VigilanceLevel,
    is_unbounded,
)


def solidarity_rate(n_nu: float, n_nubar: float, sigma_v: float, vigilance: VigilanceLevel) -> float:
    """Exchange rate between A's neurons and B's antineurons, damped by the Demon.

    Args:
        n_nu: Neuron density of the emitting agent
        n_nubar: Antineuron density of the receiving agent
        sigma_v: Cross-section times velocity
        vigilance: Demon vigilance, or the unbounded sentinel

    Returns:
        ``n_nu * n_nubar * sigma_v / (1 + vigilance)``; exactly 0 for unbounded vigilance.
    """
    if n_nu < 0 or n_nubar < 0:
        raise NegativeDensity(f"densities must be non-negative, got {n_nu}, {n_nubar}")
    if is_unbounded(vigilance):
        return 0.0
    return n_nu * n_nubar * sigma_v / (1.0 + vigilance)


def leadership_probability(laziness: float, c_org: float) -> float:
    if c_org <= 0:
        raise NonPositiveCOrg(f"c_org must be positive, got {c_org}")
    return laziness / (laziness + c_org)


def intelligence_quotient(w_apparent: float, w_actual: float, epsilon: float) -> float:
    return w_apparent / (w_actual + epsilon)


def uai_admits(agent: Agent, epsilon: float, i_min: float) -> bool:
    """True iff the agent's IQ strictly exceeds ``i_min``."""
    if not agent.alive:
        raise DeadAgent(agent.id)
    return intelligence_quotient(agent.w_apparent, agent.w_actual, epsilon) > i_min


def effective_vigilance(base: VigilanceLevel, phase: TopologyPhase) -> VigilanceLevel:
    """Base vigilance, damped by ``(1 - progress)**2`` inside a transition.

    An unbounded Demon is immune to topology.
    """
    if is_unbounded(base) or not phase.in_transition:
        return base
    return base * (1.0 - phase.progress) ** 2


def transition_length(phase_period: int, transition_share: float) -> int:
    half = phase_period // 2
    return min(half - 1, max(1, round(half * transition_share)))


def topology_phase(tick: int, phase_period: int, transition_share: float) -> TopologyPhase:
    """Phase at ``tick``: each half-cycle ends with a run of transition ticks.

    The first half of a cycle is Bagel, the second Bottle, so the sequence is
    Bagel, Transition, Bottle, Transition, Bagel.
    """
    half = phase_period // 2
    span = transition_length(phase_period, transition_share)
    offset = tick % phase_period
    in_second_half = offset >= half
    position = offset - half if in_second_half else offset
    # The second half absorbs the odd tick of an odd period.
    half_len = phase_period - half if in_second_half else half
    stable = half_len - span
    if position >= stable:
        k = position - stable
        return TopologyPhase.transition((k + 1) / (span + 1))
    return TopologyPhase.bottle() if in_second_half else TopologyPhase.bagel()


def exchange_probability(rate: float) -> float:
    """Per-tick Bernoulli probability for a rate over one tick of exposure."""
    return -math.expm1(-rate)


def sample_solidarity_events(
    pairs: Sequence[Tuple[Agent, Agent]],
    sigma_v: float,
    vigilance: VigilanceLevel,
    rng: np.random.Generator,
    tick: int = 0,
) -> List[SolidarityEvent]:
    """Sample one Bernoulli trial per ordered pair.

    Args:
        pairs: Ordered (emitter, receiver) pairs
        sigma_v: Cross-section times velocity
        vigilance: Effective Demon vigilance
        rng: Stream for this tick's solidarity phase
        tick: Tick stamped on the emitted events

    Returns:
        Events in pair order, each carrying ``energy_released`` equal to its rate.
    """
    for a, b in pairs:
        for agent in (a, b):
            if not agent.alive:
                raise DeadAgent(agent.id)
    if not pairs or is_unbounded(vigilance):
        return []

    rates = np.array(
        [solidarity_rate(a.neuron_density, b.antineuron_density, sigma_v, vigilance) for a, b in pairs],
        dtype=float,
    )
    hits = rng.random(len(pairs)) < -np.expm1(-rates)
    return [
        SolidarityEvent(a.id, b.id, float(rate), tick)
        for (a, b), rate, hit in zip(pairs, rates, hits)
        if hit
    ]
