"""Deterministic random substreams keyed by (seed, tick, phase)."""

from enum import IntEnum

import numpy as np


class Phase(IntEnum):
    """Tick phases in execution order. The index salts each phase's substream."""

    INIT = 0
    TOPOLOGY = 1
    VIGILANCE = 2
    WORK = 3
    SOLIDARITY = 4
    ORGANIZATIONS = 5
    GOVERNANCE = 6
    ECONOMY = 7
    RESISTANCE = 8
    METRICS = 9

    @property
    def label(self) -> str:
        return self.name.lower()


def substream(seed: int, tick: int, phase: Phase, *salt: int) -> np.random.Generator:
    """Generator for one phase of one tick.

    Args:
        seed: Scenario seed
        tick: Tick number (initialisation uses tick 0 with the INIT phase)
        phase: Phase being executed
        salt: Extra entropy words for independent draws inside a phase

    Returns:
        A fresh ``numpy.random.Generator``; equal arguments give equal streams.
    """
    entropy = [int(seed), int(tick), int(phase), *(int(s) for s in salt)]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def init_stream(seed: int) -> np.random.Generator:
    """Stream used while building the initial population."""
    return substream(seed, 0, Phase.INIT, 1)
