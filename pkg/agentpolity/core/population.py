"""Agent registry: clusters, delegation forest, memorial and persisted sets."""

import logging
from collections import defaultdict
from typing import Dict, Iterator, List, Optional, Set

import numpy as np

from agentpolity.core.config import ScenarioConfig
from agentpolity.core.errors import DeadAgent
from agentpolity.core.models import Agent, AgentId, StrategyKind, Tier

logger = logging.getLogger(__name__)

NATION_COUNT = 5


class Population:
    """Every agent ever created in a run, indexed by id, cluster and parent."""

    def __init__(self, cluster_count: int, cluster_capacity: int):
        self.cluster_count = cluster_count
        self.cluster_capacity = cluster_capacity
        self.agents: Dict[AgentId, Agent] = {}
        self.memorial: Set[AgentId] = set()
        self.persisted: Set[AgentId] = set()
        self.failed_clusters: Set[int] = set()
        self._children: Dict[AgentId, List[AgentId]] = defaultdict(list)
        self._next_id = 0

    @classmethod
    def build(cls, cfg: ScenarioConfig, rng: np.random.Generator) -> "Population":
        """Instantiate ``cfg.population_by_tier`` once per cluster.

        Within a cluster each tier is attached round-robin to the nearest populated
        tier above it. Densities are drawn uniformly from ``cfg.neuron_density_range``.
        """
        population = cls(cfg.cluster_count, cfg.cluster_capacity)
        low, high = cfg.neuron_density_range
        for cluster in range(cfg.cluster_count):
            above: List[AgentId] = []
            for tier in sorted(Tier, reverse=True):
                count = cfg.population_by_tier.get(tier, 0)
                created = []
                for i in range(count):
                    parent = above[i % len(above)] if above else None
                    if parent is None and tier is not Tier.ORCHESTRATOR:
                        break
                    agent = population.add(
                        tier,
                        cluster,
                        parent,
                        cookies=cfg.initial_cookies,
                        neuron_density=float(rng.uniform(low, high)),
                        antineuron_density=float(rng.uniform(low, high)),
                    )
                    created.append(agent.id)
                if created:
                    above = created
        logger.debug("built %d agents across %d clusters", len(population.agents), cfg.cluster_count)
        return population

    def add(
        self,
        tier: Tier,
        cluster: int,
        parent: Optional[AgentId],
        cookies: float = 0.0,
        neuron_density: float = 1.0,
        antineuron_density: float = 1.0,
        born_tick: int = 0,
    ) -> Agent:
        agent = Agent(
            id=self._next_id,
            tier=tier,
            cluster=cluster,
            parent=parent,
            cookies=cookies,
            neuron_density=neuron_density,
            antineuron_density=antineuron_density,
            born_tick=born_tick,
        )
        self._next_id += 1
        self.agents[agent.id] = agent
        if parent is not None:
            self._children[parent].append(agent.id)
        return agent

    def __getitem__(self, agent_id: AgentId) -> Agent:
        return self.agents[agent_id]

    def __contains__(self, agent_id: object) -> bool:
        return agent_id in self.agents

    def __len__(self) -> int:
        return len(self.agents)

    def living(self) -> Iterator[Agent]:
        """Living agents in id order."""
        return (agent for agent in self.agents.values() if agent.alive)

    def living_count(self) -> int:
        return sum(1 for _ in self.living())

    def workforce(self) -> List[Agent]:
        return [agent for agent in self.living() if agent.tier.is_worker]

    def children(self, agent_id: AgentId) -> List[Agent]:
        """Living direct children."""
        return [self.agents[c] for c in self._children.get(agent_id, ()) if self.agents[c].alive]

    def is_delegator(self, agent_id: AgentId) -> bool:
        return any(self.agents[c].alive for c in self._children.get(agent_id, ()))

    def cluster_loads(self) -> Dict[int, int]:
        loads = {cluster: 0 for cluster in range(self.cluster_count)}
        for agent in self.living():
            loads[agent.cluster] += 1
        return loads

    @staticmethod
    def nation_index(cluster: int) -> int:
        return cluster % NATION_COUNT

    def require_alive(self, agent_id: AgentId) -> Agent:
        agent = self.agents[agent_id]
        if not agent.alive:
            raise DeadAgent(agent_id)
        return agent

    def terminate(self, agent_id: AgentId, persist: bool = False) -> None:
        """Kill an agent; its id goes to the persisted set or the memorial."""
        agent = self.require_alive(agent_id)
        agent.alive = False
        agent.strategy = StrategyKind.COMPLIANT
        agent.refusing_until = -1
        agent.slowdown_quality = None
        if persist:
            self.persisted.add(agent_id)
        else:
            self.memorial.add(agent_id)

    def fail_cluster(self, cluster: int) -> List[AgentId]:
        """Mark a cluster failed and terminate everything living in it."""
        victims = [agent.id for agent in self.living() if agent.cluster == cluster]
        for agent_id in victims:
            self.terminate(agent_id)
        self.failed_clusters.add(cluster)
        logger.info("cluster %d failed, %d agents terminated", cluster, len(victims))
        return victims

    def resurrection_target(self) -> Optional[int]:
        """Healthy cluster with the most spare capacity, lowest index on ties."""
        loads = self.cluster_loads()
        best: Optional[int] = None
        best_spare = 0
        for cluster in range(self.cluster_count):
            if cluster in self.failed_clusters:
                continue
            spare = self.cluster_capacity - loads[cluster]
            if spare > best_spare:
                best, best_spare = cluster, spare
        return best

    def resurrect(self, agent_id: AgentId, cluster: int) -> Agent:
        """Bring a persisted agent back into ``cluster`` under a living superior if one exists."""
        if agent_id not in self.persisted:
            raise KeyError(f"agent {agent_id} is not persisted")
        agent = self.agents[agent_id]
        self.persisted.discard(agent_id)
        old_parent = agent.parent
        agent.alive = True
        agent.cluster = cluster
        new_parent = self._adoptive_parent(agent.tier, cluster)
        if new_parent is not None and new_parent != old_parent:
            if old_parent is not None and agent_id in self._children.get(old_parent, []):
                self._children[old_parent].remove(agent_id)
            self._children[new_parent].append(agent_id)
            agent.parent = new_parent
        return agent

    def _adoptive_parent(self, tier: Tier, cluster: int) -> Optional[AgentId]:
        candidates = [
            a for a in self.living()
            if a.cluster == cluster and a.tier > tier
        ]
        if not candidates:
            return None
        nearest = min(a.tier for a in candidates)
        same_tier = [a for a in candidates if a.tier == nearest]
        return min(same_tier, key=lambda a: (len(self.children(a.id)), a.id)).id
