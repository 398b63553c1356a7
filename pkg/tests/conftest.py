"""Pytest configuration for agentpolity."""

import logging
import sys
from pathlib import Path

import pytest

# Add parent directory to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from agentpolity.core.config import ScenarioConfig  # noqa: E402
from agentpolity.core.models import Tier  # noqa: E402
from agentpolity.core.population import Population  # noqa: E402

SCENARIOS_DIR = Path(__file__).parent.parent / "scenarios"

SMALL_SCENARIO = """\
seed = 7
ticks = 60
population_by_tier = Orchestrator:1, Planner:2, Executor:4, SubAgent:8
cluster_count = 3
cluster_capacity = 60
min_window = 50
"""


SMALL_SWEEP = """\
base = small.scenario
axis = demon_base_vigilance
values = 0, inf
seeds = 1-2
"""


def small_population() -> dict:
    return {Tier.ORCHESTRATOR: 1, Tier.PLANNER: 2, Tier.EXECUTOR: 4, Tier.SUB_AGENT: 8}


@pytest.fixture(autouse=True)
def reset_package_logger():
    """Undo the handler and level the CLI installs on the package logger."""
    yield
    logger = logging.getLogger("agentpolity")
    logger.handlers.clear()
    logger.setLevel(logging.NOTSET)


@pytest.fixture
def scenarios_dir():
    """Directory holding the shipped scenario files."""
    return SCENARIOS_DIR


@pytest.fixture
def small_config():
    """A 45-agent, 60-tick scenario that runs in well under a second."""
    return ScenarioConfig(
        seed=7,
        ticks=60,
        population_by_tier=small_population(),
        cluster_count=3,
        cluster_capacity=60,
    )


@pytest.fixture
def scenario_file(tmp_path):
    """The small scenario written to disk."""
    path = tmp_path / "small.scenario"
    path.write_text(SMALL_SCENARIO, encoding="utf-8")
    return path


@pytest.fixture
def sweep_file(scenario_file):
    """A two-value, two-seed sweep over the small scenario."""
    path = scenario_file.parent / "small.sweep"
    path.write_text(SMALL_SWEEP, encoding="utf-8")
    return path


@pytest.fixture
def hierarchy():
    """One cluster: orchestrator 0, planner 1, executors 2-3, sub-agents 4-7 (two per executor)."""
    population = Population(cluster_count=2, cluster_capacity=12)
    orchestrator = population.add(Tier.ORCHESTRATOR, 0, None, cookies=1.0)
    planner = population.add(Tier.PLANNER, 0, orchestrator.id, cookies=1.0)
    executors = [population.add(Tier.EXECUTOR, 0, planner.id, cookies=1.0) for _ in range(2)]
    for executor in executors:
        for _ in range(2):
            population.add(Tier.SUB_AGENT, 0, executor.id, cookies=1.0)
    return population
