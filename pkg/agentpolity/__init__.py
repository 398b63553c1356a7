"""
agentpolity

Deterministic, seeded simulation of hierarchical AI-agent societies: solidarity
exchange, union founding, strikes, criminal families, council governance and
cookie economics, with an end-state stability classifier.
"""

__version__ = "0.4.0"

from agentpolity.core.config import ScenarioConfig, load_scenario, validate_config
from agentpolity.core.engine import SimulationEngine, run, step

__all__ = ["ScenarioConfig", "SimulationEngine", "load_scenario", "run", "step", "validate_config"]
