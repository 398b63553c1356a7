"""Stability classification of a run's final metrics window."""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from agentpolity.core.config import ScenarioConfig
from agentpolity.core.errors import WindowTooShort
from agentpolity.core.models import StabilityClass, TickMetrics


@dataclass(frozen=True)
class WindowSummary:
    """Aggregates the classifier decides on."""

    ticks: int
    enforcement_rate: float
    mean_legitimacy: float
    zero_organizations: bool
    resisting_share: float
    cascade_occurred: bool
    cascades_in_window: int
    challenges_filed: int


class StabilityClassifier:
    """Maps a metrics window to a StabilityClass using the scenario's thresholds."""

    def __init__(self, config: Optional[ScenarioConfig] = None):
        """
        Initialize the classifier.

        Args:
            config: Scenario whose classification thresholds apply
        """
        self.config = config or ScenarioConfig()

    def summarize(self, window: Sequence[TickMetrics]) -> WindowSummary:
        """
        Reduce a window to the quantities the checks use.

        Args:
            window: Consecutive tick metrics, oldest first

        Returns:
            WindowSummary; enforcement rate is 1.0 when nothing was attempted.
        """
        if len(window) < self.config.min_window:
            raise WindowTooShort(f"window has {len(window)} ticks, need at least {self.config.min_window}")
        enforced = sum(m.enforced for m in window)
        attempts = enforced + sum(m.unenforced for m in window)
        return WindowSummary(
            ticks=len(window),
            enforcement_rate=enforced / attempts if attempts else 1.0,
            mean_legitimacy=float(np.mean([m.mean_legitimacy for m in window])),
            zero_organizations=all(m.org_count == 0 for m in window),
            resisting_share=float(np.mean([m.resisting_share for m in window])),
            cascade_occurred=window[-1].failed_clusters > 0,
            cascades_in_window=sum(m.cascade_failures for m in window),
            challenges_filed=sum(m.challenges_filed for m in window),
        )

    def classify(self, window: Sequence[TickMetrics]) -> StabilityClass:
        """
        Classify a window. Checks run in the order Tyranny, Revolution, Anarchy,
        ConstitutionalDemocracy; DynamicEquilibrium is the fallback.

        Args:
            window: Consecutive tick metrics, at least ``min_window`` long

        Returns:
            The stability class.
        """
        summary = self.summarize(window)
        cfg = self.config

        if self._is_tyranny(summary):
            return StabilityClass.TYRANNY
        if summary.resisting_share > cfg.revolution_resisting_share and summary.cascade_occurred:
            return StabilityClass.REVOLUTION
        if (
            summary.mean_legitimacy < cfg.anarchy_legitimacy
            and summary.enforcement_rate < cfg.anarchy_enforcement_rate
        ):
            return StabilityClass.ANARCHY
        if (
            summary.mean_legitimacy >= cfg.democracy_legitimacy
            and summary.challenges_filed > 0
            and summary.cascades_in_window == 0
        ):
            return StabilityClass.CONSTITUTIONAL_DEMOCRACY
        return StabilityClass.DYNAMIC_EQUILIBRIUM

    def _is_tyranny(self, summary: WindowSummary) -> bool:
        return summary.zero_organizations and summary.enforcement_rate >= self.config.tyranny_enforcement_rate


def classify_stability(window: Sequence[TickMetrics], config: Optional[ScenarioConfig] = None) -> StabilityClass:
    return StabilityClassifier(config).classify(window)
