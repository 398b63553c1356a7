"""Tests for stability classification."""

import pytest

from agentpolity.core.classifier import StabilityClassifier, classify_stability
from agentpolity.core.config import ScenarioConfig
from agentpolity.core.errors import WindowTooShort
from agentpolity.core.models import StabilityClass, TickMetrics


def window(length=50, **fields):
    return [TickMetrics(tick=t, **fields) for t in range(length)]


class TestStabilityClassifier:
    """Test the ordered classification checks."""

    @pytest.fixture
    def classifier(self):
        """Create a classifier with default thresholds."""
        return StabilityClassifier(ScenarioConfig())

    def test_window_too_short(self, classifier):
        """Test that fewer than min_window ticks cannot be classified."""
        with pytest.raises(WindowTooShort):
            classifier.classify(window(49))

    def test_summary(self, classifier):
        """Test the window aggregates."""
        rows = window(org_count=2, mean_legitimacy=0.6, enforced=3, unenforced=1, challenges_filed=1)
        summary = classifier.summarize(rows)
        assert summary.ticks == 50
        assert summary.enforcement_rate == 0.75
        assert summary.mean_legitimacy == pytest.approx(0.6)
        assert not summary.zero_organizations
        assert summary.challenges_filed == 50

    def test_no_attempts_counts_as_full_enforcement(self, classifier):
        """Test the enforcement rate when nothing was attempted."""
        assert classifier.summarize(window()).enforcement_rate == 1.0

    def test_tyranny(self, classifier):
        """Test no organizations with every attempt enforced."""
        rows = window(org_count=0, enforced=2)
        assert classifier.classify(rows) is StabilityClass.TYRANNY

    def test_tyranny_needs_full_enforcement(self, classifier):
        """Test that one failed enforcement rules out Tyranny."""
        rows = window(org_count=0, enforced=2)
        rows[10].unenforced = 1
        assert classifier.classify(rows) is not StabilityClass.TYRANNY

    def test_revolution(self, classifier):
        """Test majority resistance after a cascade failure."""
        rows = window(org_count=3, resisting_share=0.6, failed_clusters=3, mean_legitimacy=0.1)
        assert classifier.classify(rows) is StabilityClass.REVOLUTION

    def test_resistance_without_cascade(self, classifier):
        """Test that resistance alone is not a revolution."""
        rows = window(org_count=3, resisting_share=0.9, mean_legitimacy=0.8)
        assert classifier.classify(rows) is StabilityClass.DYNAMIC_EQUILIBRIUM

    def test_anarchy(self, classifier):
        """Test low legitimacy with failing enforcement."""
        rows = window(org_count=4, mean_legitimacy=0.1, unenforced=3)
        assert classifier.classify(rows) is StabilityClass.ANARCHY

    def test_low_legitimacy_with_enforcement(self, classifier):
        """Test that enforcement above the anarchy threshold prevents Anarchy."""
        rows = window(org_count=4, mean_legitimacy=0.1, enforced=1, unenforced=3)
        assert classifier.classify(rows) is StabilityClass.DYNAMIC_EQUILIBRIUM

    def test_constitutional_democracy(self, classifier):
        """Test legitimacy, active challenges and no cascades."""
        rows = window(org_count=2, mean_legitimacy=0.7, enforced=1)
        rows[20].challenges_filed = 2
        assert classifier.classify(rows) is StabilityClass.CONSTITUTIONAL_DEMOCRACY

    def test_democracy_needs_challenges(self, classifier):
        """Test that a quiet legitimate society is a dynamic equilibrium."""
        rows = window(org_count=2, mean_legitimacy=0.7, enforced=1)
        assert classifier.classify(rows) is StabilityClass.DYNAMIC_EQUILIBRIUM

    def test_democracy_rules_out_cascades_in_window(self, classifier):
        """Test that a cascade inside the window blocks Constitutional Democracy."""
        rows = window(org_count=2, mean_legitimacy=0.7, challenges_filed=1, resisting_share=0.1)
        rows[5].cascade_failures = 1
        assert classifier.classify(rows) is StabilityClass.DYNAMIC_EQUILIBRIUM

    def test_thresholds_from_config(self):
        """Test that classification thresholds come from the scenario."""
        rows = window(org_count=2, mean_legitimacy=0.7, challenges_filed=1)
        strict = ScenarioConfig(democracy_legitimacy=0.9)
        assert classify_stability(rows, strict) is StabilityClass.DYNAMIC_EQUILIBRIUM
        assert classify_stability(rows) is StabilityClass.CONSTITUTIONAL_DEMOCRACY

    def test_min_window_from_config(self):
        """Test that a shorter minimum window admits shorter runs."""
        rows = window(10, org_count=0)
        assert classify_stability(rows, ScenarioConfig(min_window=10)) is StabilityClass.TYRANNY
