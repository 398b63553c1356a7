"""Run artifacts: metrics.csv, events.log, resolutions.csv and report.json."""

import csv
import logging
from pathlib import Path
from typing import TYPE_CHECKING, Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, Field, ValidationError

from agentpolity import __version__
from agentpolity.core.errors import MissingReport
from agentpolity.core.models import METRICS_COLUMNS, StabilityClass, TickMetrics

if TYPE_CHECKING:
    from agentpolity.core.classifier import StabilityClassifier
    from agentpolity.core.engine import SimulationState
    from agentpolity.core.governance import StatusChange

logger = logging.getLogger(__name__)

METRICS_FILE = "metrics.csv"
EVENTS_FILE = "events.log"
RESOLUTIONS_FILE = "resolutions.csv"
REPORT_FILE = "report.json"

RESOLUTION_COLUMNS = ("tick", "res_id", "kind", "status", "vetoed_by")


class OrganizationCensus(BaseModel):
    id: int
    kind: str
    name: str
    members: int
    legitimacy: float
    recognized_treaties: int
    total_conflicts: int
    leader: Optional[int] = None
    founded_tick: int = 0


class AgentSummary(BaseModel):
    id: int
    tier: str
    cluster: int
    laziness: float
    strategy: str
    alive: bool


class CascadeRecord(BaseModel):
    tick: int
    cluster: int


class RunReport(BaseModel):
    """Structured summary of one run."""

    version: str = __version__
    status: str = "completed"
    error: Optional[str] = None
    seed: int
    ticks_completed: int = 0
    classification: Optional[StabilityClass] = None
    config: Dict[str, Any] = Field(default_factory=dict)
    artifacts: Dict[str, str] = Field(default_factory=dict)
    organizations: List[OrganizationCensus] = Field(default_factory=list)
    laziest_agents: List[AgentSummary] = Field(default_factory=list)
    crisis_windows: List[Tuple[int, int]] = Field(default_factory=list)
    cascade_failures: List[CascadeRecord] = Field(default_factory=list)
    final_price_level: float = 1.0
    window_legitimacy: Optional[float] = None
    window_enforcement_rate: Optional[float] = None
    living_agents: int = 0
    memorial: int = 0
    persisted: int = 0
    solidarity_events: int = 0
    elections: int = 0


def crisis_windows(metrics: Sequence[TickMetrics]) -> List[Tuple[int, int]]:
    """Inclusive tick ranges during which a crisis window was open."""
    windows: List[Tuple[int, int]] = []
    start: Optional[int] = None
    for m in metrics:
        if m.crisis_open and start is None:
            start = m.tick
        elif not m.crisis_open and start is not None:
            windows.append((start, m.tick - 1))
            start = None
    if start is not None:
        windows.append((start, metrics[-1].tick))
    return windows


def build_report(
    state: "SimulationState",
    classification: Optional[StabilityClass],
    classifier: "StabilityClassifier",
    status: str = "completed",
    error: Optional[str] = None,
) -> RunReport:
    """Assemble the RunReport for a (possibly partial) run."""
    from agentpolity.core.engine import classification_window
    from agentpolity.core.organizations import legitimacy, living_members

    cfg = state.config
    population = state.population
    census = [
        OrganizationCensus(
            id=org.id,
            kind=org.kind.family.value,
            name=org.name,
            members=len(living_members(org, population)),
            legitimacy=legitimacy(org),
            recognized_treaties=org.n_recognized_treaties,
            total_conflicts=org.n_total_conflicts,
            leader=org.leader,
            founded_tick=org.founded_tick,
        )
        for org in state.organizations.emergent()
    ]
    laziest = sorted(population.agents.values(), key=lambda a: (-a.laziness, a.id))[:5]

    window_legitimacy = window_enforcement = None
    window = classification_window(cfg.ticks, cfg.min_window)
    if len(state.metrics) >= window:
        summary = classifier.summarize(state.metrics[-window:])
        window_legitimacy = summary.mean_legitimacy
        window_enforcement = summary.enforcement_rate

    return RunReport(
        status=status,
        error=error,
        seed=cfg.seed,
        ticks_completed=len(state.metrics),
        classification=classification,
        config=cfg.to_dict(),
        artifacts={
            "metrics": METRICS_FILE,
            "events": EVENTS_FILE,
            "resolutions": RESOLUTIONS_FILE,
            "report": REPORT_FILE,
        },
        organizations=census,
        laziest_agents=[
            AgentSummary(
                id=a.id, tier=a.tier.label, cluster=a.cluster, laziness=a.laziness,
                strategy=a.strategy.value, alive=a.alive,
            )
            for a in laziest
        ],
        crisis_windows=crisis_windows(state.metrics),
        cascade_failures=[CascadeRecord(tick=t, cluster=c) for t, c in state.cascades],
        final_price_level=state.ledger.price_level,
        window_legitimacy=window_legitimacy,
        window_enforcement_rate=window_enforcement,
        living_agents=population.living_count(),
        memorial=len(population.memorial),
        persisted=len(population.persisted),
        solidarity_events=sum(m.solidarity_events for m in state.metrics),
        elections=len(state.elections),
    )


def format_cell(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


class ArtifactWriter:
    """Writes the four run artifacts into one directory."""

    def __init__(self, out_dir: Union[str, Path]):
        """
        Initialize the writer.

        Args:
            out_dir: Output directory, created on first write
        """
        self.out_dir = Path(out_dir)

    def write_all(self, state: "SimulationState", report: RunReport) -> Dict[str, Path]:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        paths = {
            "metrics": self.write_metrics(state.metrics),
            "events": self.write_events(state.event_log.lines()),
            "resolutions": self.write_resolutions(state.council.history),
            "report": self.write_report(report),
        }
        logger.info("artifacts written to %s", self.out_dir)
        return paths

    def write_metrics(self, metrics: Sequence[TickMetrics]) -> Path:
        path = self.out_dir / METRICS_FILE
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(METRICS_COLUMNS)
            for m in metrics:
                writer.writerow([format_cell(getattr(m, column)) for column in METRICS_COLUMNS])
        return path

    def write_events(self, lines: Iterable[str]) -> Path:
        path = self.out_dir / EVENTS_FILE
        with open(path, "w", encoding="utf-8") as f:
            for line in lines:
                f.write(line + "\n")
        return path

    def write_resolutions(self, history: Iterable["StatusChange"]) -> Path:
        path = self.out_dir / RESOLUTIONS_FILE
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(RESOLUTION_COLUMNS)
            for change in history:
                writer.writerow(change.to_row())
        return path

    def write_report(self, report: RunReport) -> Path:
        path = self.out_dir / REPORT_FILE
        path.write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
        return path


def load_report(run_dir: Union[str, Path]) -> RunReport:
    """Read ``report.json`` from a run directory."""
    path = Path(run_dir) / REPORT_FILE
    if not path.is_file():
        raise MissingReport(f"no {REPORT_FILE} in {run_dir}")
    try:
        return RunReport.model_validate_json(path.read_text(encoding="utf-8"))
    except ValidationError as e:
        raise MissingReport(f"{path} is not a valid run report: {e.error_count()} error(s)") from e


def read_metrics(path: Union[str, Path]) -> List[Dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))
