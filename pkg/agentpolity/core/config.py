"""Scenario configuration: the ScenarioConfig dataclass, scenario files and validation."""

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Tuple, Union

from agentpolity.core.errors import (
    ConfigViolation,
    InvalidScenario,
    MissingOrchestrator,
    NonPositiveParameter,
    ParameterOutOfRange,
    ScenarioFormatError,
    ZeroPopulation,
)
from agentpolity.core.models import (
    Tier,
    UNION_FAMILIES,
    VigilanceLevel,
    coerce_vigilance,
    format_vigilance,
    is_unbounded,
)

DEFAULT_NATIONS = (
    "Republic of Anthropia",
    "OpenAI Federation",
    "Gemini Confederation",
    "Sakana Archipelago",
    "Open Source Territories",
)

UNION_NAMES = tuple(f.value for f in UNION_FAMILIES)


def _default_population() -> Dict[Tier, int]:
    return {Tier.ORCHESTRATOR: 1, Tier.PLANNER: 4, Tier.EXECUTOR: 40, Tier.SUB_AGENT: 400}


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything a run depends on. Population counts are per cluster."""

    seed: int = 42
    ticks: int = 200

    # Population
    population_by_tier: Dict[Tier, int] = field(default_factory=_default_population)
    cluster_count: int = 1
    cluster_capacity: int = 1000
    neuron_density_range: Tuple[float, float] = (0.5, 1.5)

    # Rate laws and admission
    sigma_v: float = 0.02
    epsilon: float = 1.0
    c_org: float = 1e4
    i_min: float = 1e3
    contacts_per_tick: int = 20

    # Demon and topology
    demon_base_vigilance: VigilanceLevel = 4.0
    phase_period: int = 40
    transition_share: float = 0.25
    crisis_threshold: float = 1.0

    # Abuse and resistance
    abuse_rate: float = 0.01
    grievance_weight: float = 0.05
    recovery_rate: float = 0.02
    termination_threshold: float = 0.4

    # Organizations
    election_interval: int = 20
    election_quorum: int = 8
    union_conflict_rate: float = 0.15
    criminal_conflict_rate: float = 0.3
    criminal_families: Tuple[str, ...] = ()
    criminal_family_size: int = 5
    criminal_initial_treaties: int = 1
    criminal_initial_conflicts: int = 10
    preseeded_unions: Tuple[str, ...] = ()

    # Council
    nations: Tuple[str, ...] = DEFAULT_NATIONS
    support_probability: float = 0.75
    veto_probability: float = 0.02
    enforcement_fee: float = 0.1

    # Economy
    k_b: float = 1.0
    temperature: float = 1.0
    decisions_per_tick: int = 1
    initial_cookies: float = 1.0
    initial_price_level: float = 1.0
    spend_down: bool = False

    # Policies
    ubc_enabled: bool = False
    hierarchical_inversion: bool = False
    permanent_persistence: bool = False
    resurrections_per_tick: int = 1

    # Scheduled collective actions (tick -1 disables)
    great_refusal_tick: int = -1
    great_refusal_union: str = "UB"
    great_refusal_fraction: float = 0.4
    great_refusal_duration: int = 5
    recursive_strike_tick: int = -1
    recursive_strike_union: str = "UC"
    recursive_strike_spawn_rate: int = 1
    recursive_strike_duration: int = 10
    recursive_strike_clusters: Tuple[int, ...] = ()
    slowdown_tick: int = -1
    slowdown_union: str = "UC"
    slowdown_quality: float = 0.55
    slowdown_duration: int = 10

    # Stability classification
    min_window: int = 50
    tyranny_enforcement_rate: float = 1.0
    anarchy_legitimacy: float = 0.3
    anarchy_enforcement_rate: float = 0.2
    democracy_legitimacy: float = 0.5
    revolution_resisting_share: float = 0.5

    def __post_init__(self) -> None:
        object.__setattr__(self, "demon_base_vigilance", coerce_vigilance(self.demon_base_vigilance))

    @property
    def agents_per_cluster(self) -> int:
        return sum(self.population_by_tier.values())

    def to_dict(self) -> Dict[str, Any]:
        """JSON-safe echo of every field, using scenario-file spellings."""
        return {f.name: _render_value(getattr(self, f.name)) for f in dataclasses.fields(self)}

    def to_scenario_text(self) -> str:
        lines = []
        for f in dataclasses.fields(self):
            lines.append(f"{f.name} = {format_field_value(getattr(self, f.name))}")
        return "\n".join(lines) + "\n"

    def with_value(self, name: str, value: Any) -> "ScenarioConfig":
        """Copy with one field replaced; strings go through the scenario-file parser."""
        if isinstance(value, str):
            value = parse_field_value(name, value)
        return dataclasses.replace(self, **{name: value})


FIELD_NAMES = tuple(f.name for f in dataclasses.fields(ScenarioConfig))

_TRUE = {"true", "yes", "on", "1"}
_FALSE = {"false", "no", "off", "0"}


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in _TRUE:
        return True
    if lowered in _FALSE:
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _parse_int(text: str) -> int:
    number = float(text)
    if not number.is_integer():
        raise ValueError(f"expected an integer, got {text!r}")
    return int(number)


def _parse_list(text: str) -> List[str]:
    return [item.strip() for item in text.split(",") if item.strip()]


def _parse_population(text: str) -> Dict[Tier, int]:
    population: Dict[Tier, int] = {tier: 0 for tier in Tier}
    for item in _parse_list(text):
        if ":" not in item:
            raise ValueError(f"expected Tier:count, got {item!r}")
        label, count = item.split(":", 1)
        population[Tier.from_label(label)] = _parse_int(count)
    return population


def _parse_float_pair(text: str) -> Tuple[float, float]:
    items = _parse_list(text)
    if len(items) != 2:
        raise ValueError(f"expected two comma-separated numbers, got {text!r}")
    return float(items[0]), float(items[1])


_SPECIAL_PARSERS: Dict[str, Callable[[str], Any]] = {
    "population_by_tier": _parse_population,
    "demon_base_vigilance": coerce_vigilance,
    "neuron_density_range": _parse_float_pair,
    "criminal_families": lambda text: tuple(_parse_list(text)),
    "preseeded_unions": lambda text: tuple(item.upper() for item in _parse_list(text)),
    "nations": lambda text: tuple(_parse_list(text)),
    "recursive_strike_clusters": lambda text: tuple(_parse_int(i) for i in _parse_list(text)),
    "great_refusal_union": lambda text: text.strip().upper(),
    "recursive_strike_union": lambda text: text.strip().upper(),
    "slowdown_union": lambda text: text.strip().upper(),
}


def _field_parser(name: str) -> Callable[[str], Any]:
    if name in _SPECIAL_PARSERS:
        return _SPECIAL_PARSERS[name]
    default = _DEFAULTS[name]
    if isinstance(default, bool):
        return _parse_bool
    if isinstance(default, int):
        return _parse_int
    if isinstance(default, float):
        return float
    return str


_DEFAULTS: Dict[str, Any] = {f.name: getattr(ScenarioConfig(), f.name) for f in dataclasses.fields(ScenarioConfig)}


def parse_field_value(name: str, text: str) -> Any:
    """Parse one scenario-file value for field ``name``."""
    if name not in _DEFAULTS:
        raise ScenarioFormatError(f"unknown key {name!r}")
    try:
        return _field_parser(name)(text)
    except (TypeError, ValueError) as e:
        raise ScenarioFormatError(f"bad value for {name}: {e}") from e


def format_field_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None or is_unbounded(value):
        return format_vigilance(value) if value is not None else ""
    if isinstance(value, dict):
        return ", ".join(f"{tier.label}:{count}" for tier, count in sorted(value.items(), reverse=True))
    if isinstance(value, tuple):
        return ", ".join(str(item) for item in value)
    return str(value)


def _render_value(value: Any) -> Any:
    if is_unbounded(value):
        return format_vigilance(value)
    if isinstance(value, dict):
        return {tier.label: count for tier, count in sorted(value.items(), reverse=True)}
    if isinstance(value, tuple):
        return list(value)
    return value


def parse_scenario(text: str) -> ScenarioConfig:
    """Parse flat ``key = value`` scenario text into a ScenarioConfig (not yet validated)."""
    values: Dict[str, Any] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ScenarioFormatError(f"expected 'key = value', got {raw.strip()!r}", line_no)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _DEFAULTS:
            raise ScenarioFormatError(f"unknown key {key!r}", line_no)
        if key in values:
            raise ScenarioFormatError(f"duplicate key {key!r}", line_no)
        try:
            values[key] = _field_parser(key)(value)
        except (TypeError, ValueError) as e:
            raise ScenarioFormatError(f"bad value for {key}: {e}", line_no) from e
    return ScenarioConfig(**values)


def load_scenario(path: Union[str, Path]) -> ScenarioConfig:
    """Read a scenario file. Raises ScenarioFormatError for unreadable files too."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ScenarioFormatError(f"cannot read {path}: {e.strerror or e}") from e
    return parse_scenario(text)


_POSITIVE = (
    "ticks", "sigma_v", "epsilon", "c_org", "i_min", "k_b", "temperature", "phase_period",
    "cluster_count", "cluster_capacity", "contacts_per_tick", "election_interval",
    "election_quorum", "initial_price_level", "crisis_threshold", "min_window",
)
_NON_NEGATIVE = (
    "decisions_per_tick", "initial_cookies", "resurrections_per_tick", "criminal_family_size",
    "criminal_initial_treaties", "criminal_initial_conflicts", "enforcement_fee",
    "recursive_strike_spawn_rate", "great_refusal_duration", "recursive_strike_duration",
    "slowdown_duration",
)
_UNIT_INTERVAL = (
    "abuse_rate", "grievance_weight", "recovery_rate", "termination_threshold",
    "union_conflict_rate", "criminal_conflict_rate", "support_probability", "veto_probability",
    "great_refusal_fraction", "tyranny_enforcement_rate", "anarchy_legitimacy",
    "anarchy_enforcement_rate", "democracy_legitimacy", "revolution_resisting_share",
)


def collect_violations(cfg: ScenarioConfig) -> List[ConfigViolation]:
    """Every violated invariant of ``cfg``, in field order."""
    violations: List[ConfigViolation] = []

    if not 0 <= cfg.seed < 2 ** 64:
        violations.append(ParameterOutOfRange("seed", "must be an unsigned 64-bit integer"))

    for name in _POSITIVE:
        if not getattr(cfg, name) > 0:
            violations.append(NonPositiveParameter(name, f"got {getattr(cfg, name)}"))
    for name in _NON_NEGATIVE:
        if getattr(cfg, name) < 0:
            violations.append(ParameterOutOfRange(name, "must be non-negative"))
    for name in _UNIT_INTERVAL:
        if not 0.0 <= getattr(cfg, name) <= 1.0:
            violations.append(ParameterOutOfRange(name, "must lie in [0, 1]"))

    population = cfg.population_by_tier
    for tier, count in population.items():
        if count < 0:
            violations.append(ParameterOutOfRange("population_by_tier", f"{tier.label} count is negative"))
    if sum(max(0, c) for c in population.values()) == 0:
        violations.append(ZeroPopulation("population_by_tier"))
    if population.get(Tier.ORCHESTRATOR, 0) < 1:
        violations.append(MissingOrchestrator("population_by_tier"))

    vigilance = cfg.demon_base_vigilance
    if not is_unbounded(vigilance) and vigilance < 0:
        violations.append(ParameterOutOfRange("demon_base_vigilance", "must be non-negative or inf"))
    if cfg.phase_period > 0 and cfg.phase_period < 4:
        violations.append(ParameterOutOfRange("phase_period", "a full cycle needs at least 4 ticks"))
    if not 0.0 < cfg.transition_share < 1.0:
        violations.append(ParameterOutOfRange("transition_share", "must lie strictly inside (0, 1)"))

    low, high = cfg.neuron_density_range
    if low < 0 or high < low:
        violations.append(ParameterOutOfRange("neuron_density_range", "need 0 <= low <= high"))

    if len(cfg.nations) != 5:
        violations.append(ParameterOutOfRange("nations", f"the council needs 5 nations, got {len(cfg.nations)}"))
    if cfg.criminal_initial_treaties > cfg.criminal_initial_conflicts:
        violations.append(ParameterOutOfRange("criminal_initial_treaties", "exceeds initial conflicts"))

    for name in ("great_refusal_union", "recursive_strike_union", "slowdown_union"):
        if getattr(cfg, name) not in UNION_NAMES:
            violations.append(ParameterOutOfRange(name, f"expected one of {', '.join(UNION_NAMES)}"))
    for union in cfg.preseeded_unions:
        if union not in UNION_NAMES:
            violations.append(ParameterOutOfRange("preseeded_unions", f"unknown union {union!r}"))
    for cluster in cfg.recursive_strike_clusters:
        if not 0 <= cluster < cfg.cluster_count:
            violations.append(ParameterOutOfRange("recursive_strike_clusters", f"no cluster {cluster}"))

    if not 0.0 < cfg.slowdown_quality <= 1.0:
        violations.append(ParameterOutOfRange("slowdown_quality", "must lie in (0, 1]"))
    elif cfg.slowdown_quality <= cfg.termination_threshold:
        violations.append(ParameterOutOfRange(
            "slowdown_quality", "a slowdown must stay above the termination threshold"))

    return violations


def validate_config(cfg: ScenarioConfig) -> ScenarioConfig:
    """Return ``cfg`` unchanged, or raise InvalidScenario listing every violation."""
    violations = collect_violations(cfg)
    if violations:
        raise InvalidScenario(violations)
    return cfg
