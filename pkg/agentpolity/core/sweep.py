"""Parameter sweeps: one axis of a base scenario crossed with a list of seeds."""

import asyncio
import csv
import logging
from concurrent.futures import Executor, ProcessPoolExecutor
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, Field, InstanceOf, ValidationError, field_validator, model_validator

from agentpolity.core.config import (
    FIELD_NAMES,
    ScenarioConfig,
    load_scenario,
    parse_field_value,
    validate_config,
)
from agentpolity.core.errors import ConfigError, InvalidSweep, SimulationError

logger = logging.getLogger(__name__)

AGGREGATE_FILE = "aggregate.csv"
AGGREGATE_COLUMNS = ("axis_value", "seed", "classification", "mean_legitimacy", "final_price_level", "status")

_SWEEP_KEYS = ("base", "axis", "values", "seeds", "workers")
_NON_NUMERIC = {
    "population_by_tier", "neuron_density_range", "criminal_families", "preseeded_unions",
    "nations", "recursive_strike_clusters", "great_refusal_union", "recursive_strike_union",
    "slowdown_union",
}


class SweepRow(BaseModel):
    axis_value: str
    seed: int
    classification: str = ""
    mean_legitimacy: Optional[float] = None
    final_price_level: Optional[float] = None
    status: str = "completed"


class SweepSpec(BaseModel):
    """A base scenario, one axis to vary, and the seeds to run each value with."""

    base: InstanceOf[ScenarioConfig]
    axis: str
    values: List[str] = Field(min_length=1)
    seeds: List[int] = Field(min_length=1)
    workers: int = Field(default=1, ge=1)

    @field_validator("axis")
    @classmethod
    def _axis_is_numeric_field(cls, axis: str) -> str:
        if axis not in FIELD_NAMES:
            raise ValueError(f"unknown config field {axis!r}")
        if axis in _NON_NUMERIC or axis == "seed":
            raise ValueError(f"{axis} is not a numeric or boolean field")
        return axis

    @model_validator(mode="after")
    def _values_parse(self) -> "SweepSpec":
        for value in self.values:
            parse_field_value(self.axis, value)
        return self

    def runs(self) -> List[Tuple[str, int]]:
        return [(value, seed) for value in self.values for seed in self.seeds]

    def config_for(self, value: str, seed: int) -> ScenarioConfig:
        return self.base.with_value(self.axis, value).with_value("seed", seed)


def _parse_seeds(text: str) -> List[int]:
    seeds: List[int] = []
    for item in (part.strip() for part in text.split(",")):
        if not item:
            continue
        if "-" in item:
            low, high = (int(x) for x in item.split("-", 1))
            if high < low:
                raise ValueError(f"empty seed range {item!r}")
            seeds.extend(range(low, high + 1))
        else:
            seeds.append(int(item))
    return seeds


def parse_sweep(text: str, base_dir: Union[str, Path] = ".") -> SweepSpec:
    """Parse a flat ``key = value`` sweep file; ``base`` is relative to ``base_dir``."""
    raw: Dict[str, str] = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = (part.strip() for part in line.partition("="))
        if not sep or key not in _SWEEP_KEYS:
            raise InvalidSweep(f"line {line_no}: expected one of {', '.join(_SWEEP_KEYS)}")
        if key in raw:
            raise InvalidSweep(f"line {line_no}: duplicate key {key!r}")
        raw[key] = value
    missing = [k for k in ("base", "axis", "values", "seeds") if k not in raw]
    if missing:
        raise InvalidSweep(f"missing {', '.join(missing)}")

    try:
        base = validate_config(load_scenario(Path(base_dir) / raw["base"]))
        fields: Dict[str, Any] = {
            "base": base,
            "axis": raw["axis"],
            "values": [v.strip() for v in raw["values"].split(",") if v.strip()],
            "seeds": _parse_seeds(raw["seeds"]),
        }
        if "workers" in raw:
            fields["workers"] = int(raw["workers"])
        spec = SweepSpec(**fields)
        for value, seed in spec.runs():
            validate_config(spec.config_for(value, seed))
    except (ConfigError, ValidationError, ValueError) as e:
        raise InvalidSweep(str(e)) from e
    return spec


def load_sweep(path: Union[str, Path]) -> SweepSpec:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise InvalidSweep(f"cannot read {path}: {e.strerror or e}") from e
    return parse_sweep(text, path.parent)


def run_directory(out_dir: Union[str, Path], axis: str, value: str, seed: int) -> Path:
    return Path(out_dir) / f"{axis}={value}" / f"seed-{seed}"


def execute_run(cfg: ScenarioConfig, value: str, run_dir: str) -> Dict[str, Any]:
    """Run one sweep point; failures are reported in the row, never raised."""
    from agentpolity.core.engine import run

    row = SweepRow(axis_value=value, seed=cfg.seed)
    try:
        report = run(cfg, run_dir)
    except SimulationError as e:
        logger.error("run %s seed %d failed: %s", value, cfg.seed, e)
        row.status = "failed"
        return row.model_dump()
    except Exception as e:
        logger.exception("run %s seed %d crashed: %s", value, cfg.seed, e)
        row.status = "failed"
        return row.model_dump()
    row.classification = report.classification.value if report.classification else ""
    row.mean_legitimacy = report.window_legitimacy
    row.final_price_level = report.final_price_level
    return row.model_dump()


async def run_sweep(
    spec: SweepSpec,
    out_dir: Union[str, Path],
    workers: Optional[int] = None,
) -> List[SweepRow]:
    """
    Run every (value, seed) pair on a bounded pool and write ``aggregate.csv``.

    Args:
        spec: Sweep to run
        out_dir: Root directory for per-run artifacts and the aggregate
        workers: Pool size; overrides ``spec.workers``. 1 runs inline.

    Returns:
        Rows in (value order, seed order), independent of completion order.
    """
    workers = workers or spec.workers
    out_dir = Path(out_dir)
    semaphore = asyncio.Semaphore(workers)
    loop = asyncio.get_running_loop()
    executor: Optional[Executor] = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None

    async def one(value: str, seed: int) -> Dict[str, Any]:
        cfg = spec.config_for(value, seed)
        run_dir = str(run_directory(out_dir, spec.axis, value, seed))
        async with semaphore:
            if executor is None:
                return execute_run(cfg, value, run_dir)
            return await loop.run_in_executor(executor, execute_run, cfg, value, run_dir)

    try:
        results = await asyncio.gather(*(one(value, seed) for value, seed in spec.runs()))
    finally:
        if executor is not None:
            executor.shutdown(wait=True)

    rows = [SweepRow(**result) for result in results]
    write_aggregate(rows, out_dir / AGGREGATE_FILE)
    failed = sum(1 for row in rows if row.status != "completed")
    logger.info("sweep finished: %d runs, %d failed", len(rows), failed)
    return rows


def write_aggregate(rows: List[SweepRow], path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(AGGREGATE_COLUMNS)
        for row in rows:
            writer.writerow([
                row.axis_value,
                row.seed,
                row.classification,
                "" if row.mean_legitimacy is None else repr(row.mean_legitimacy),
                "" if row.final_price_level is None else repr(row.final_price_level),
                row.status,
            ])
    return path
