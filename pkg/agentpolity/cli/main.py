"""Main CLI entry point for agentpolity."""

import asyncio
import logging
import sys
from collections import Counter
from pathlib import Path
from typing import Any, Dict, List, NoReturn, Optional, Sequence, Tuple

import click
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table
from tabulate import tabulate

from agentpolity import __version__
from agentpolity.core.artifacts import RunReport, load_report
from agentpolity.core.config import load_scenario, validate_config
from agentpolity.core.errors import ConfigError, InvalidSweep, MissingReport, SimulationError

console = Console()
err_console = Console(stderr=True)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2

DEFAULT_OUT = Path("out")


def configure_logging(verbose: bool = False, quiet: bool = False) -> None:
    """Route the ``agentpolity`` logger through rich on standard error."""
    level = logging.ERROR if quiet else logging.DEBUG if verbose else logging.WARNING
    logger = logging.getLogger("agentpolity")
    logger.handlers.clear()
    handler = RichHandler(console=err_console, show_time=False, show_path=verbose, markup=False)
    handler.setFormatter(logging.Formatter("%(message)s"))
    logger.addHandler(handler)
    logger.setLevel(level)


def fail(message: str, code: int) -> NoReturn:
    err_console.print(f"[red]Error: {message}[/red]")
    sys.exit(code)


@click.group()
@click.version_option(version=__version__)
def main() -> None:
    """
    agentpolity - simulate AI-agent societies.

    Runs seeded scenarios of tiered agent populations and classifies where
    they end up: tyranny, anarchy, revolution, constitutional democracy or
    dynamic equilibrium.
    """


@main.command("run")
@click.argument("config_path", metavar="CONFIG", type=click.Path(path_type=Path))
@click.argument("out_dir", required=False, type=click.Path(file_okay=False, path_type=Path))
@click.option("--out", "out_option", type=click.Path(file_okay=False, path_type=Path), help="Output directory (default: out/)")
@click.option("--seed", type=click.IntRange(0, 2 ** 64 - 1), help="Override the scenario seed")
@click.option("--quiet", "-q", is_flag=True, help="Only print the classification")
@click.option("--verbose", "-v", is_flag=True, help="Debug logging")
def run_command(
    config_path: Path,
    out_dir: Optional[Path],
    out_option: Optional[Path],
    seed: Optional[int],
    quiet: bool,
    verbose: bool,
) -> None:
    """Run the scenario in CONFIG and write its artifacts."""
    configure_logging(verbose, quiet)
    from agentpolity.core.engine import run

    target = out_option or out_dir or DEFAULT_OUT
    try:
        cfg = load_scenario(config_path)
        if seed is not None:
            cfg = cfg.with_value("seed", seed)
        validate_config(cfg)
    except ConfigError as e:
        fail(str(e), EXIT_USAGE)

    if not quiet:
        console.print(f"[dim]agentpolity v{__version__}[/dim]")
        console.print(f"[dim]Scenario: {config_path} (seed {cfg.seed}, {cfg.ticks} ticks)[/dim]")

    try:
        report = run(cfg, target)
    except SimulationError as e:
        fail(str(e), EXIT_RUNTIME)
    except Exception as e:  # noqa: BLE001
        if verbose:
            err_console.print_exception()
        fail(f"unexpected {type(e).__name__}: {e}", EXIT_RUNTIME)

    label = report.classification.value if report.classification else "unclassified"
    if quiet:
        click.echo(label)
    else:
        console.print(f"Classification: [bold]{label}[/bold]")
        console.print(f"[dim]Artifacts written to {target}[/dim]")


@main.command("sweep")
@click.argument("sweep_path", metavar="SWEEP", type=click.Path(path_type=Path))
@click.argument("out_dir", required=False, type=click.Path(file_okay=False, path_type=Path))
@click.option("--out", "out_option", type=click.Path(file_okay=False, path_type=Path), help="Output directory (default: out/)")
@click.option("--workers", type=click.IntRange(min=1), help="Concurrent runs (overrides the sweep file)")
@click.option("--quiet", "-q", is_flag=True, help="Suppress the summary table")
@click.option("--verbose", "-v", is_flag=True, help="Debug logging")
def sweep_command(
    sweep_path: Path,
    out_dir: Optional[Path],
    out_option: Optional[Path],
    workers: Optional[int],
    quiet: bool,
    verbose: bool,
) -> None:
    """Run every value x seed of the sweep in SWEEP and write aggregate.csv."""
    configure_logging(verbose, quiet)
    from agentpolity.core.sweep import load_sweep, run_sweep

    target = out_option or out_dir or DEFAULT_OUT
    try:
        spec = load_sweep(sweep_path)
    except InvalidSweep as e:
        fail(str(e), EXIT_USAGE)

    try:
        rows = asyncio.run(run_sweep(spec, target, workers))
    except SimulationError as e:
        fail(str(e), EXIT_RUNTIME)

    failed = [row for row in rows if row.status != "completed"]
    if not quiet:
        counts = Counter((row.axis_value, row.classification or row.status) for row in rows)
        table = [[value, label, n] for (value, label), n in sorted(counts.items(), key=lambda kv: spec.values.index(kv[0][0]))]
        click.echo(tabulate(table, headers=[spec.axis, "classification", "runs"]))
        click.echo(f"{len(rows)} runs, {len(failed)} failed; aggregate in {Path(target) / 'aggregate.csv'}")
    if failed:
        sys.exit(EXIT_RUNTIME)


@main.command("report")
@click.argument("run_dir", type=click.Path(path_type=Path))
def report_command(run_dir: Path) -> None:
    """Summarize the run stored in RUN_DIR."""
    configure_logging()
    try:
        report = load_report(run_dir)
    except MissingReport as e:
        fail(str(e), EXIT_USAGE)
    print_report(report)


def print_table(columns: Sequence[Tuple[str, Dict[str, Any]]], rows: List[List[str]], title: Optional[str] = None) -> None:
    """Rich table on a terminal, plain tabulate text when piped or captured."""
    if not console.is_terminal:
        if title:
            click.echo(title)
        click.echo(tabulate(rows, headers=[name for name, _ in columns], disable_numparse=True))
        return
    table = Table(title=title, show_header=True, header_style="bold magenta")
    for name, options in columns:
        table.add_column(name, **options)
    for row in rows:
        table.add_row(*row)
    console.print(table)


def print_report(report: RunReport) -> None:
    label = report.classification.value if report.classification else "unclassified"
    console.print(f"Classification: [bold]{label}[/bold]")
    console.print(f"Status: {report.status} after {report.ticks_completed} ticks (seed {report.seed})")
    if report.error:
        console.print(f"[red]Error: {report.error}[/red]")

    living = [org for org in report.organizations if org.members > 0]
    console.print(f"organizations: {len(living)}")
    if report.organizations:
        print_table(
            [
                ("Organization", {"style": "cyan", "no_wrap": True}),
                ("Members", {"justify": "right"}),
                ("Λ", {"justify": "right", "style": "green"}),
                ("Conflicts", {"justify": "right"}),
                ("Leader", {"justify": "right", "style": "yellow"}),
            ],
            [
                [
                    org.name,
                    str(org.members),
                    f"{org.legitimacy:.3f}",
                    f"{org.recognized_treaties}/{org.total_conflicts}",
                    "-" if org.leader is None else str(org.leader),
                ]
                for org in report.organizations
            ],
        )

    print_table(
        [
            ("Agent", {"justify": "right", "style": "cyan"}),
            ("Tier", {}),
            ("Cluster", {"justify": "right"}),
            ("LQ", {"justify": "right", "style": "green"}),
            ("Strategy", {"style": "yellow"}),
        ],
        [
            [str(agent.id), agent.tier, str(agent.cluster), f"{agent.laziness:.1f}", agent.strategy]
            for agent in report.laziest_agents
        ],
        title="Laziest agents",
    )

    if report.crisis_windows:
        spans = ", ".join(f"{a}-{b}" for a, b in report.crisis_windows[:10])
        more = len(report.crisis_windows) - 10
        console.print(f"crisis windows: {len(report.crisis_windows)} ({spans}{' ...' if more > 0 else ''})")
    else:
        console.print("crisis windows: 0")
    console.print(f"cascade failures: {len(report.cascade_failures)}")
    for record in report.cascade_failures:
        console.print(f"  tick {record.tick}: cluster {record.cluster}")
    console.print(f"final price level: {report.final_price_level:.4f}")


if __name__ == "__main__":
    main()
