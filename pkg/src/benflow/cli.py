"""Command-line interface for benflow."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any

import typer
from rich.console import Console
from rich.table import Table

from benflow import __version__
from benflow.commands import (
    EXIT_CONFIG,
    EXIT_IO,
    EXIT_OK,
    EXIT_UNKNOWN_COMMAND,
    CommandResult,
    execute,
    output_dir,
)
from benflow.config import settings
from benflow.errors import ConfigError, ReportError, UnknownCommandError
from benflow.schema import RunConfig, load_config

app = typer.Typer(
    name="benflow",
    help="Variational solver and stability lab for monotone and semimonotone parabolic flows",
    add_completion=False,
)
console = Console()
err_console = Console(stderr=True)


def setup_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose or settings.debug else logging.INFO,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        force=True,
    )


def _load(config: Path, seed: int | None = None) -> RunConfig:
    """Load the config, exiting with the matching code on failure."""
    try:
        cfg = load_config(config)
    except UnknownCommandError as e:
        err_console.print(f"[red]✗[/red] {e}")
        raise typer.Exit(EXIT_UNKNOWN_COMMAND) from e
    except ConfigError as e:
        err_console.print(f"[red]✗[/red] {e}")
        raise typer.Exit(EXIT_CONFIG) from e
    if seed is not None:
        cfg = cfg.model_copy(update={"seed": seed})
    return cfg


def _format(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.6e}"
    if isinstance(value, list):
        return ", ".join(str(v) for v in value)
    return str(value)


def _print_result(result: CommandResult, target: Path) -> None:
    table = Table(title=f"benflow {result.command}")
    table.add_column("Quantity", style="cyan")
    table.add_column("Value")
    for key, value in result.summary.items():
        table.add_row(key, _format(value))
    console.print(table)
    if result.ok:
        console.print(f"[green]✓[/green] {result.command} finished; reports in {target}")
    else:
        console.print(f"[yellow]![/yellow] {result.command}: {result.message or 'checks failed'}")


@app.command()
def run(
    config: Path = typer.Option(..., "--config", "-c", help="TOML run configuration"),
    out: Path | None = typer.Option(None, "--out", "-o", help="Output directory"),
    jobs: int | None = typer.Option(
        None, "--jobs", "-j", min=1, help="Concurrent solves (default: available parallelism)"
    ),
    seed: int | None = typer.Option(None, "--seed", help="Override the config seed"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Enable debug logging"),
) -> None:
    """Run the command named in a configuration file."""
    setup_logging(verbose)
    cfg = _load(config, seed)
    target = output_dir(cfg, out)
    try:
        result = execute(cfg, target, jobs)
    except ConfigError as e:
        err_console.print(f"[red]✗[/red] {e}")
        raise typer.Exit(EXIT_CONFIG) from e
    except ReportError as e:
        err_console.print(f"[red]✗[/red] {e}")
        raise typer.Exit(EXIT_IO) from e
    _print_result(result, target)
    if result.exit_code != EXIT_OK:
        raise typer.Exit(result.exit_code)


@app.command()
def validate(
    config: Path = typer.Option(..., "--config", "-c", help="TOML run configuration"),
) -> None:
    """Check a configuration file without running it."""
    cfg = _load(config)
    console.print(f"[green]✓[/green] {config} is a valid {cfg.command} configuration "
                  f"(schema version {cfg.schema_version})")


@app.command()
def version() -> None:
    """Show version information."""
    console.print(f"benflow v{__version__}")


@app.command(name="config")
def show_config() -> None:
    """Show the process-wide numerical defaults."""
    table = Table(title="benflow settings")
    table.add_column("Setting", style="cyan")
    table.add_column("Value")
    for name, value in settings.model_dump().items():
        table.add_row(name, str(value))
    console.print(table)


if __name__ == "__main__":
    app()
