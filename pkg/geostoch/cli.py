"""CLI entry point for geostoch."""

from pathlib import Path

import click
from rich.console import Console
from rich.table import Table

from geostoch import __version__
from geostoch.config import parse_overrides
from geostoch.errors import ConfigError, ContractViolation, RegistryError, UnsupportedError
from geostoch.experiments import configure, list_experiments, run_experiment
from geostoch.log import configure_logging
from geostoch.reporter import report_terminal
from geostoch.utils import resolve_path

# Exit codes: 0 all criteria pass, 1 a criterion failed, 2 bad configuration.
EXIT_FAILED = 1
EXIT_USAGE = 2


def _usage_error(e: Exception) -> click.UsageError:
    if isinstance(e, RegistryError):
        return click.UsageError(f"{e.kind}: unknown key {e.key!r}; valid keys: {', '.join(e.valid)}")
    return click.UsageError(str(e))


@click.group()
@click.version_option(__version__, prog_name="geostoch")
def cli() -> None:
    """geostoch: numerical experiments for P-parameterized stochastic integrals of 1-forms."""


@cli.command("run")
@click.argument("config", required=False, type=str, default=None)
@click.option(
    "--set",
    "overrides",
    multiple=True,
    metavar="KEY=VALUE",
    help="Override a config key (repeatable); flags win over the config file.",
)
@click.option(
    "--report",
    type=click.Choice(["html", "json", "none"], case_sensitive=False),
    default=None,
    help="Artifacts: 'json' writes results.csv + manifest.json; 'html' also writes manifest.html; 'none' is terminal-only.",
)
@click.option("--verbose", "-v", is_flag=True, help="Debug logging (ensembles, cut-locus counts, slopes).")
def run(config: str | None, overrides: tuple[str, ...], report: str | None, verbose: bool) -> None:
    """Run one experiment from a key = value CONFIG file. GEOSTOCH_THREADS caps worker threads."""
    console = Console()
    configure_logging(verbose)

    config_path: Path | None = None
    if config is not None:
        config_path = resolve_path(config)
        if not config_path.exists():
            console.print(f"[red]Error:[/red] File not found: {config_path}")
            raise SystemExit(EXIT_USAGE)
    try:
        flags = parse_overrides(overrides)
        if report:
            flags["report"] = report.lower()
        cfg = configure(config_path, flags)
        manifest = run_experiment(cfg)
    except (ConfigError, RegistryError) as e:
        raise _usage_error(e) from None
    except (ContractViolation, UnsupportedError) as e:
        console.print(f"[red]Error:[/red] {e}")
        raise SystemExit(EXIT_USAGE)

    report_terminal(manifest, console)
    if "results" in manifest.artifacts:
        console.print(f"[green]Results written to[/green] {manifest.artifacts['results']}")
        console.print(f"[green]Manifest written to[/green] {manifest.artifacts['manifest']}")
    if "html" in manifest.artifacts:
        console.print(f"[green]HTML manifest written to[/green] {manifest.artifacts['html']}")
    if not manifest.passed:
        raise SystemExit(EXIT_FAILED)


@cli.command("list")
def list_cmd() -> None:
    """List the experiment catalog: names, the statement each checks, and the keys it reads."""
    console = Console()
    table = Table(title="Experiments")
    table.add_column("Name", style="cyan", no_wrap=True)
    table.add_column("Checks", style="white")
    table.add_column("Keys", style="dim")
    for exp in list_experiments():
        table.add_row(exp.name, exp.theorem, ", ".join(exp.required))
    console.print(table)


def main() -> None:
    """Entry point for console_script."""
    cli()


if __name__ == "__main__":
    main()
