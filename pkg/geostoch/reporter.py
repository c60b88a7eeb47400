"""Terminal, CSV, JSON and HTML reporting for experiment runs."""

import csv
import json
import math
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

import numpy as np
from jinja2 import Environment, FileSystemLoader, select_autoescape
from rich.console import Console
from rich.table import Table

from geostoch import __author__ as DEFAULT_REPORT_AUTHOR
from geostoch.results import ExperimentResult, RunManifest

RESULTS_CSV = "results.csv"
MANIFEST_JSON = "manifest.json"
MANIFEST_HTML = "manifest.html"


def _plain(value: Any) -> Any:
    """JSON-safe copy: numpy scalars to Python, tuples to lists, non-finite floats to None."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        f = float(value)
        return f if math.isfinite(f) else None
    if isinstance(value, (complex, np.complexfloating)):
        return [_plain(value.real), _plain(value.imag)]
    return value


def _cell(value: Any) -> str:
    """CSV cell text; floats use repr so reruns are byte-identical."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def _fmt(value: Any) -> str:
    if value is None:
        return "-"
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.4g}"
    return str(value)


def report_terminal(manifest: RunManifest, console: Console | None = None) -> None:
    """Print a per-criterion summary table and the overall verdict."""
    out = console or Console()
    out.print(f"\n[bold]{manifest.experiment}[/bold] [dim]({manifest.theorem})[/dim]\n")
    table = Table(title="Acceptance criteria")
    table.add_column("Criterion", style="cyan")
    table.add_column("Value", justify="right")
    table.add_column("Bound", style="dim")
    table.add_column("Result", justify="center")
    for c in manifest.criteria:
        table.add_row(c.name, _fmt(c.value), c.bound, "[green]PASS[/green]" if c.passed else "[red]FAIL[/red]")
    out.print(table)
    total = manifest.timings.get("total_s")
    took = f" in {total:.2f}s" if total is not None else ""
    if manifest.passed:
        out.print(f"[green]PASS[/green] {manifest.experiment}{took}")
    else:
        failed = sum(1 for c in manifest.criteria if not c.passed)
        out.print(f"[red]FAIL[/red] {manifest.experiment}: {failed} criterion(s) failed{took}")


def report_csv(result: ExperimentResult, output_path: Path) -> None:
    """Write result rows as CSV with the runner's column order (no timings, so reruns match byte for byte)."""
    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    with output_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(result.columns)
        for row in result.rows:
            writer.writerow([_cell(row.get(col)) for col in result.columns])


def report_json(manifest: RunManifest, output_path: Path) -> None:
    """Write the run manifest for CI pipelines."""
    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    output_path.write_text(json.dumps(_plain(manifest.to_dict()), indent=2), encoding="utf-8")


def report_html(
    manifest: RunManifest,
    result: ExperimentResult,
    output_path: Path,
    template_dir: Path | None = None,
    *,
    generated_at: datetime | None = None,
    report_author: str | None = None,
) -> None:
    """Render the run manifest and result rows with the Jinja2 template."""
    if template_dir is None:
        template_dir = Path(__file__).resolve().parent / "templates"
    env = Environment(
        loader=FileSystemLoader(str(template_dir)),
        autoescape=select_autoescape(["html", "xml", "jinja"]),
    )
    template = env.get_template("manifest.html.jinja")
    now = generated_at or datetime.now(timezone.utc)
    html = template.render(
        manifest=_plain(manifest.to_dict()),
        columns=result.columns,
        rows=[[_fmt(row.get(col)) for col in result.columns] for row in result.rows],
        failed_count=sum(1 for c in manifest.criteria if not c.passed),
        generated_at=now,
        generated_at_year=now.strftime("%Y"),
        report_author=report_author or DEFAULT_REPORT_AUTHOR,
    )
    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    output_path.write_text(html, encoding="utf-8")
