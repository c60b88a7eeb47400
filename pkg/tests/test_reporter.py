"""Tests for reporter: terminal, CSV, JSON and HTML output."""

import json
import math
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
from rich.console import Console

from geostoch.reporter import report_csv, report_html, report_json, report_terminal
from geostoch.results import Criterion, ExperimentResult, RunManifest


def _result() -> ExperimentResult:
    return ExperimentResult(
        columns=("k", "value", "exact", "pass"),
        rows=[
            {"k": 4, "value": 3.0614674589207183, "exact": math.pi, "pass": False},
            {"k": np.int64(5), "value": np.float64(3.121445152258052), "exact": math.pi, "pass": np.bool_(True)},
            {"k": 6, "value": None, "exact": math.pi, "pass": True},
        ],
        criteria=[
            Criterion("slope <= -0.75", True, -1.98, "<= -0.75"),
            Criterion("error at k_max", False, 2.4e-3, "< 1e-3"),
        ],
        metrics={"slope": np.float64(-1.98), "nan_metric": float("nan"), "value": 0.5 + 0.25j},
    )


def _manifest(result: ExperimentResult) -> RunManifest:
    return RunManifest(
        experiment="classical-rate",
        theorem="approximants converge to the line integral on smooth curves",
        config={"experiment": "classical-rate", "x0": (0.5, 1.0), "form": "<x_dy>"},
        criteria=result.criteria,
        metrics=result.metrics,
        timings={"run_s": 0.25, "total_s": 0.3},
        artifacts={},
        content_hash="ab" * 32,
        version="0.3.0",
    )


def test_report_csv_is_exact(tmp_path: Path) -> None:
    out = tmp_path / "nested" / "results.csv"
    report_csv(_result(), out)
    assert out.read_text(encoding="utf-8") == (
        "k,value,exact,pass\n"
        "4,3.0614674589207183,3.141592653589793,false\n"
        "5,3.121445152258052,3.141592653589793,true\n"
        "6,,3.141592653589793,true\n"
    )


def test_report_json_is_plain(tmp_path: Path) -> None:
    result = _result()
    out = tmp_path / "manifest.json"
    report_json(_manifest(result), out)
    data = json.loads(out.read_text(encoding="utf-8"))
    assert data["experiment"] == "classical-rate"
    assert data["passed"] is False
    assert data["config"]["x0"] == [0.5, 1.0]
    assert data["metrics"]["slope"] == -1.98
    assert data["metrics"]["nan_metric"] is None
    assert data["metrics"]["value"] == [0.5, 0.25]
    assert [c["passed"] for c in data["criteria"]] == [True, False]
    assert data["content_hash"] == "ab" * 32


def test_report_html_contains_criteria_and_footer(tmp_path: Path) -> None:
    result = _result()
    out = tmp_path / "manifest.html"
    report_html(
        _manifest(result),
        result,
        out,
        generated_at=datetime(2026, 3, 1, 12, 0, tzinfo=timezone.utc),
        report_author="Test Author",
    )
    html = out.read_text(encoding="utf-8")
    assert "classical-rate" in html
    assert "Acceptance criteria" in html
    assert "error at k_max" in html
    assert "FAIL (1 criterion)" in html
    assert "2026-03-01 12:00 UTC" in html
    assert "Test Author" in html
    assert "abababababababab" in html
    # config values are escaped
    assert "&lt;x_dy&gt;" in html


def test_report_html_default_author(tmp_path: Path) -> None:
    result = _result()
    result.criteria[1] = Criterion("error at k_max", True, 1e-4, "< 1e-3")
    out = tmp_path / "manifest.html"
    report_html(_manifest(result), result, out)
    html = out.read_text(encoding="utf-8")
    assert "PASS" in html
    assert "FAIL (" not in html
    assert "Jaeha Yoo" in html


def test_report_terminal_prints_verdict() -> None:
    console = Console(record=True, width=120)
    report_terminal(_manifest(_result()), console)
    text = console.export_text()
    assert "Acceptance criteria" in text
    assert "slope <= -0.75" in text
    assert "FAIL classical-rate: 1 criterion(s) failed in 0.30s" in text
