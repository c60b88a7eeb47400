"""Tests for config parsing, overrides and validation."""

from pathlib import Path

import pytest

from geostoch.config import (
    ExperimentConfig,
    build_config,
    parse_config_text,
    parse_overrides,
    read_config,
)
from geostoch.errors import ConfigError


def test_parse_config_text_skips_comments_and_blank_lines() -> None:
    content = """
# classical limit on the plane
experiment = classical-rate
manifold   = euclidean:2   # flat
form = x_dy

x0 = 0.5, -0.5
"""
    assert parse_config_text(content) == {
        "experiment": "classical-rate",
        "manifold": "euclidean:2",
        "form": "x_dy",
        "x0": "0.5, -0.5",
    }


def test_parse_config_text_later_keys_win() -> None:
    assert parse_config_text("k = 3\nk = 5\n") == {"k": "5"}


def test_parse_config_text_names_bad_line() -> None:
    with pytest.raises(ConfigError) as exc:
        parse_config_text("experiment = fki\nthis is not a pair\n")
    assert exc.value.field == "line 2"


def test_parse_overrides() -> None:
    assert parse_overrides(["n_paths=100", " seed = 3", "measure=mix:0.5@0+0.5@1"]) == {
        "n_paths": "100",
        "seed": "3",
        "measure": "mix:0.5@0+0.5@1",
    }
    with pytest.raises(ConfigError) as exc:
        parse_overrides(["n_paths"])
    assert exc.value.field == "--set"


def test_read_config_flags_win(tmp_path: Path) -> None:
    path = tmp_path / "run.conf"
    path.write_text("experiment = chernoff\nk_max = 8\nseed = 1\n", encoding="utf-8")
    assert read_config(path, {"seed": "7"}) == {"experiment": "chernoff", "k_max": "8", "seed": "7"}
    assert read_config(None, {"seed": "7"}) == {"seed": "7"}


def test_read_config_missing_file(tmp_path: Path) -> None:
    with pytest.raises(ConfigError) as exc:
        read_config(tmp_path / "missing.conf")
    assert exc.value.field == "config"


def test_build_config_converts_types() -> None:
    cfg = build_config(
        {"experiment": "t-continuity", "x0": "0.5,1", "t1": "0.25", "t2": "none", "k": "5", "k_max": "9", "report": "HTML"},
        defaults={"k_max": "12", "form": "dx:1"},
    )
    assert cfg.x0 == (0.5, 1.0)
    assert cfg.t1 == 0.25
    assert cfg.t2 is None
    assert cfg.k_max == 9
    assert cfg.k == 5
    assert cfg.form == "dx:1"
    assert cfg.report == "html"
    assert cfg.to_dict()["x0"] == [0.5, 1.0]


def test_defaults_are_overridden_by_raw_values() -> None:
    cfg = build_config({"experiment": "fki", "k": "4"}, defaults={"k": "10", "k_max": "12"})
    assert cfg.k == 4
    assert cfg.levels == list(range(4, 13))


@pytest.mark.parametrize(
    "raw,field",
    [
        ({"n_paths": "0"}, "n_paths"),
        ({"k": "-1"}, "k"),
        ({"k": "13"}, "k"),
        ({"k_min": "13"}, "k_min"),
        ({"t": "0"}, "t"),
        ({"t1": "2.0"}, "t1"),
        ({"t2": "-0.5"}, "t2"),
        ({"epsilon": "0"}, "epsilon"),
        ({"quad_order": "1"}, "quad_order"),
        ({"chunk_size": "0"}, "chunk_size"),
        ({"grid_n": "4"}, "grid_n"),
        ({"report": "pdf"}, "report"),
        ({"n_paths": "many"}, "n_paths"),
        ({"x0": "1,a"}, "x0"),
        ({"colour": "red"}, "colour"),
    ],
)
def test_invalid_values_name_the_field(raw: dict[str, str], field: str) -> None:
    with pytest.raises(ConfigError) as exc:
        build_config({"experiment": "in-measure", **raw})
    assert exc.value.field == field
    assert str(exc.value).startswith(f"{field}:")


def test_experiment_is_required() -> None:
    with pytest.raises(ConfigError) as exc:
        build_config({"seed": "1"})
    assert exc.value.field == "experiment"
    with pytest.raises(ConfigError):
        ExperimentConfig(experiment="")
