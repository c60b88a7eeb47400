"""Experiment configuration: flat key = value files plus --set overrides."""

import re
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any

from geostoch.errors import ConfigError

# key = value  (inline "# ..." comments allowed after the value)
CONFIG_LINE = re.compile(r"^\s*([a-z_][a-z0-9_]*)\s*=\s*(.*?)\s*(?:#.*)?$")
OVERRIDE = re.compile(r"^\s*([a-z_][a-z0-9_]*)\s*=(.*)$")

REPORT_FORMATS = ("json", "html", "none")


@dataclass(frozen=True)
class ExperimentConfig:
    """Typed, validated experiment parameters; every field is a config key."""

    experiment: str
    manifold: str = "euclidean:2"
    form: str = "x_dy"
    form_b: str = ""
    field: str = "square"
    measure: str = "lebesgue"
    measure_b: str = "midpoint"
    potential: str = ""
    test_function: str = "const:1"
    curve: str = "circle"
    x0: tuple[float, ...] | None = None
    t: float = 1.0
    t1: float | None = None
    t2: float | None = None
    k: int = 10
    k_min: int = 4
    k_max: int = 12
    n_paths: int = 10_000
    seed: int = 0
    epsilon: float = 0.05
    quad_order: int = 16
    chunk_size: int = 500
    grid: str = "circle"
    grid_n: int = 128
    output_dir: str = "results"
    report: str = "json"

    def __post_init__(self) -> None:
        if not self.experiment:
            raise ConfigError("experiment", "is required")
        if self.n_paths < 1:
            raise ConfigError("n_paths", f"must be >= 1, got {self.n_paths}")
        if self.k < 0:
            raise ConfigError("k", f"must be >= 0, got {self.k}")
        if self.k > self.k_max:
            raise ConfigError("k", f"must be <= k_max ({self.k_max}), got {self.k}")
        if not 0 <= self.k_min <= self.k_max:
            raise ConfigError("k_min", f"must lie in [0, k_max={self.k_max}], got {self.k_min}")
        if self.t <= 0:
            raise ConfigError("t", f"must be > 0, got {self.t}")
        for name in ("t1", "t2"):
            value = getattr(self, name)
            if value is not None and not 0 <= value <= self.t:
                raise ConfigError(name, f"must lie in [0, t={self.t}], got {value}")
        if self.epsilon <= 0:
            raise ConfigError("epsilon", f"must be > 0, got {self.epsilon}")
        if self.quad_order < 2:
            raise ConfigError("quad_order", f"must be >= 2, got {self.quad_order}")
        if self.chunk_size < 1:
            raise ConfigError("chunk_size", f"must be >= 1, got {self.chunk_size}")
        if self.grid_n < 8:
            raise ConfigError("grid_n", f"must be >= 8, got {self.grid_n}")
        if self.report not in REPORT_FORMATS:
            raise ConfigError("report", f"must be one of {', '.join(REPORT_FORMATS)}, got {self.report!r}")

    @classmethod
    def from_mapping(cls, raw: dict[str, str]) -> "ExperimentConfig":
        """Build a config from string values, converting each to its field type."""
        known = {f.name: f for f in fields(cls)}
        values: dict[str, Any] = {}
        for key, text in raw.items():
            if key not in known:
                raise ConfigError(key, f"unknown key; valid keys: {', '.join(known)}")
            values[key] = _convert(key, text)
        if "experiment" not in values:
            raise ConfigError("experiment", "is required")
        return cls(**values)

    def to_dict(self) -> dict[str, Any]:
        out = asdict(self)
        if self.x0 is not None:
            out["x0"] = list(self.x0)
        return out

    @property
    def levels(self) -> list[int]:
        return list(range(self.k_min, self.k_max + 1))


_INT_KEYS = {"k", "k_min", "k_max", "n_paths", "seed", "quad_order", "chunk_size", "grid_n"}
_FLOAT_KEYS = {"t", "epsilon"}
_OPTIONAL_FLOAT_KEYS = {"t1", "t2"}


def _convert(key: str, text: str) -> Any:
    text = text.strip()
    try:
        if key in _INT_KEYS:
            return int(text)
        if key in _FLOAT_KEYS:
            return float(text)
        if key in _OPTIONAL_FLOAT_KEYS:
            return float(text) if text and text.lower() != "none" else None
        if key == "x0":
            if not text or text.lower() == "none":
                return None
            return tuple(float(p) for p in text.replace(" ", "").split(","))
    except ValueError:
        raise ConfigError(key, f"cannot parse {text!r}") from None
    if key == "report":
        return text.lower()
    return text


def parse_config_text(content: str) -> dict[str, str]:
    """
    Parse key = value lines into a dict.
    Blank lines and lines starting with # are ignored; later keys win.
    """
    out: dict[str, str] = {}
    for lineno, line in enumerate(content.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        m = CONFIG_LINE.match(stripped)
        if not m:
            raise ConfigError(f"line {lineno}", f"expected 'key = value', got {stripped!r}")
        out[m.group(1)] = m.group(2)
    return out


def parse_overrides(items: tuple[str, ...] | list[str]) -> dict[str, str]:
    """Parse repeated --set key=value flags."""
    out: dict[str, str] = {}
    for item in items:
        m = OVERRIDE.match(item)
        if not m:
            raise ConfigError("--set", f"expected key=value, got {item!r}")
        out[m.group(1)] = m.group(2).strip()
    return out


def read_config(path: Path | None, overrides: dict[str, str] | None = None) -> dict[str, str]:
    """File values with --set overrides applied (flags win), still as strings."""
    raw: dict[str, str] = {}
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigError("config", f"cannot read {path}: {e}") from None
        raw.update(parse_config_text(text))
    raw.update(overrides or {})
    return raw


def build_config(raw: dict[str, str], defaults: dict[str, str] | None = None) -> ExperimentConfig:
    """Merge dataclass defaults < experiment defaults < raw values and validate."""
    return ExperimentConfig.from_mapping({**(defaults or {}), **raw})
