"""Result types shared by the experiment catalog and the reporters."""

from dataclasses import asdict, dataclass, field
from typing import Any


@dataclass(frozen=True)
class Criterion:
    """One pass/fail acceptance check with the measured value and its bound."""

    name: str
    passed: bool
    value: float | None
    bound: str

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass
class ExperimentResult:
    """What a runner returns: CSV rows, acceptance checks and scalar metrics."""

    columns: tuple[str, ...]
    rows: list[dict[str, Any]]
    criteria: list[Criterion]
    metrics: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.criteria)


@dataclass
class RunManifest:
    """Config echo, per-criterion outcome, timings, artifact paths and content hash of one run."""

    experiment: str
    theorem: str
    config: dict[str, Any]
    criteria: list[Criterion]
    metrics: dict[str, Any]
    timings: dict[str, float]
    artifacts: dict[str, str]
    content_hash: str
    version: str

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.criteria)

    def to_dict(self) -> dict[str, Any]:
        return {
            "experiment": self.experiment,
            "theorem": self.theorem,
            "passed": self.passed,
            "version": self.version,
            "content_hash": self.content_hash,
            "config": self.config,
            "criteria": [c.to_dict() for c in self.criteria],
            "metrics": self.metrics,
            "timings": self.timings,
            "artifacts": self.artifacts,
        }
