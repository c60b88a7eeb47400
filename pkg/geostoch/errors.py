"""Exception hierarchy shared by the library and the CLI."""

from collections.abc import Iterable


class GeostochError(Exception):
    """Base class for all geostoch errors."""


class ContractViolation(GeostochError, ValueError):
    """A documented precondition was not met (shapes, levels, times, lengths)."""


class CutLocusError(GeostochError):
    """No unique minimizing geodesic joins the two points."""


class UnsupportedError(GeostochError):
    """The operation is not available on this manifold or domain."""


class RegistryError(GeostochError, KeyError):
    """Unknown registry key; carries the valid keys for usage messages."""

    def __init__(self, kind: str, key: str, valid: Iterable[str]) -> None:
        self.kind = kind
        self.key = key
        self.valid = sorted(valid)
        super().__init__(f"unknown {kind} {key!r}; valid: {', '.join(self.valid)}")

    def __str__(self) -> str:
        return self.args[0]


class ConfigError(GeostochError):
    """Invalid experiment configuration; names the offending field."""

    def __init__(self, field: str, message: str) -> None:
        self.field = field
        super().__init__(f"{field}: {message}")
