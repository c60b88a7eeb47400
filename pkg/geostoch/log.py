"""Logging setup for the CLI (library modules only call logging.getLogger)."""

import logging

from rich.console import Console
from rich.logging import RichHandler


def configure_logging(verbose: bool = False, console: Console | None = None) -> None:
    """Route the geostoch logger through rich; DEBUG when verbose, else WARNING."""
    logger = logging.getLogger("geostoch")
    logger.handlers.clear()
    handler = RichHandler(console=console or Console(stderr=True), show_path=False, markup=False)
    handler.setFormatter(logging.Formatter("%(message)s"))
    logger.addHandler(handler)
    logger.setLevel(logging.DEBUG if verbose else logging.WARNING)
    logger.propagate = False
