"""Telemetry and logging utilities."""

from .logger import configure_logging
from .run_store import RunStore

__all__ = ["configure_logging", "RunStore"]
