"""Exception types raised across MetaQuant.

Each error subclasses the closest builtin so callers that only know about
``ValueError``/``RuntimeError`` keep working.
"""

from __future__ import annotations

from typing import Any


class DimensionError(ValueError):
    """Tensor shapes do not compose."""


class InputError(ValueError):
    """An argument value is outside its documented domain."""


class ConfigError(ValueError):
    """A configuration value is missing or invalid."""

    def __init__(self, field: str, message: str) -> None:
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message


class SpecError(ValueError):
    """Weights or inputs do not match a target network description."""

    def __init__(self, layer_index: int | None, message: str) -> None:
        prefix = f"layer {layer_index}: " if layer_index is not None else ""
        super().__init__(prefix + message)
        self.layer_index = layer_index


class UnknownSpecError(LookupError):
    """No target network is registered under the requested name."""


class PolicyError(ValueError):
    """A bitwidth policy does not fit the network or bit range."""


class InfeasibleError(ValueError):
    """No policy in the bit range satisfies the compression constraint."""


class SearchSpaceError(ValueError):
    """Exhaustive enumeration would exceed the configured cap."""


class FormatError(ValueError):
    """A binary or JSON file is malformed."""

    def __init__(self, message: str, offset: int | None = None) -> None:
        suffix = f" (at byte offset {offset})" if offset is not None else ""
        super().__init__(message + suffix)
        self.offset = offset


class StateError(RuntimeError):
    """An operation was called in the wrong lifecycle state."""


class NumericalError(FloatingPointError):
    """A forward or backward pass produced NaN or Inf."""


class DivergenceError(RuntimeError):
    """Training loss became non-finite."""

    def __init__(self, epoch: int, step: int, report: Any = None) -> None:
        super().__init__(f"Training diverged at epoch {epoch}, step {step}")
        self.epoch = epoch
        self.step = step
        self.report = report
