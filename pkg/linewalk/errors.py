"""
Exception hierarchy for linewalk.

Author: linewalk developers
"""

from __future__ import annotations

from typing import Any, Optional


class LinewalkError(Exception):
    """Base class for all linewalk errors."""


class ConfigError(LinewalkError, ValueError):
    """Invalid scenario configuration.

    Args:
        path: Dotted path of the offending field (e.g. ``"knobs.trials"``).
        message: What is wrong with it.
    """

    def __init__(self, path: str, message: str) -> None:
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class SystemValidationError(LinewalkError, ValueError):
    """A generator system is structurally unusable (empty, weights not summing to 1)."""


class NumericalError(LinewalkError, RuntimeError):
    """A Monte Carlo or fitting procedure could not produce a trustworthy result."""


class StoppingCapExceeded(NumericalError):
    """A stopped run reached the step cap or escaped the escape radius."""

    def __init__(self, start: float, steps: int, position: float, reason: str = "cap") -> None:
        self.start = start
        self.steps = steps
        self.position = position
        self.reason = reason
        super().__init__(
            f"Stopped run from x={start:g} not stopped after {steps:,} steps "
            f"({reason}; last position {position:g})"
        )


class ChartError(NumericalError):
    """A coordinate chart could not be built from the given measure."""


class ConjugationError(NumericalError):
    """A conjugated generator fit stayed unusable after grid refinement.

    ``detail`` says why: the fit was not monotone, or it stayed too far from
    the conjugate it approximates.
    """

    def __init__(self, name: str, nodes: int, detail: Optional[Any] = None) -> None:
        self.name = name
        self.nodes = nodes
        msg = f"Conjugate of '{name}' failed on a {nodes}-node grid"
        if detail is not None:
            msg += f" ({detail})"
        super().__init__(msg)
