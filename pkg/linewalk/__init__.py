"""
linewalk: symmetric random walks on groups of PL homeomorphisms of the line.

linewalk composes piecewise-linear homeomorphisms exactly, simulates the
random walk they generate, builds its stationary Radon measure from
bump-stopped runs, and checks recurrence, contraction and the existence of
zero-drift coordinates. It follows the "one-liner" philosophy: run a whole
scenario with a single function call.

Author: linewalk developers

Example:
    >>> import linewalk
    >>> s = linewalk.run({"system": "affine", "experiment": "full-pipeline"})
    >>> s.summary()
    >>> s.save("out/")
"""

__version__ = "0.1.0"
__author__ = "linewalk developers"

from linewalk.config import ScenarioConfig, load_config
from linewalk.core import Scenario, run
from linewalk.homeo import LiftedPLHomeo, PLHomeo, compose, evaluate, invert, phi
from linewalk.presets import get_preset, presets
from linewalk.rng import RandomStream
from linewalk.walkgroup import Generator, GeneratorSystem, validate

__all__ = [
    "Scenario",
    "run",
    "ScenarioConfig",
    "load_config",
    "PLHomeo",
    "LiftedPLHomeo",
    "compose",
    "evaluate",
    "invert",
    "phi",
    "Generator",
    "GeneratorSystem",
    "validate",
    "RandomStream",
    "presets",
    "get_preset",
    "__version__",
]
