"""
Named generator systems used as ready-made scenarios.

Author: linewalk developers
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable

from linewalk.homeo import LiftedPLHomeo, PLHomeo
from linewalk.walkgroup import GeneratorSystem


def _translations_discrete() -> GeneratorSystem:
    return GeneratorSystem.uniform(
        [("t+1", PLHomeo.translation(1)), ("t-1", PLHomeo.translation(-1))]
    )


def _translations_minimal() -> GeneratorSystem:
    r = math.sqrt(2)
    return GeneratorSystem.uniform(
        [
            ("t+1", PLHomeo.translation(1)),
            ("t-1", PLHomeo.translation(-1)),
            ("t+r2", PLHomeo.translation(r)),
            ("t-r2", PLHomeo.translation(-r)),
        ]
    )


def _affine() -> GeneratorSystem:
    return GeneratorSystem.uniform(
        [
            ("2x", PLHomeo.affine(2)),
            ("x/2", PLHomeo.affine(Fraction(1, 2))),
            ("x+1", PLHomeo.translation(1)),
            ("x-1", PLHomeo.translation(-1)),
        ]
    )


def rotation_lift() -> LiftedPLHomeo:
    """Lift of a PL circle map fixing 0 and 1/2, with slopes 1/2 and 3/2."""
    q = Fraction(1, 4)
    return LiftedPLHomeo.from_nodes(
        [0, q, 2 * q, 3 * q], [0, Fraction(1, 8), Fraction(1, 2), Fraction(5, 8)], 1
    )


def _lifted_rotation() -> GeneratorSystem:
    ell = rotation_lift()
    return GeneratorSystem.uniform(
        [
            ("x+1", PLHomeo.translation(1)),
            ("x-1", PLHomeo.translation(-1)),
            ("l", ell),
            ("l^-1", ell.inverse()),
        ]
    )


def _thompson_like() -> GeneratorSystem:
    a = PLHomeo.translation(1)
    b = PLHomeo((0, 1), (1, 2, 1), 0)
    return GeneratorSystem.uniform(
        [("a", a), ("a^-1", a.inverse()), ("b", b), ("b^-1", b.inverse())]
    )


_PRESETS: dict[str, tuple[str, Callable[[], GeneratorSystem]]] = {
    "translations-discrete": ("x+1, x-1: orbits are discrete", _translations_discrete),
    "translations-minimal": ("x+-1, x+-sqrt(2): dense orbits", _translations_minimal),
    "affine": ("2x, x/2, x+1, x-1: expansion and translation", _affine),
    "lifted-rotation": ("x+-1 and a PL lift commuting with x+1", _lifted_rotation),
    "thompson-like": ("x+1 and a PL map with dyadic breakpoints", _thompson_like),
}

_ALIASES = {"translations": "translations-discrete"}


def presets() -> dict[str, str]:
    """Preset names with a one-line description."""
    return {name: desc for name, (desc, _) in _PRESETS.items()}


def get_preset(name: str) -> GeneratorSystem:
    """Build the named preset.

    Raises:
        KeyError: If the name is unknown.
    """
    try:
        return _PRESETS[_ALIASES.get(name, name)][1]()
    except KeyError:
        raise KeyError(f"Unknown preset '{name}'. Available: {sorted(_PRESETS)}") from None
