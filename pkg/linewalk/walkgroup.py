"""
Weighted symmetric generator systems.

A :class:`GeneratorSystem` is a finite set of PL maps with probability
weights (the step distribution of the walk) together with the pairing of
each generator with its inverse. This module validates the standing
assumptions (positive symmetric weights, exact inverse pairing, no common
fixed point), samples letters and words, and provides the exact drift and
Phi calculus.

Author: linewalk developers
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Optional, Sequence

import numpy as np
import pandas as pd

from linewalk.errors import SystemValidationError
from linewalk.homeo import (
    Homeo,
    Interval,
    Number,
    PLHomeo,
    as_number,
    common_fixed_point,
    compose,
    encode_number,
    fixed_points,
    homeo_from_record,
    invert,
    phi,
)
from linewalk.rng import RandomStream

logger = logging.getLogger("linewalk")

WEIGHT_TOLERANCE = 1e-12


@dataclass(frozen=True)
class Generator:
    """A named generator and its step probability."""

    name: str
    homeo: Homeo
    weight: Number

    def __post_init__(self) -> None:
        object.__setattr__(self, "weight", as_number(self.weight))


@dataclass(frozen=True)
class GeneratorSystem:
    """Generators plus the involution ``pairs[i]`` = index of the inverse of ``i``.

    Args:
        generators: The weighted generators.
        pairs: Inverse pairing; inferred by exact inversion when omitted.
    """

    generators: tuple[Generator, ...]
    pairs: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        gens = tuple(self.generators)
        object.__setattr__(self, "generators", gens)
        if gens and not self.pairs:
            object.__setattr__(self, "pairs", infer_pairs([g.homeo for g in gens]))
        else:
            object.__setattr__(self, "pairs", tuple(int(j) for j in self.pairs))

    @classmethod
    def uniform(cls, items: Sequence[tuple[str, Homeo]]) -> "GeneratorSystem":
        """Equal weights over the given ``(name, map)`` items."""
        w = Fraction(1, len(items))
        return cls(tuple(Generator(name, g, w) for name, g in items))

    @property
    def size(self) -> int:
        return len(self.generators)

    @property
    def names(self) -> list[str]:
        return [g.name for g in self.generators]

    @property
    def maps(self) -> list[Homeo]:
        return [g.homeo for g in self.generators]

    @property
    def weights(self) -> list[Number]:
        return [g.weight for g in self.generators]

    def index(self, name: str) -> int:
        for i, g in enumerate(self.generators):
            if g.name == name:
                return i
        raise KeyError(f"No generator named '{name}'. Available: {self.names}")

    def cdf(self) -> np.ndarray:
        """Float cumulative weights with the last entry pinned to 1."""
        cdf = np.cumsum(np.array([float(w) for w in self.weights], dtype=np.float64))
        cdf[-1] = 1.0
        return cdf

    def to_record(self) -> dict[str, Any]:
        return {
            "generators": [
                {"name": g.name, "map": g.homeo.to_record(), "weight": encode_number(g.weight)}
                for g in self.generators
            ],
            "pairs": [[i, j] for i, j in enumerate(self.pairs) if i <= j],
        }

    @classmethod
    def from_record(cls, record: dict[str, Any]) -> "GeneratorSystem":
        """Parse ``{generators: [{name, map, weight}], pairs: [[i, j], ...]}``.

        Raises:
            SystemValidationError: If the pairing is malformed.
        """
        gens = tuple(
            Generator(str(item["name"]), homeo_from_record(item["map"]), item["weight"])
            for item in record.get("generators", [])
        )
        raw_pairs = record.get("pairs")
        if not raw_pairs:
            return cls(gens)
        pairs: list[Optional[int]] = [None] * len(gens)
        for i, j in raw_pairs:
            if not (0 <= i < len(gens) and 0 <= j < len(gens)):
                raise SystemValidationError(f"Pair [{i}, {j}] is out of range")
            pairs[i], pairs[j] = j, i
        if any(p is None for p in pairs):
            missing = [gens[i].name for i, p in enumerate(pairs) if p is None]
            raise SystemValidationError(f"Generators without an inverse pair: {missing}")
        return cls(gens, tuple(pairs))


def infer_pairs(maps: Sequence[Homeo]) -> tuple[int, ...]:
    """Pair every map with an exact inverse among ``maps``.

    Raises:
        SystemValidationError: If some map has no inverse in the list.
    """
    pairs = []
    for i, g in enumerate(maps):
        g_inv = invert(g)
        match = next((j for j, h in enumerate(maps) if h == g_inv), None)
        if match is None:
            raise SystemValidationError(f"Generator {i} ({g}) has no inverse in the system")
        pairs.append(match)
    return tuple(pairs)


# ── Validation ──────────────────────────────────────────────────────────


@dataclass
class ValidationReport:
    """Per-assumption verdicts for a generator system."""

    checks: list[dict[str, Any]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)

    @property
    def failures(self) -> list[dict[str, Any]]:
        return [c for c in self.checks if not c["passed"]]

    @property
    def witness(self) -> Any:
        """Witness of the first failed check (e.g. a common fixed point)."""
        for c in self.checks:
            if not c["passed"]:
                return c["witness"]
        return None

    def to_frame(self) -> pd.DataFrame:
        """Return the checks as a DataFrame with columns Check, Status, Details, Witness."""
        return pd.DataFrame(
            [
                {
                    "Check": c["check"],
                    "Status": "PASS" if c["passed"] else "FAIL",
                    "Details": c["details"],
                    "Witness": "" if c["witness"] is None else str(c["witness"]),
                }
                for c in self.checks
            ]
        )

    def require(self) -> None:
        """Raise if any check failed.

        Raises:
            SystemValidationError: Naming the failed checks.
        """
        if not self.passed:
            detail = "; ".join(f"{c['check']}: {c['details']}" for c in self.failures)
            raise SystemValidationError(f"Generator system rejected: {detail}")


def _weights_sum_to_one(weights: Iterable[Number]) -> bool:
    weights = list(weights)
    if all(isinstance(w, Fraction) for w in weights):
        return sum(weights) == 1
    return abs(sum(float(w) for w in weights) - 1.0) <= WEIGHT_TOLERANCE


def _same_weight(a: Number, b: Number) -> bool:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a == b
    return abs(float(a) - float(b)) <= WEIGHT_TOLERANCE


def validate(system: GeneratorSystem) -> ValidationReport:
    """Check positivity, symmetry, inverse pairing and irreducibility.

    Args:
        system: The system to check.

    Returns:
        A :class:`ValidationReport`; failed checks carry a witness.

    Raises:
        SystemValidationError: For structural problems (empty system,
            weights not summing to one, pairing that is not an involution).
    """
    n = system.size
    if n == 0:
        raise SystemValidationError("Generator system is empty")
    if not _weights_sum_to_one(system.weights):
        total = sum(float(w) for w in system.weights)
        raise SystemValidationError(f"Weights sum to {total!r}, expected 1")
    if len(system.pairs) != n or any(
        not 0 <= j < n or system.pairs[j] != i for i, j in enumerate(system.pairs)
    ):
        raise SystemValidationError(f"Pairing {system.pairs} is not an involution on {n} indices")

    report = ValidationReport()
    gens = system.generators

    bad_weight = next((g for g in gens if not g.weight > 0), None)
    report.checks.append(
        {
            "check": "Positive Weights",
            "passed": bad_weight is None,
            "details": (
                "All weights positive"
                if bad_weight is None
                else f"'{bad_weight.name}' has weight {bad_weight.weight}"
            ),
            "witness": None if bad_weight is None else bad_weight.name,
        }
    )

    asym = next(
        (i for i, j in enumerate(system.pairs) if not _same_weight(gens[i].weight, gens[j].weight)),
        None,
    )
    report.checks.append(
        {
            "check": "Symmetric Weights",
            "passed": asym is None,
            "details": (
                "Every generator weighs as much as its inverse"
                if asym is None
                else f"'{gens[asym].name}' ({gens[asym].weight}) vs "
                f"'{gens[system.pairs[asym]].name}' ({gens[system.pairs[asym]].weight})"
            ),
            "witness": None if asym is None else gens[asym].name,
        }
    )

    unpaired = None
    for i, j in enumerate(system.pairs):
        try:
            product = compose(gens[i].homeo, gens[j].homeo)
        except ValueError:
            unpaired = i
            break
        if not product.is_identity:
            unpaired = i
            break
    report.checks.append(
        {
            "check": "Inverse Pairing",
            "passed": unpaired is None,
            "details": (
                "Paired generators compose to the identity"
                if unpaired is None
                else f"'{gens[unpaired].name}' is not inverted by "
                f"'{gens[system.pairs[unpaired]].name}'"
            ),
            "witness": None if unpaired is None else gens[unpaired].name,
        }
    )

    common = common_fixed_point([fixed_points(g.homeo) for g in gens])
    report.checks.append(
        {
            "check": "Irreducibility",
            "passed": common is None,
            "details": (
                "No point is fixed by every generator"
                if common is None
                else f"Common fixed point at {common}"
            ),
            "witness": common,
        }
    )

    for c in report.failures:
        logger.warning("Validation failed: %s (%s)", c["check"], c["details"])
    return report


# ── Sampling and words ──────────────────────────────────────────────────


def sample_letter(system: GeneratorSystem, stream: RandomStream) -> int:
    """Draw one generator index with the system's weights."""
    return int(np.searchsorted(system.cdf(), stream.random(), side="right"))


def sample_letters(system: GeneratorSystem, stream: RandomStream, size: int) -> np.ndarray:
    """Draw ``size`` i.i.d. generator indices."""
    return np.searchsorted(system.cdf(), stream.random(size), side="right").astype(np.int64)


def compose_word(system: GeneratorSystem, indices: Sequence[int]) -> Homeo:
    """``g_n o ... o g_1`` for the word ``[i_1, ..., i_n]``; the empty word is the identity."""
    result: Homeo = PLHomeo.identity()
    for i in indices:
        result = compose(system.generators[i].homeo, result)
    return result


# ── Drift calculus ──────────────────────────────────────────────────────


def recurrence_interval(
    system: GeneratorSystem,
    A: Any = 0,
    margin: Any = Fraction(1, 1000),
) -> Interval:
    """``K = [A, max_g g(A) + margin]``, so that ``g(A) < B`` for every generator."""
    A = as_number(A)
    margin = as_number(margin)
    if not margin > 0:
        raise ValueError(f"Margin must be positive, got {margin}")
    B = max(g(A) for g in system.maps) + margin
    return Interval(A, max(B, A + margin))


def drift_at(system: GeneratorSystem, x: Any) -> Number:
    """Mean displacement ``sum_g w(g) (g(x) - x)``; exact on rational input."""
    x = as_number(x)
    return sum((g.weight * (g.homeo(x) - x) for g in system.generators), x - x)


def phi_mu(system: GeneratorSystem, c: Any) -> Number:
    """Weighted average of :func:`linewalk.homeo.phi` over the generators."""
    c = as_number(c)
    return sum((g.weight * phi(g.homeo, c) for g in system.generators), c - c)


def derriennic_residual(system: GeneratorSystem, grid: Iterable[Any]) -> Number:
    """``max |drift|`` over the grid; zero iff the drift vanishes on it."""
    values = [abs(drift_at(system, x)) for x in grid]
    if not values:
        raise ValueError("Grid is empty")
    return max(values)
