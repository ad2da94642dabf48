"""
Scenario configuration: parsing, defaults and provenance hashing.

A scenario is a JSON document::

    {
      "system": "affine",
      "experiment": "full-pipeline",
      "knobs": {"n": 20000, "trials": 400},
      "seed": 7
    }

``system`` is a preset name or an inline generator record. Every knob not
given is filled with its default, and the completed document is what gets
echoed into each output file.

Author: linewalk developers
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional, Union

from linewalk.errors import ConfigError, SystemValidationError
from linewalk.presets import get_preset
from linewalk.utils import canonical_json, git_blob_hash
from linewalk.walkgroup import GeneratorSystem

OUTPUT_DIR_ENV = "LINEWALK_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "linewalk-output"

EXPERIMENTS = (
    "recurrence",
    "oscillation",
    "stationary",
    "martingale",
    "bi-infiniteness",
    "uniqueness",
    "word-events",
    "contraction",
    "derriennic",
    "full-pipeline",
)

# name -> (default, kind); kinds: int, float, number (int/float/rational string), str
KNOBS: dict[str, tuple[Any, str]] = {
    # walk and recurrence interval
    "start": (0.5, "float"),
    "A": (0, "number"),
    "margin": ("1/1000", "number"),
    "n": (10_000, "int"),
    "trials": (200, "int"),
    "min_visits": (50, "int"),
    # stopped process
    "kb_iterations": (20, "int"),
    "kb_lanes": (256, "int"),
    "n_starts": (256, "int"),
    "samples_per_start": (16, "int"),
    "n_batches": (10, "int"),
    "cap": (10_000_000, "int"),
    "on_cap": ("censor", "str"),
    "escape_radius": (1e100, "float"),
    "window_widen": (4.5, "float"),
    "reach_trials": (4096, "int"),
    "reach_quantile": (0.999, "float"),
    "test_functions": (5, "int"),
    # ratio estimator
    "N": (20_000, "int"),
    "uniqueness_trials": (64, "int"),
    "start2": (1.5, "float"),
    "uniqueness_tolerance": (0.10, "float"),
    # martingale
    "martingale_start": (0.2, "float"),
    "martingale_gap": (0.6, "float"),
    "martingale_n": (200, "int"),
    "martingale_trials": (10_000, "int"),
    # bi-infiniteness and word events
    "radius": (10.0, "float"),
    "radii": (4, "int"),
    "scan_runs": (2048, "int"),
    "word": ("0 1", "str"),
    # contraction and structure
    "contraction_start": (0.1, "float"),
    "gap": (0.2, "float"),
    "contraction_n": (10_000, "int"),
    "contraction_trials": (200, "int"),
    "dump_trials": (8, "int"),
    "dump_every": (100, "int"),
    "classify_samples": (20_000, "int"),
    # chart
    "chart_nodes": (512, "int"),
    "grid_points": (11, "int"),
    "lipschitz_tolerance": (0.10, "float"),
    "displacement_tolerance": (0.10, "float"),
}

_POSITIVE = frozenset(
    name
    for name in KNOBS
    if KNOBS[name][1] == "int" and name not in ("min_visits", "dump_trials")
)
FIELDS = ("system", "experiment", "knobs", "seed", "output_dir", "workers")


def _coerce_knob(name: str, value: Any) -> Any:
    kind = KNOBS[name][1]
    path = f"knobs.{name}"
    if isinstance(value, bool):
        raise ConfigError(path, f"expected {kind}, got boolean")
    if kind == "int":
        if not isinstance(value, int):
            raise ConfigError(path, f"expected an integer, got {value!r}")
    elif kind == "float":
        if not isinstance(value, (int, float)):
            raise ConfigError(path, f"expected a number, got {value!r}")
        value = float(value)
    elif kind == "number":
        if isinstance(value, str):
            try:
                Fraction(value.strip())
            except ValueError:
                raise ConfigError(path, f"not a rational literal: {value!r}") from None
        elif not isinstance(value, (int, float)):
            raise ConfigError(path, f"expected a number or rational string, got {value!r}")
    elif not isinstance(value, str):
        raise ConfigError(path, f"expected a string, got {value!r}")
    if name in _POSITIVE and value < 1:
        raise ConfigError(path, f"must be positive, got {value}")
    if name == "on_cap" and value not in ("raise", "censor"):
        raise ConfigError(path, f"must be 'raise' or 'censor', got {value!r}")
    if name in ("gap", "martingale_gap", "radius") and not value > 0:
        raise ConfigError(path, f"must be positive, got {value}")
    if name == "reach_quantile" and not 0 < value < 1:
        raise ConfigError(path, f"must lie in (0, 1), got {value}")
    if name == "word":
        word_letters(value)
    return value


def word_letters(text: str) -> tuple[int, ...]:
    """Parse a word knob such as ``"0 1"`` into generator indices.

    Raises:
        ConfigError: At ``knobs.word`` if a token is not a non-negative integer.
    """
    tokens = text.split()
    if not all(t.isdigit() for t in tokens):
        raise ConfigError("knobs.word", f"expected generator indices like '0 1', got {text!r}")
    return tuple(int(t) for t in tokens)


def _check_knob_pairs(knobs: dict[str, Any], system: GeneratorSystem) -> None:
    if knobs["start2"] == knobs["start"]:
        raise ConfigError("knobs.start2", f"must differ from knobs.start ({knobs['start']})")
    letters = word_letters(knobs["word"])
    if any(w >= system.size for w in letters):
        raise ConfigError(
            "knobs.word", f"letters must lie in 0..{system.size - 1}, got {knobs['word']!r}"
        )


@dataclass
class ScenarioConfig:
    """A validated scenario with every default filled in.

    Args:
        system: Preset name or generator record.
        experiment: One of :data:`EXPERIMENTS`.
        knobs: Numeric settings (see :data:`KNOBS`).
        seed: Master seed.
        output_dir: Where artifacts go.
        workers: Thread count; results do not depend on it.
    """

    system: Union[str, dict[str, Any]]
    experiment: str
    knobs: dict[str, Any] = field(default_factory=dict)
    seed: int = 0
    output_dir: str = DEFAULT_OUTPUT_DIR
    workers: int = 1

    @classmethod
    def from_dict(cls, data: Any, env: Optional[dict[str, str]] = None) -> "ScenarioConfig":
        """Validate ``data`` and fill defaults.

        Raises:
            ConfigError: With the dotted path of the first offending field.
        """
        env = os.environ if env is None else env
        if not isinstance(data, dict):
            raise ConfigError("", "scenario must be a JSON object")
        unknown = sorted(set(data) - set(FIELDS))
        if unknown:
            raise ConfigError(unknown[0], "unknown field")

        if "system" not in data:
            raise ConfigError("system", "required field is missing")
        system = data["system"]
        if not isinstance(system, (str, dict)):
            raise ConfigError("system", "must be a preset name or a generator record")

        experiment = data.get("experiment")
        if experiment not in EXPERIMENTS:
            raise ConfigError(
                "experiment", f"must be one of {list(EXPERIMENTS)}, got {experiment!r}"
            )

        raw_knobs = data.get("knobs", {})
        if not isinstance(raw_knobs, dict):
            raise ConfigError("knobs", "must be an object")
        for name in raw_knobs:
            if name not in KNOBS:
                raise ConfigError(f"knobs.{name}", "unknown knob")
        knobs = {
            name: _coerce_knob(name, raw_knobs.get(name, default))
            for name, (default, _) in KNOBS.items()
        }

        seed = data.get("seed", 0)
        if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
            raise ConfigError("seed", f"must be a non-negative integer, got {seed!r}")
        workers = data.get("workers", 1)
        if isinstance(workers, bool) or not isinstance(workers, int) or workers < 1:
            raise ConfigError("workers", f"must be a positive integer, got {workers!r}")
        output_dir = data.get("output_dir") or env.get(OUTPUT_DIR_ENV) or DEFAULT_OUTPUT_DIR
        if not isinstance(output_dir, str):
            raise ConfigError("output_dir", "must be a path string")

        config = cls(system, experiment, knobs, seed, output_dir, workers)
        _check_knob_pairs(knobs, config.build_system())
        return config

    def build_system(self) -> GeneratorSystem:
        """Resolve the preset or parse the inline record.

        Raises:
            ConfigError: For unknown presets or malformed records.
        """
        if isinstance(self.system, str):
            try:
                return get_preset(self.system)
            except KeyError as exc:
                raise ConfigError("system", exc.args[0]) from None
        try:
            return GeneratorSystem.from_record(self.system)
        except (SystemValidationError, KeyError, TypeError, ValueError) as exc:
            raise ConfigError("system", f"bad generator record: {exc}") from None

    def to_dict(self) -> dict[str, Any]:
        """The complete config, as echoed into ``config.json``."""
        return {
            "system": self.system,
            "experiment": self.experiment,
            "knobs": dict(self.knobs),
            "seed": self.seed,
            "output_dir": self.output_dir,
            "workers": self.workers,
        }

    def provenance(self) -> dict[str, Any]:
        """Fields that determine the results (output dir and worker count excluded)."""
        echo = self.to_dict()
        del echo["output_dir"], echo["workers"]
        return echo

    def content_hash(self) -> str:
        """Git-style blob hash of the canonical provenance JSON."""
        return git_blob_hash(canonical_json(self.provenance()))

    def knob(self, name: str) -> Any:
        return self.knobs[name]


def load_config(path: Union[str, Path], env: Optional[dict[str, str]] = None) -> ScenarioConfig:
    """Read and validate a scenario file.

    Raises:
        ConfigError: If the file is missing, not JSON, or fails validation.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("", f"cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"{path} is not valid JSON (line {exc.lineno}: {exc.msg})") from None
    return ScenarioConfig.from_dict(data, env=env)
