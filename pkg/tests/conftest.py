"""Shared test fixtures for linewalk tests."""

import json

import numpy as np
import pytest

from linewalk.homeo import Interval
from linewalk.presets import get_preset
from linewalk.rng import RandomStream
from linewalk.stationary import EmpiricalRadonMeasure


@pytest.fixture
def translations():
    """x+1 and x-1 with weight 1/2 each."""
    return get_preset("translations-discrete")


@pytest.fixture
def minimal_translations():
    """x+-1 and x+-sqrt(2) with weight 1/4 each."""
    return get_preset("translations-minimal")


@pytest.fixture
def affine():
    """2x, x/2, x+1, x-1 with weight 1/4 each."""
    return get_preset("affine")


@pytest.fixture
def lifted_rotation():
    return get_preset("lifted-rotation")


@pytest.fixture
def stream():
    """A fixed random stream."""
    return RandomStream(2024)


@pytest.fixture
def uniform_pool():
    """Equal weights on a fine grid over [0, 10]: Lebesgue measure, sampled."""
    xs = np.linspace(0.0, 10.0, 1001)
    return EmpiricalRadonMeasure(
        xs, np.full(len(xs), 0.01), anchor=0.0, reference=Interval(0.0, 1.0)
    )


@pytest.fixture
def small_config():
    """A recurrence scenario small enough for unit tests."""
    return {
        "system": "translations-discrete",
        "experiment": "recurrence",
        "knobs": {"n": 200, "trials": 24, "min_visits": 0},
        "seed": 11,
    }


@pytest.fixture
def config_file(tmp_path, small_config):
    """``small_config`` written to disk, with its output dir under ``tmp_path``."""
    data = dict(small_config, output_dir=str(tmp_path / "out"))
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    return path
