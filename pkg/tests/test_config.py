"""Tests for scenario configuration."""

import json

import pytest

from linewalk.config import (
    DEFAULT_OUTPUT_DIR,
    KNOBS,
    OUTPUT_DIR_ENV,
    ScenarioConfig,
    load_config,
    word_letters,
)
from linewalk.errors import ConfigError


def _error_path(data):
    with pytest.raises(ConfigError) as info:
        ScenarioConfig.from_dict(data, env={})
    return info.value.path


class TestFromDict:
    """Validation and defaults."""

    def test_defaults_filled(self, small_config):
        config = ScenarioConfig.from_dict(small_config, env={})
        assert set(config.knobs) == set(KNOBS)
        assert config.knob("n") == 200
        assert config.knob("cap") == KNOBS["cap"][0]
        assert config.output_dir == DEFAULT_OUTPUT_DIR
        assert config.workers == 1

    def test_output_dir_from_env(self, small_config):
        config = ScenarioConfig.from_dict(small_config, env={OUTPUT_DIR_ENV: "/tmp/lw"})
        assert config.output_dir == "/tmp/lw"

    def test_output_dir_field_wins(self, small_config):
        data = dict(small_config, output_dir="here")
        config = ScenarioConfig.from_dict(data, env={OUTPUT_DIR_ENV: "/tmp/lw"})
        assert config.output_dir == "here"

    @pytest.mark.parametrize(
        "patch, path",
        [
            ({"color": "red"}, "color"),
            ({"experiment": "everything"}, "experiment"),
            ({"system": "free-group"}, "system"),
            ({"system": 3}, "system"),
            ({"knobs": []}, "knobs"),
            ({"knobs": {"steps": 10}}, "knobs.steps"),
            ({"knobs": {"trials": 0}}, "knobs.trials"),
            ({"knobs": {"trials": 2.5}}, "knobs.trials"),
            ({"knobs": {"trials": True}}, "knobs.trials"),
            ({"knobs": {"margin": "abc"}}, "knobs.margin"),
            ({"knobs": {"on_cap": "ignore"}}, "knobs.on_cap"),
            ({"knobs": {"gap": -1.0}}, "knobs.gap"),
            ({"knobs": {"gap": 0}}, "knobs.gap"),
            ({"knobs": {"martingale_gap": 0.0}}, "knobs.martingale_gap"),
            ({"knobs": {"start2": 0.5}}, "knobs.start2"),
            ({"knobs": {"start": 2.0, "start2": 2.0}}, "knobs.start2"),
            ({"knobs": {"reach_quantile": 1.0}}, "knobs.reach_quantile"),
            ({"knobs": {"word": "0 x"}}, "knobs.word"),
            ({"knobs": {"word": "0 7"}}, "knobs.word"),
            ({"seed": -1}, "seed"),
            ({"workers": 0}, "workers"),
        ],
    )
    def test_error_paths(self, small_config, patch, path):
        assert _error_path(dict(small_config, **patch)) == path

    def test_contraction_with_negative_gap(self, small_config):
        """A bad gap is caught before any section runs."""
        data = dict(small_config, experiment="contraction", knobs={"gap": -1.0})
        assert _error_path(data) == "knobs.gap"

    def test_word_letters(self):
        assert word_letters("0 1  2") == (0, 1, 2)
        assert word_letters("") == ()

    def test_missing_system(self):
        assert _error_path({"experiment": "recurrence"}) == "system"

    def test_not_an_object(self):
        assert _error_path([1, 2]) == ""

    def test_inline_system(self, small_config):
        record = {
            "generators": [
                {"name": "up", "map": {"affine": [1, 1]}, "weight": "1/2"},
                {"name": "down", "map": {"affine": [1, -1]}, "weight": "1/2"},
            ]
        }
        config = ScenarioConfig.from_dict(dict(small_config, system=record), env={})
        assert config.build_system().names == ["up", "down"]

    def test_bad_inline_system(self, small_config):
        record = {"generators": [{"name": "up", "map": {"affine": [2, 0]}, "weight": 1}]}
        assert _error_path(dict(small_config, system=record)) == "system"


class TestProvenance:
    """Echo and hashing."""

    def test_echo(self, small_config):
        echo = ScenarioConfig.from_dict(small_config, env={}).to_dict()
        assert echo["knobs"]["trials"] == 24
        assert ScenarioConfig.from_dict(echo, env={}).to_dict() == echo

    def test_hash_ignores_workers_and_output(self, small_config):
        a = ScenarioConfig.from_dict(small_config, env={})
        b = ScenarioConfig.from_dict(dict(small_config, workers=4, output_dir="x"), env={})
        assert a.content_hash() == b.content_hash()
        assert len(a.content_hash()) == 40

    def test_hash_tracks_seed(self, small_config):
        a = ScenarioConfig.from_dict(small_config, env={})
        b = ScenarioConfig.from_dict(dict(small_config, seed=12), env={})
        assert a.content_hash() != b.content_hash()

    def test_explicit_default_same_hash(self, small_config):
        """Writing a default out does not change the hash."""
        knobs = dict(small_config["knobs"], cap=KNOBS["cap"][0])
        a = ScenarioConfig.from_dict(small_config, env={})
        b = ScenarioConfig.from_dict(dict(small_config, knobs=knobs), env={})
        assert a.content_hash() == b.content_hash()


class TestLoadConfig:

    def test_load(self, config_file):
        config = load_config(config_file, env={})
        assert config.experiment == "recurrence"
        assert config.output_dir.endswith("out")

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "nope.json")

    def test_bad_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{system: affine", encoding="utf-8")
        with pytest.raises(ConfigError, match="not valid JSON"):
            load_config(path)

    def test_echo_is_json(self, config_file):
        json.dumps(load_config(config_file, env={}).to_dict())
