"""Tests for the preset generator systems."""

import pytest

from linewalk.homeo import LiftedPLHomeo, compose
from linewalk.presets import get_preset, presets, rotation_lift
from linewalk.walkgroup import validate


class TestPresets:

    @pytest.mark.parametrize("name", sorted(presets()))
    def test_every_preset_validates(self, name):
        assert validate(get_preset(name)).passed

    def test_alias(self):
        assert get_preset("translations").names == get_preset("translations-discrete").names

    def test_unknown(self):
        with pytest.raises(KeyError, match="Available"):
            get_preset("free-group")

    def test_descriptions(self):
        assert all(isinstance(d, str) and d for d in presets().values())

    def test_rotation_lift_commutes_with_unit_shift(self):
        system = get_preset("lifted-rotation")
        ell = system.generators[system.index("l")].homeo
        shift = system.generators[system.index("x+1")].homeo
        assert isinstance(ell, LiftedPLHomeo)
        assert compose(ell, shift) == compose(shift, ell)
        assert ell == rotation_lift()
