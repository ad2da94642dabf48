"""Tests for weighted generator systems."""

from fractions import Fraction

import numpy as np
import pytest

from linewalk.errors import SystemValidationError
from linewalk.homeo import PLHomeo
from linewalk.rng import RandomStream
from linewalk.walkgroup import (
    Generator,
    GeneratorSystem,
    compose_word,
    derriennic_residual,
    drift_at,
    infer_pairs,
    phi_mu,
    recurrence_interval,
    sample_letter,
    sample_letters,
    validate,
)


def _system(*items):
    return GeneratorSystem(tuple(Generator(name, g, w) for name, g, w in items))


class TestGeneratorSystem:
    """Construction, pairing and records."""

    def test_pairs_inferred(self, affine):
        """Each generator is paired with its exact inverse."""
        assert affine.pairs == (1, 0, 3, 2)
        assert affine.names == ["2x", "x/2", "x+1", "x-1"]

    def test_missing_inverse(self):
        with pytest.raises(SystemValidationError):
            infer_pairs([PLHomeo.affine(2), PLHomeo.affine(3)])

    def test_index(self, affine):
        assert affine.index("x+1") == 2
        with pytest.raises(KeyError):
            affine.index("x+2")

    def test_cdf_ends_at_one(self, minimal_translations):
        cdf = minimal_translations.cdf()
        assert cdf[-1] == 1.0
        np.testing.assert_allclose(cdf, [0.25, 0.5, 0.75, 1.0])

    def test_record_roundtrip(self, lifted_rotation):
        """A parsed record describes the same maps, weights and pairs."""
        again = GeneratorSystem.from_record(lifted_rotation.to_record())
        assert again.maps == lifted_rotation.maps
        assert again.weights == lifted_rotation.weights
        assert again.pairs == lifted_rotation.pairs

    def test_record_bad_pair(self, translations):
        record = translations.to_record()
        record["pairs"] = [[0, 5]]
        with pytest.raises(SystemValidationError):
            GeneratorSystem.from_record(record)


class TestValidate:
    """Standing assumptions."""

    def test_presets_pass(self, affine, translations, lifted_rotation):
        for system in (affine, translations, lifted_rotation):
            assert validate(system).passed

    def test_common_fixed_point(self):
        """2x and x/2 both fix 0."""
        system = GeneratorSystem.uniform(
            [("2x", PLHomeo.affine(2)), ("x/2", PLHomeo.affine(Fraction(1, 2)))]
        )
        report = validate(system)
        assert not report.passed
        assert report.failures[0]["check"] == "Irreducibility"
        assert report.witness == 0

    def test_asymmetric_weights(self):
        system = _system(
            ("t+1", PLHomeo.translation(1), Fraction(3, 4)),
            ("t-1", PLHomeo.translation(-1), Fraction(1, 4)),
        )
        report = validate(system)
        assert [c["check"] for c in report.failures] == ["Symmetric Weights"]
        with pytest.raises(SystemValidationError):
            report.require()

    def test_weights_must_sum_to_one(self):
        system = _system(
            ("t+1", PLHomeo.translation(1), Fraction(1, 2)),
            ("t-1", PLHomeo.translation(-1), Fraction(1, 4)),
        )
        with pytest.raises(SystemValidationError):
            validate(system)

    def test_empty(self):
        with pytest.raises(SystemValidationError):
            validate(GeneratorSystem(()))

    def test_bad_pairing(self):
        """A pairing that is not an involution is structural."""
        system = GeneratorSystem(
            (
                Generator("t+1", PLHomeo.translation(1), Fraction(1, 2)),
                Generator("t-1", PLHomeo.translation(-1), Fraction(1, 2)),
            ),
            (1, 1),
        )
        with pytest.raises(SystemValidationError):
            validate(system)

    def test_report_frame(self, affine):
        frame = validate(affine).to_frame()
        assert list(frame.columns) == ["Check", "Status", "Details", "Witness"]
        assert (frame["Status"] == "PASS").all()


class TestSampling:
    """Letters and words."""

    def test_letters_in_range(self, affine):
        letters = sample_letters(affine, RandomStream(1), 4000)
        assert letters.min() >= 0 and letters.max() < affine.size
        counts = np.bincount(letters, minlength=4) / 4000
        np.testing.assert_allclose(counts, 0.25, atol=0.05)

    def test_same_stream_same_letters(self, affine):
        a = sample_letters(affine, RandomStream(5).child(2), 50)
        b = sample_letters(affine, RandomStream(5).child(2), 50)
        np.testing.assert_array_equal(a, b)

    def test_single_letter_matches_batch(self, translations):
        assert sample_letter(translations, RandomStream(9)) == sample_letters(
            translations, RandomStream(9), 1
        )[0]

    def test_compose_word(self, affine):
        """The word [2x, x+1] is x -> 2x + 1."""
        assert compose_word(affine, [0, 2]) == PLHomeo.affine(2, 1)
        assert compose_word(affine, []).is_identity


class TestDrift:
    """Exact drift and Phi."""

    def test_recurrence_interval(self, affine):
        K = recurrence_interval(affine)
        assert K.lo == 0
        assert K.hi == 1 + Fraction(1, 1000)

    def test_recurrence_interval_margin(self, affine):
        with pytest.raises(ValueError):
            recurrence_interval(affine, 0, 0)

    def test_affine_drift(self, affine):
        """(2x - x)/4 + (x/2 - x)/4 at x = 8 is 1."""
        assert drift_at(affine, 8) == 1

    def test_translation_drift_vanishes(self, translations):
        assert derriennic_residual(translations, [-3, 0, Fraction(1, 3), 10]) == 0

    def test_empty_grid(self, translations):
        with pytest.raises(ValueError):
            derriennic_residual(translations, [])

    def test_phi_mu(self, translations):
        assert phi_mu(translations, 0) == Fraction(1, 2)
