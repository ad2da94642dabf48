"""Tests for the stationary distance, contraction and structure checks."""

import numpy as np
import pytest

from linewalk.geometry import (
    VERDICTS,
    NuDistance,
    StructureClassifier,
    classify_structure,
    contraction_experiment,
    contraction_verdict,
    gap_excursions,
    martingale_check,
)
from linewalk.homeo import Interval
from linewalk.stationary import EmpiricalRadonMeasure, LebesgueMeasure
from linewalk.walkgroup import recurrence_interval


class TestNuDistance:
    """d(x, y) = nu(min, max]."""

    def test_lebesgue(self):
        d = NuDistance(LebesgueMeasure())
        assert float(d(1.0, 3.0)) == 2.0
        assert float(d(3.0, 1.0)) == 2.0
        assert float(d(1.5, 1.5)) == 0.0

    def test_additive_across_atoms(self):
        """The atom at y is counted once, on the left piece."""
        nu = EmpiricalRadonMeasure(np.array([0.0, 1.0, 2.0]), np.array([1.0, 5.0, 1.0]))
        d = NuDistance(nu)
        assert float(d(0.0, 1.0)) == 5.0
        assert float(d(1.0, 2.0)) == 1.0
        assert float(d(0.0, 2.0)) == float(d(0.0, 1.0)) + float(d(1.0, 2.0))

    def test_vectorized(self):
        d = NuDistance(LebesgueMeasure())
        np.testing.assert_allclose(d(np.array([0.0, 2.0]), np.array([1.0, 0.5])), [1.0, 1.5])


class TestMartingale:

    def test_translations_keep_gaps(self, translations, stream):
        """Coupled translations never change the gap."""
        result = martingale_check(translations, LebesgueMeasure(), 0.5, 1.25, 100, 20, stream)
        np.testing.assert_allclose(result.means, 0.75)
        assert result.passed
        assert list(result.to_frame().columns) == ["step", "mean", "se", "z"]

    def test_replica_noise(self, translations, stream):
        """Replicas add a measure term to the error of each step."""
        xs = np.linspace(-50.0, 50.0, 10_001)
        nu = EmpiricalRadonMeasure(
            xs,
            np.full(len(xs), 0.01),
            reference=Interval(0.0, 1.0),
            replicas=np.arange(len(xs)) % 4,
        )
        result = martingale_check(translations, nu, 0.5, 1.25, 50, 40, stream)
        assert result.nu_se.shape == (51,)
        assert np.all(np.isfinite(result.nu_se)) and result.nu_se.max() < 0.05
        assert np.all(result.total_se >= result.se)
        assert "nu_se" in result.to_frame().columns

    def test_order(self, translations, stream):
        with pytest.raises(ValueError):
            martingale_check(translations, LebesgueMeasure(), 2.0, 1.0, 10, 2, stream)


class TestContraction:

    def test_translations_do_not_contract(self, translations, stream):
        result = contraction_experiment(
            translations, 0.5, 1.0, Interval(-1000.0, 1000.0), 100, 30, stream
        )
        assert result.checkpoints == [25, 50, 100]
        assert result.gated_fraction(100) == 1.0
        assert result.median(100) == 0.5
        frac, lo, hi = result.contracting_fraction()
        assert frac == 0.0
        assert lo == pytest.approx(0.0, abs=1e-12)
        assert 0.0 < hi < 0.2

    def test_gating(self, translations, stream):
        """Trials whose first copy is outside J are left out of the quantiles."""
        result = contraction_experiment(translations, 0.5, 1.0, Interval(0.0, 1.0), 101, 50, stream)
        assert 0.0 <= result.gated_fraction(101) < 1.0

    def test_dump(self, translations, stream):
        result = contraction_experiment(
            translations,
            0.5,
            1.0,
            Interval(-10.0, 10.0),
            100,
            10,
            stream,
            nu=LebesgueMeasure(),
            dump_trials=3,
            dump_every=10,
            batch_trials=2,
        )
        dump = result.dump
        assert list(dump.columns) == ["trial", "step", "gap_euclidean", "gap_nu", "gated"]
        assert len(dump) == 3 * 11
        assert dump["trial"].unique().tolist() == [0, 1, 2]
        np.testing.assert_allclose(dump["gap_nu"], 0.5)

    def test_frame(self, translations, stream):
        frame = contraction_experiment(
            translations, 0.5, 1.0, Interval(-100.0, 100.0), 40, 5, stream
        ).to_frame()
        assert list(frame.columns) == ["step", "gated_fraction", "median", "q90"]

    def test_order(self, translations, stream):
        with pytest.raises(ValueError):
            contraction_experiment(translations, 1.0, 1.0, Interval(0.0, 1.0), 10, 2, stream)

    def test_excursions(self, translations, stream):
        frame = gap_excursions(translations, LebesgueMeasure(), 0.5, 1.5, 50, 8, stream)
        assert (frame["max_ratio"] == 1.0).all()
        assert (frame["min_ratio"] == 1.0).all()
        np.testing.assert_allclose(frame["final_nu_gap"], 1.0)


class TestContractionVerdict:
    """Pass/fail rule for the contraction check."""

    @pytest.fixture
    def rigid(self, translations, stream):
        return contraction_experiment(
            translations, 0.1, 0.3, Interval(-1000.0, 1000.0), 100, 20, stream
        )

    def test_rigid_systems_keep_gaps(self, rigid):
        passed, value, threshold, details = contraction_verdict(rigid, "discrete-orbit")
        assert passed
        assert value <= threshold
        assert details.startswith("discrete-orbit")

    def test_constant_gaps_are_not_contraction(self, rigid):
        passed, value, _, _ = contraction_verdict(rigid, "strong-contraction-like")
        assert not passed
        assert value == pytest.approx(1.0)

    def test_lift_contracts_inside_a_fixed_point_cell(self, lifted_rotation, stream):
        """Starts 0.1 and 0.3 share the cell between the fixed points 0 and 1/2."""
        J = recurrence_interval(lifted_rotation).widen(1)
        result = contraction_experiment(lifted_rotation, 0.1, 0.3, J, 10_000, 200, stream)
        _, lo, _ = result.contracting_fraction()
        assert lo > 0
        assert contraction_verdict(result, "lift-like")[0]


class TestStructureClassifier:
    """Decision tree on the preset systems."""

    def test_discrete_orbit(self, translations, stream):
        result = StructureClassifier(translations, stream, samples=4000).classify()
        assert result["verdict"] == "discrete-orbit"
        assert result["discrete_orbit"]["min_gap"] == pytest.approx(1.0)

    def test_dense_translations(self, minimal_translations, stream):
        result = StructureClassifier(minimal_translations, stream, samples=4000).classify()
        assert result["verdict"] == "translation-like"
        assert not result["discrete_orbit"]["discrete"]

    def test_lift(self, lifted_rotation, stream):
        result = StructureClassifier(lifted_rotation, stream, samples=4000).classify()
        assert result["verdict"] == "lift-like"

    def test_translation_check(self, affine, stream):
        check = StructureClassifier(affine, stream).check_translations()
        assert check == {"translations": False, "translation_count": 2}

    def test_classify_structure(self, translations, stream):
        verdict = classify_structure(translations, 2000, stream)
        assert verdict in VERDICTS
