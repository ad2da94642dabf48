"""Seeded statistical checks on the preset systems (slow)."""

import numpy as np
import pytest
from scipy import stats

from linewalk.chain import CompiledSystem, iterate_ensemble, oscillation_stats, simulate
from linewalk.config import ScenarioConfig
from linewalk.core import Scenario
from linewalk.derriennic import (
    build_chart,
    conjugate,
    displacement_check,
    drift_noise,
    drift_profile,
    inner_grid,
    lipschitz_check,
)
from linewalk.geometry import contraction_experiment, martingale_check
from linewalk.rng import RandomStream
from linewalk.stationary import (
    EmpiricalRadonMeasure,
    TestFunction,
    default_test_functions,
    stationarity_report,
    uniqueness_cross_check,
)
from linewalk.walkgroup import recurrence_interval

AFFINE_KNOBS = {
    "kb_iterations": 8,
    "kb_lanes": 256,
    "n_starts": 256,
    "samples_per_start": 8,
    "n_batches": 20,
    "cap": 200_000,
    "reach_trials": 1024,
}


@pytest.fixture(scope="module")
def affine_scenario():
    """The affine system with its stationary measure, built once per module."""
    data = {"system": "affine", "experiment": "stationary", "knobs": AFFINE_KNOBS, "seed": 5}
    return Scenario(ScenarioConfig.from_dict(data, env={})).run()


@pytest.mark.slow
class TestChainStatistics:
    """One-step law, coupling and letter counts of the affine walk."""

    def test_oscillation(self, affine, stream):
        K = recurrence_interval(affine)
        result = oscillation_stats(affine, 0.5, 2000, 400, float(K.hi), stream)
        assert result.min_stay_z <= 3.0

    def test_one_step_images_follow_weights(self, affine, stream):
        trials = 4000
        streams = [stream.child(t) for t in range(trials)]
        images = None
        for k, pos, _ in iterate_ensemble(CompiledSystem(affine), [3.0], 1, streams):
            if k == 1:
                images = pos[:, 0].copy()
        targets = [float(g.homeo(3)) for g in affine.generators]
        assert len(set(targets)) == affine.size
        counts = np.array([np.count_nonzero(np.isclose(images, t)) for t in targets])
        assert counts.sum() == trials
        expected = np.array([float(w) for w in affine.weights]) * trials
        assert stats.chisquare(counts, expected).pvalue > 1e-3

    def test_monotone_coupling(self, affine, stream):
        """Copies driven by the same letters never change order."""
        starts = [-1.0, 0.1, 0.5, 2.0, 7.3]
        streams = [stream.child(t) for t in range(50)]
        for _, pos, _ in iterate_ensemble(CompiledSystem(affine), starts, 2000, streams):
            assert np.all(np.diff(pos, axis=1) >= 0)

    def test_letter_frequencies(self, affine, stream):
        n = 40_000
        counts = np.bincount(simulate(affine, 0.5, n, stream).letters, minlength=affine.size)
        for count, w in zip(counts, affine.weights):
            p = float(w)
            assert abs(count - n * p) <= 3 * np.sqrt(n * p * (1 - p))


@pytest.mark.slow
class TestAffineMeasure:
    """Stationarity, martingale, contraction and chart checks on the affine system."""

    def test_stationarity_passes(self, affine_scenario):
        checks = affine_scenario.checks().set_index("Check")
        assert checks.loc["Stationarity", "Status"] == "PASS"

    def test_rescaled_measure_fails(self, affine_scenario):
        """A stretched copy of the measure is caught by the same check."""
        nu = affine_scenario.nu
        stretched = EmpiricalRadonMeasure(
            3.0 * nu.positions + 0.25,
            nu.weights,
            reference=nu.reference,
            replicas=nu.replicas,
        )
        functions = default_test_functions(affine_scenario.K)
        report = stationarity_report(affine_scenario.system, stretched, functions)
        assert report["z"].max() > 3.0

    def test_martingale(self, affine_scenario):
        result = martingale_check(
            affine_scenario.system, affine_scenario.nu, 0.2, 0.8, 200, 4000, RandomStream(6)
        )
        assert result.passed

    def test_contraction(self, affine_scenario):
        K = affine_scenario.K
        result = contraction_experiment(
            affine_scenario.system, 0.1, 0.3, K.widen(1), 10_000, 200, RandomStream(8)
        )
        assert result.median(result.final) / result.initial_gap <= 0.2

    def test_zero_drift_chart(self, affine_scenario):
        system, nu, K = affine_scenario.system, affine_scenario.nu, affine_scenario.K
        x0 = min(max(float(K.lo), nu.hull.lo), nu.hull.hi)
        chart = build_chart(nu, x0)
        conj = conjugate(system, chart)
        grid = inner_grid(chart, 11, K)
        assert lipschitz_check(conj, 0.1, domain=chart.range)["passed"].all()
        assert displacement_check(conj, grid, 0.1)["passed"].all()
        sigma = drift_noise(system, nu, chart, grid)
        assert drift_profile(conj, grid).max_abs <= 3 * float(np.max(sigma))


@pytest.mark.slow
class TestUniqueness:

    def test_ratio_target_on_minimal_translations(self, minimal_translations, stream):
        """Lebesgue measure gives the two bumps a ratio of 1/2."""
        K = recurrence_interval(minimal_translations)
        lo, mid, hi, L = float(K.lo), float(K.midpoint), float(K.hi), float(K.length)
        psi = TestFunction.bump(lo, mid, L / 8)
        phi = TestFunction.bump(lo, hi, L / 4)
        report = uniqueness_cross_check(
            minimal_translations, 0.0, 7.3, psi, phi, 20_000, 64, stream, K=K
        )
        assert report.median_x1 == pytest.approx(0.5, rel=0.1)
        assert report.median_x2 == pytest.approx(0.5, rel=0.1)
        assert report.starts_agree
