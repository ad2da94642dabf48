"""Tests for the matplotlib figure builders."""

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd
import pytest

from linewalk import charts
from linewalk.utils import write_csv


@pytest.fixture(autouse=True)
def close_figures():
    yield
    plt.close("all")


class TestBuilders:
    """Each builder returns a Figure for well-formed frames."""

    def test_visits(self):
        frame = pd.DataFrame({"trial": range(5), "visits_10": range(5), "visits_20": range(5)})
        assert isinstance(charts.visits_histogram(frame), plt.Figure)

    def test_visits_needs_columns(self):
        with pytest.raises(ValueError, match="visits_"):
            charts.visits_histogram(pd.DataFrame({"trial": [0]}))

    def test_oscillation(self):
        frame = pd.DataFrame(
            {"step": [1, 2, 3], "frac_stay_above_start": [0.5, 0.6, 0.55], "se": [0.05] * 3}
        )
        assert isinstance(charts.oscillation_curve(frame), plt.Figure)

    def test_martingale(self):
        frame = pd.DataFrame(
            {"step": [0, 1, 2], "mean": [0.6, 0.61, 0.59], "se": [0.0, 0.01, 0.01], "nu_se": 0.005}
        )
        assert isinstance(charts.martingale_curve(frame), plt.Figure)
        assert isinstance(charts.martingale_curve(frame.drop(columns="nu_se")), plt.Figure)

    def test_measure(self):
        frame = pd.DataFrame({"position": np.linspace(0, 1, 50), "weight": np.full(50, 0.02)})
        assert isinstance(charts.measure_histogram(frame), plt.Figure)

    def test_measure_single_point(self):
        frame = pd.DataFrame({"position": [2.0], "weight": [1.0]})
        assert isinstance(charts.measure_histogram(frame), plt.Figure)

    def test_contraction(self):
        frame = pd.DataFrame({"step": [10, 20], "median": [0.5, 0.1], "q90": [0.9, 0.3]})
        assert isinstance(charts.contraction_quantiles(frame), plt.Figure)

    def test_drift_with_sigma(self):
        frame = pd.DataFrame({"y": [1.0, 2.0], "drift": [0.01, -0.02], "sigma": [0.01, 0.01]})
        assert isinstance(charts.drift_plot(frame), plt.Figure)

    @pytest.mark.parametrize(
        "builder",
        [
            charts.oscillation_curve,
            charts.martingale_curve,
            charts.measure_histogram,
            charts.contraction_quantiles,
            charts.chart_curve,
            charts.drift_plot,
        ],
    )
    def test_missing_columns(self, builder):
        with pytest.raises(ValueError, match="Missing columns"):
            builder(pd.DataFrame({"other": [1.0]}))

    def test_checks_bar_empty(self):
        assert isinstance(charts.checks_summary_bar([]), plt.Figure)

    def test_checks_bar(self):
        checks = [
            {"Check": "Recurrence", "Status": "PASS", "Details": "x" * 80},
            {"Check": "Oscillation", "Status": "FAIL", "Details": "worst shortfall"},
        ]
        assert isinstance(charts.checks_summary_bar(checks), plt.Figure)


class TestRenderAll:
    """Rendering figures from a directory of artifacts."""

    def test_renders_present_csvs(self, tmp_path):
        header = {"config_hash": "abc"}
        write_csv(pd.DataFrame({"x": [0.0, 1.0], "D": [0.0, 2.0]}), tmp_path / "chart.csv", header)
        checks = pd.DataFrame(
            {
                "Check": ["Lipschitz"],
                "Status": ["PASS"],
                "Value": [1.0],
                "Threshold": [2.2],
                "Details": ["ok"],
            }
        )
        write_csv(checks, tmp_path / "checks.csv", header)
        written = charts.render_all(tmp_path, dpi=40)
        assert sorted(p.name for p in written) == ["chart.png", "checks.png"]
        assert all(p.stat().st_size > 0 for p in written)

    def test_empty_dir(self, tmp_path):
        assert charts.render_all(tmp_path) == []


class TestWeightedQuantile:

    def test_equal_weights(self):
        values = np.array([3.0, 1.0, 4.0, 2.0])
        weights = np.ones(4)
        assert charts.weighted_quantile(values, weights, 0.5) == 2.0
        assert charts.weighted_quantile(values, weights, 0.01) == 1.0
        assert charts.weighted_quantile(values, weights, 1.0) == 4.0

    def test_heavy_point(self):
        values = np.array([0.0, 1.0, 2.0])
        weights = np.array([0.1, 0.8, 0.1])
        assert charts.weighted_quantile(values, weights, 0.5) == 1.0
