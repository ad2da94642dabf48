"""Tests for the Markdown report and the plotting script."""

import pytest

from linewalk.config import ScenarioConfig
from linewalk.core import Scenario
from linewalk.report import ReportGenerator


@pytest.fixture(scope="module")
def scenario():
    config = ScenarioConfig.from_dict(
        {
            "system": "translations-discrete",
            "experiment": "recurrence",
            "knobs": {"n": 100, "trials": 8, "min_visits": 0},
            "seed": 5,
        },
        env={},
    )
    return Scenario(config).run()


class TestReportGenerator:
    """Report rendering."""

    def test_render(self, scenario):
        text = ReportGenerator(scenario).render()
        assert text.startswith("# linewalk report: translations-discrete / recurrence")
        assert scenario.config.content_hash() in text
        for check in ("System Validation", "Recurrence", "Visit Growth"):
            assert f"| {check} |" in text
        assert "`visits.csv` (8 rows)" in text
        assert "## Structure" not in text

    def test_generate(self, scenario, tmp_path):
        path = ReportGenerator(scenario).generate(tmp_path / "sub" / "report.md")
        assert path.read_text(encoding="utf-8") == ReportGenerator(scenario).render()

    def test_plot_script(self, scenario, tmp_path):
        path = ReportGenerator(scenario).plot_script(tmp_path / "plot_results.py")
        script = path.read_text(encoding="utf-8")
        assert "from linewalk.charts import render_all" in script
        assert scenario.config.content_hash()[:12] in script
        compile(script, str(path), "exec")
