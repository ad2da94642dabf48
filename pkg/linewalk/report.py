"""
Report generation module.

Renders a Markdown summary of a finished scenario and the plotting script
that turns its CSV artifacts into figures.

Author: linewalk developers
"""

from __future__ import annotations

from pathlib import Path
from typing import TYPE_CHECKING, Union

from jinja2 import Environment, StrictUndefined

if TYPE_CHECKING:
    from linewalk.core import Scenario

REPORT_TEMPLATE = """\
# linewalk report: {{ system }} / {{ experiment }}

| Property | Value |
|---|---|
| Generators | {{ generators | join(", ") }} |
| Seed | {{ seed }} |
| Config hash | `{{ config_hash }}` |
| Recurrence interval K | [{{ "%g" | format(K[0]) }}, {{ "%g" | format(K[1]) }}] |
| Verdict | **{{ verdict }}** |

## Checks

| Check | Status | Value | Threshold | Details |
|---|---|---|---|---|
{% for c in checks -%}
| {{ c.Check }} | {{ c.Status }} | {{ c.Value }} | {{ c.Threshold }} | {{ c.Details }} |
{% endfor %}
## Artifacts

{% for name, rows in artifacts -%}
- `{{ name }}.csv` ({{ rows }} rows)
{% endfor %}
{%- if structure %}
## Structure

Verdict: **{{ structure.verdict }}**
{% for key, value in structure.items() if key != "verdict" %}
- {{ key }}: {{ value }}
{%- endfor %}
{% endif %}
Generated by linewalk {{ version }}. Run `python plot_results.py` in this
directory to draw the figures.
"""

PLOT_SCRIPT_TEMPLATE = '''\
"""Draw the figures for scenario {{ config_hash[:12] }} ({{ system }} / {{ experiment }})."""

from pathlib import Path

from linewalk.charts import render_all

if __name__ == "__main__":
    for path in render_all(Path(__file__).resolve().parent):
        print(path)
'''


class ReportGenerator:
    """Writes the Markdown report and the plotting script for a scenario.

    Args:
        scenario: A finished :class:`Scenario`.
    """

    def __init__(self, scenario: "Scenario") -> None:
        self._scenario = scenario
        self._env = Environment(
            autoescape=False, undefined=StrictUndefined, keep_trailing_newline=True
        )

    def _context(self) -> dict:
        import linewalk

        data = self._scenario.summary(print_output=False)
        return {
            **data,
            "artifacts": [(name, len(frame)) for name, frame in self._scenario.tables.items()],
            "structure": self._scenario.structure,
            "version": linewalk.__version__,
        }

    def render(self) -> str:
        """Report text."""
        return self._env.from_string(REPORT_TEMPLATE).render(**self._context())

    def generate(self, output_path: Union[str, Path] = "report.md") -> Path:
        """Generate and save the report.

        Args:
            output_path: Output file path.

        Returns:
            Path to the generated report.
        """
        output_path = Path(output_path)
        output_path.parent.mkdir(parents=True, exist_ok=True)
        output_path.write_text(self.render(), encoding="utf-8")
        return output_path

    def plot_script(self, output_path: Union[str, Path] = "plot_results.py") -> Path:
        """Write the script that renders every figure from the CSVs next to it."""
        output_path = Path(output_path)
        data = self._scenario.summary(print_output=False)
        script = self._env.from_string(PLOT_SCRIPT_TEMPLATE).render(**data)
        output_path.write_text(script, encoding="utf-8")
        return output_path
