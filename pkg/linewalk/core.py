"""
Core module: Scenario class, the central entry point for linewalk.

Runs a configured experiment on a generator system, keeps every table it
produces, turns the statistical criteria into a verdict table, and writes
the CSV artifacts, the config echo, a report and a plotting script.

Author: linewalk developers
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np
import pandas as pd

from linewalk.chain import (
    BumpProfile,
    oscillation_stats,
    recurrence_visits,
    word_event_frequency,
)
from linewalk.config import ScenarioConfig, load_config, word_letters
from linewalk.derriennic import (
    build_chart,
    conjugate,
    displacement_check,
    drift_noise,
    drift_profile,
    inner_grid,
    lipschitz_check,
)
from linewalk.errors import ConfigError
from linewalk.geometry import (
    StructureClassifier,
    contraction_experiment,
    contraction_verdict,
    martingale_check,
)
from linewalk.homeo import Interval
from linewalk.rng import RandomStream
from linewalk.stationary import (
    EmpiricalRadonMeasure,
    TestFunction,
    atom_scan,
    bi_infiniteness_scan,
    build_stationary,
    default_test_functions,
    default_window,
    krylov_bogolyubov,
    reach_window,
    stationarity_report,
    uniqueness_cross_check,
)
from linewalk.utils import canonical_json, make_serializable, write_csv
from linewalk.walkgroup import drift_at, recurrence_interval, validate

logger = logging.getLogger("linewalk")

# fixed child keys, so a section gives the same numbers alone or in the pipeline
STREAM_KEYS = {
    "recurrence": 0,
    "oscillation": 1,
    "stationary": 2,
    "uniqueness": 3,
    "contraction": 4,
    "structure": 5,
    "martingale": 6,
    "bi-infiniteness": 7,
    "word-events": 8,
}

PIPELINE = (
    "recurrence",
    "oscillation",
    "stationary",
    "martingale",
    "bi-infiniteness",
    "uniqueness",
    "word-events",
    "contraction",
    "derriennic",
)


def run(config: Union[ScenarioConfig, dict, str, Path]) -> "Scenario":
    """Run a scenario with a single function call.

    Args:
        config: A :class:`ScenarioConfig`, a config dictionary, or a path
            to a JSON scenario file.

    Returns:
        The finished :class:`Scenario`.

    Example:
        >>> import linewalk
        >>> s = linewalk.run({"system": "affine", "experiment": "recurrence"})
        >>> s.summary()
        >>> s.save("out/")
    """
    if isinstance(config, (str, Path)):
        config = load_config(config)
    elif isinstance(config, dict):
        config = ScenarioConfig.from_dict(config)
    scenario = Scenario(config)
    scenario.run()
    return scenario


class Scenario:
    """One configured experiment and everything it produced.

    Args:
        config: Validated scenario configuration.

    Raises:
        ConfigError: If the generator system fails validation.
    """

    def __init__(self, config: ScenarioConfig) -> None:
        self._config = config
        self._system = config.build_system()
        self._validation = validate(self._system)
        if not self._validation.passed:
            failed = ", ".join(c["check"] for c in self._validation.failures)
            raise ConfigError("system", f"generator system fails validation ({failed})")

        k = config.knobs
        self._K = recurrence_interval(self._system, k["A"], k["margin"])
        self._xi = BumpProfile.around(self._K)
        self._stream = RandomStream(config.seed)
        self._tables: dict[str, pd.DataFrame] = {}
        self._checks: list[dict[str, Any]] = []
        self._records: dict[str, Any] = {}
        self._nu: Optional[EmpiricalRadonMeasure] = None
        self._done = False

    # ── Properties ──────────────────────────────────────────────────────

    @property
    def config(self) -> ScenarioConfig:
        return self._config

    @property
    def system(self):
        return self._system

    @property
    def K(self):
        """Recurrence interval."""
        return self._K

    @property
    def tables(self) -> dict[str, pd.DataFrame]:
        """Result tables by artifact name."""
        return self._tables

    @property
    def nu(self) -> Optional[EmpiricalRadonMeasure]:
        """Stationary measure, once built."""
        return self._nu

    @property
    def structure(self) -> Optional[dict[str, Any]]:
        """Structure classifier output, when the contraction section ran."""
        return self._records.get("structure")

    @property
    def verdict(self) -> str:
        """``PASS`` unless some check failed."""
        if any(c["Status"] == "FAIL" for c in self._checks):
            return "FAIL"
        return "PASS"

    # ── Core Methods ────────────────────────────────────────────────────

    def run(self) -> "Scenario":
        """Execute the configured experiment (idempotent)."""
        if self._done:
            return self
        cfg = self._config
        sections = PIPELINE if cfg.experiment == "full-pipeline" else (cfg.experiment,)
        logger.info("Scenario '%s' on %s, seed %d", cfg.experiment, self._system_label(), cfg.seed)
        for section in sections:
            getattr(self, f"_run_{section.replace('-', '_')}")()
        self._done = True
        logger.info("Scenario finished: %s", self.verdict)
        return self

    def checks(self) -> pd.DataFrame:
        """Return a DataFrame summarizing every statistical criterion.

        Returns:
            DataFrame with columns: Check, Status, Value, Threshold, Details.
        """
        checks = [
            {
                "Check": "System Validation",
                "Status": "PASS",
                "Value": len(self._validation.checks),
                "Threshold": len(self._validation.checks),
                "Details": "All structural checks passed",
            }
        ]
        return pd.DataFrame(checks + self._checks)

    def summary(self, print_output: bool = True) -> dict:
        """Generate a concise summary of the scenario.

        Args:
            print_output: If True, prints a formatted summary to stdout.

        Returns:
            Dictionary containing the summary data.
        """
        data = {
            "system": self._system_label(),
            "experiment": self._config.experiment,
            "generators": self._system.names,
            "seed": self._config.seed,
            "config_hash": self._config.content_hash(),
            "K": self._K.as_tuple(),
            "verdict": self.verdict,
            "checks": self.checks().to_dict("records"),
        }
        if print_output:
            self._print_summary(data)
        return data

    def save(self, output_dir: Optional[Union[str, Path]] = None) -> list[Path]:
        """Write CSV artifacts, ``config.json``, ``report.md`` and ``plot_results.py``.

        Every CSV starts with ``# config_hash:`` and ``# config:`` lines.

        Returns:
            Paths written, in order.
        """
        from linewalk.report import ReportGenerator

        out = Path(output_dir or self._config.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        header = {
            "config_hash": self._config.content_hash(),
            "config": canonical_json(self._config.provenance()),
        }
        written = []
        for name, frame in self._tables.items():
            written.append(write_csv(frame, out / f"{name}.csv", header))
        written.append(write_csv(self.checks(), out / "checks.csv", header))
        for name, record in self._records.items():
            path = out / f"{name}.json"
            path.write_text(json.dumps(make_serializable(record), indent=2) + "\n", "utf-8")
            written.append(path)
        config_path = out / "config.json"
        config_path.write_text(json.dumps(self._config.to_dict(), indent=2) + "\n", "utf-8")
        written.append(config_path)
        generator = ReportGenerator(self)
        written.append(generator.generate(out / "report.md"))
        written.append(generator.plot_script(out / "plot_results.py"))
        return written

    # ── Sections ────────────────────────────────────────────────────────

    def _add_check(
        self,
        check: str,
        passed: Optional[bool],
        value: Any,
        threshold: Any,
        details: str,
    ) -> None:
        status = "INFO" if passed is None else ("PASS" if passed else "FAIL")
        self._checks.append(
            {
                "Check": check,
                "Status": status,
                "Value": value,
                "Threshold": threshold,
                "Details": details,
            }
        )

    def _child(self, section: str) -> RandomStream:
        return self._stream.child(STREAM_KEYS[section])

    def _run_recurrence(self) -> None:
        k = self._config.knobs
        n = k["n"]
        visits = recurrence_visits(
            self._system,
            k["start"],
            self._K,
            [n, 2 * n],
            k["trials"],
            self._child("recurrence"),
            workers=self._config.workers,
        )
        self._tables["visits"] = visits
        median = float(visits[f"visits_{n}"].median())
        growing = float((visits[f"visits_{2 * n}"] > visits[f"visits_{n}"]).mean())
        self._add_check(
            "Recurrence",
            median >= k["min_visits"],
            median,
            k["min_visits"],
            f"median visits to K in {n:,} steps",
        )
        self._add_check(
            "Visit Growth",
            growing >= 0.9,
            growing,
            0.9,
            f"fraction of trials with more visits by {2 * n:,} than by {n:,}",
        )

    def _run_oscillation(self) -> None:
        k = self._config.knobs
        stats = oscillation_stats(
            self._system,
            k["start"],
            k["n"],
            k["trials"],
            float(self._K.hi),
            self._child("oscillation"),
            workers=self._config.workers,
        )
        self._tables["oscillation"] = stats.to_frame()
        self._add_check(
            "Oscillation",
            stats.min_stay_z <= 3.0,
            round(stats.min_stay_z, 3),
            3.0,
            "worst shortfall of P(X_k >= x) below 1/2, in standard errors",
        )
        self._add_check(
            "Threshold Crossing",
            None,
            f"{stats.frac_exceed_up:.3f} / {stats.frac_exceed_down:.3f}",
            "",
            f"fractions reaching {stats.up_threshold:g} and {stats.down_threshold:g}",
        )

    def _stationary(self) -> EmpiricalRadonMeasure:
        if self._nu is not None:
            return self._nu
        k = self._config.knobs
        stream = self._child("stationary")
        common = {
            "cap": k["cap"],
            "on_cap": k["on_cap"],
            "escape_radius": k["escape_radius"],
            "workers": self._config.workers,
        }
        nu0 = krylov_bogolyubov(
            self._system, self._xi, k["kb_iterations"], k["kb_lanes"], stream.child(0), **common
        )
        x, y = self._martingale_pair()
        window = reach_window(
            self._system,
            Interval(min(float(self._K.lo), x), max(float(self._K.hi), y)),
            k["martingale_n"],
            stream.child(2),
            trials=k["reach_trials"],
            quantile=k["reach_quantile"],
            base=default_window(self._xi, k["window_widen"]),
            escape_radius=k["escape_radius"],
            workers=self._config.workers,
        )
        self._nu = build_stationary(
            self._system,
            nu0,
            self._xi,
            k["samples_per_start"],
            stream.child(1),
            n_starts=k["n_starts"],
            n_batches=k["n_batches"],
            window=window,
            **common,
        )
        self._tables["nu"] = self._nu.to_frame()
        return self._nu

    def _martingale_pair(self) -> tuple[float, float]:
        k = self._config.knobs
        return k["martingale_start"], k["martingale_start"] + k["martingale_gap"]

    def _run_stationary(self) -> None:
        k = self._config.knobs
        nu = self._stationary()
        functions = default_test_functions(self._K, k["test_functions"])
        report = stationarity_report(self._system, nu, functions)
        self._tables["stationarity"] = report
        worst = float(report["z"].max())
        self._add_check(
            "Stationarity",
            bool(worst <= 3.0),
            round(worst, 3),
            3.0,
            f"largest residual over its noise floor ({len(functions)} test functions)",
        )
        atoms = atom_scan(nu, resolution=0.05)
        self._tables["atoms"] = pd.DataFrame(
            {"position": [a.position for a in atoms], "mass": [a.mass for a in atoms]}
        )
        censored = int(nu.meta.get("censored", 0))
        self._add_check(
            "Censored Runs",
            None,
            censored,
            0,
            f"{censored} of {nu.meta.get('runs', 0)} stopped runs hit the cap or escape radius",
        )

    def _run_martingale(self) -> None:
        k = self._config.knobs
        nu = self._stationary()
        x, y = self._martingale_pair()
        result = martingale_check(
            self._system,
            nu,
            x,
            y,
            k["martingale_n"],
            k["martingale_trials"],
            self._child("martingale"),
            workers=self._config.workers,
        )
        self._tables["martingale"] = result.to_frame()
        self._add_check(
            "Martingale",
            result.passed,
            round(result.max_z, 3),
            3.0,
            f"largest |E d(X_k^x, X_k^y) - d(x, y)| in standard errors, k <= {k['martingale_n']}",
        )

    def _run_bi_infiniteness(self) -> None:
        k = self._config.knobs
        radii = [k["radius"] * 4.0**j for j in range(k["radii"])]
        masses = bi_infiniteness_scan(
            self._system,
            self._xi,
            radii,
            self._child("bi-infiniteness"),
            runs=k["scan_runs"],
            kb_iterations=k["kb_iterations"],
            kb_lanes=k["kb_lanes"],
            cap=k["cap"],
            escape_radius=k["escape_radius"],
            workers=self._config.workers,
        )
        self._tables["bi_infiniteness"] = masses
        first, last = masses.iloc[0], masses.iloc[-1]
        grows = bool(last["left"] > first["left"] and last["right"] > first["right"])
        self._add_check(
            "Bi-infiniteness",
            grows if len(radii) > 1 else None,
            f"{last['left']:.4g} / {last['right']:.4g}",
            "",
            f"mass left and right of 0 grows from radius {radii[0]:g} to {radii[-1]:g}",
        )

    def _run_word_events(self) -> None:
        k = self._config.knobs
        word = word_letters(k["word"])
        stats = word_event_frequency(
            self._system,
            k["start"],
            self._K,
            word,
            k["n"],
            k["trials"],
            self._child("word-events"),
            workers=self._config.workers,
        )
        self._tables["word_events"] = stats.to_frame()
        self._add_check(
            "Word Events",
            bool(stats.z <= 3.0),
            round(stats.z, 3),
            3.0,
            f"visits to K followed by '{k['word']}' vs p * occupancy, in standard errors",
        )

    def _run_uniqueness(self) -> None:
        k = self._config.knobs
        K = self._K
        L = float(K.length)
        psi = TestFunction.bump(float(K.lo), float(K.midpoint), L / 8)
        phi = TestFunction.bump(float(K.lo), float(K.hi), L / 4)
        report = uniqueness_cross_check(
            self._system,
            k["start"],
            k["start2"],
            psi,
            phi,
            k["N"],
            k["uniqueness_trials"],
            self._child("uniqueness"),
            nu=self._nu,
            tolerance=k["uniqueness_tolerance"],
            workers=self._config.workers,
            K=K,
        )
        self._tables["uniqueness"] = pd.DataFrame(
            {
                "trial": np.arange(len(report.ratios)),
                "x1": report.ratios[:, 0],
                "x2": report.ratios[:, 1],
            }
        )
        self._add_check(
            "Ratio Agreement",
            report.starts_agree,
            round(report.relative_gap, 4),
            k["uniqueness_tolerance"],
            "relative gap between ratio medians from two starts",
        )
        if report.measure_agrees is not None:
            self._add_check(
                "Ratio vs Measure",
                report.measure_agrees,
                round(report.nu_ratio, 4),
                k["uniqueness_tolerance"],
                "ratio of integrals under the pooled measure",
            )

    def _run_contraction(self) -> None:
        k = self._config.knobs
        classifier = StructureClassifier(
            self._system,
            self._child("structure"),
            samples=k["classify_samples"],
            workers=self._config.workers,
        )
        structure = classifier.classify()
        self._records["structure"] = structure
        self._add_check("Structure", None, structure["verdict"], "", "structure classifier verdict")

        x = k["contraction_start"]
        result = contraction_experiment(
            self._system,
            x,
            x + k["gap"],
            self._K.widen(1),
            k["contraction_n"],
            k["contraction_trials"],
            self._child("contraction"),
            nu=self._nu,
            dump_trials=k["dump_trials"],
            dump_every=k["dump_every"],
            workers=self._config.workers,
        )
        self._tables["contraction"] = result.to_frame()
        if result.dump is not None:
            self._tables["contraction_paths"] = result.dump
        passed, value, threshold, details = contraction_verdict(result, structure["verdict"])
        self._add_check("Contraction", passed, value, threshold, details)

    def _run_derriennic(self) -> None:
        k = self._config.knobs
        nu = self._stationary()
        x0 = min(max(float(self._K.lo), nu.hull.lo), nu.hull.hi)
        chart = build_chart(nu, x0)
        conj = conjugate(self._system, chart, k["chart_nodes"])
        grid = inner_grid(chart, k["grid_points"], self._K)
        profile = drift_profile(conj, grid)
        frame = profile.to_frame()
        sigma = None
        if nu.n_replicas >= 2:
            sigma = drift_noise(self._system, nu, chart, grid, k["chart_nodes"])
            frame["sigma"] = sigma
        self._tables["chart"] = chart.to_frame()
        self._tables["drift"] = frame
        self._tables["lipschitz"] = lipschitz_check(
            conj, k["lipschitz_tolerance"], domain=chart.range
        )
        self._tables["displacement"] = displacement_check(conj, grid, k["displacement_tolerance"])
        self._records["conjugated_system"] = conj.to_record()

        raw = float(drift_at(self._system, 8))
        self._add_check("Raw Drift", None, raw, 0, "drift of the original system at x = 8")
        if sigma is not None:
            bound = 3 * float(np.max(sigma))
            self._add_check(
                "Zero Drift",
                profile.max_abs <= bound,
                profile.max_abs,
                round(bound, 6),
                f"max |drift| after the chart on {len(grid)} grid points vs 3 sigma",
            )
        lip = self._tables["lipschitz"]
        self._add_check(
            "Lipschitz",
            bool(lip["passed"].all()),
            float(lip["max_slope"].max()),
            float(lip["bound"].min()),
            "largest conjugated slope vs (1 + tol) / weight",
        )
        disp = self._tables["displacement"]
        self._add_check(
            "Displacement",
            bool(disp["passed"].all()),
            float(disp["displacement"].max()),
            float(disp["bound"].min()),
            "sup |g(y) - y| vs (1 + tol) sqrt(2 Phi) / weight",
        )

    # ── Private Methods ─────────────────────────────────────────────────

    def _system_label(self) -> str:
        system = self._config.system
        return system if isinstance(system, str) else f"custom ({self._system.size} generators)"

    def _print_summary(self, data: dict) -> None:
        """Pretty-print the summary using rich formatting."""
        try:
            from rich.console import Console
            from rich.panel import Panel
            from rich.table import Table

            console = Console()
            header = (
                f"[bold cyan]linewalk scenario:[/bold cyan] [bold]{data['system']}[/bold] "
                f"/ {data['experiment']}"
            )
            console.print(Panel(header, expand=False))

            table = Table(title="Scenario", show_header=True)
            table.add_column("Property", style="bold")
            table.add_column("Value")
            table.add_row("Generators", ", ".join(data["generators"]))
            table.add_row("Seed", str(data["seed"]))
            table.add_row("Config hash", data["config_hash"])
            table.add_row("K", f"[{data['K'][0]:g}, {data['K'][1]:g}]")
            style = "[bold green]" if data["verdict"] == "PASS" else "[bold red]"
            table.add_row("Verdict", f"{style}{data['verdict']}[/]")
            console.print(table)

            check_table = Table(title="Checks", show_header=True)
            check_table.add_column("Check", style="bold")
            check_table.add_column("Status")
            check_table.add_column("Value", justify="right")
            check_table.add_column("Details")
            colors = {"PASS": "green", "FAIL": "red", "INFO": "cyan"}
            for c in data["checks"]:
                color = colors.get(c["Status"], "white")
                check_table.add_row(
                    c["Check"], f"[{color}]{c['Status']}[/{color}]", str(c["Value"]), c["Details"]
                )
            console.print(check_table)

        except ImportError:
            print(f"\n{'=' * 60}")
            print(f"  linewalk scenario: {data['system']} / {data['experiment']}")
            print(f"{'=' * 60}")
            print(f"  Seed:         {data['seed']}")
            print(f"  Config hash:  {data['config_hash']}")
            print(f"  Verdict:      {data['verdict']}")
            print(f"{'=' * 60}")
            for c in data["checks"]:
                print(f"  [{c['Status']}] {c['Check']}: {c['Value']} ({c['Details']})")
            print(f"{'=' * 60}\n")

    def __repr__(self) -> str:
        return (
            f"Scenario(system='{self._system_label()}', experiment='{self._config.experiment}', "
            f"seed={self._config.seed}, verdict={self.verdict})"
        )

    def __str__(self) -> str:
        return (
            f"linewalk scenario: {self._system_label()} / {self._config.experiment}\n"
            f"  Generators: {', '.join(self._system.names)}\n"
            f"  K: [{self._K.as_tuple()[0]:g}, {self._K.as_tuple()[1]:g}]\n"
            f"  Verdict: {self.verdict}"
        )
