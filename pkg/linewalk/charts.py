"""
Charts module: static matplotlib figures drawn from scenario artifacts.

Each builder takes the DataFrame of one CSV artifact and returns a Figure;
:func:`render_all` draws every figure whose CSV is present in a directory.

Author: linewalk developers
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any, Callable, Union

import matplotlib
import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

from linewalk.utils import read_csv

matplotlib.use("Agg")

logger = logging.getLogger("linewalk")

PALETTE = {
    "primary": "#2563eb",
    "success": "#16a34a",
    "warning": "#f59e0b",
    "danger": "#dc2626",
    "info": "#0891b2",
    "muted": "#94a3b8",
    "bg": "#f8fafc",
    "text": "#1e293b",
    "grid": "#e2e8f0",
}

STATUS_COLORS = {"PASS": PALETTE["success"], "FAIL": PALETTE["danger"], "INFO": PALETTE["info"]}


def _axes(size: tuple[float, float], title: str):
    fig, ax = plt.subplots(figsize=size)
    fig.patch.set_facecolor(PALETTE["bg"])
    ax.set_title(title, fontsize=11, fontweight="bold", color=PALETTE["text"], pad=12)
    ax.grid(True, color=PALETTE["grid"], linewidth=0.6)
    ax.spines["top"].set_visible(False)
    ax.spines["right"].set_visible(False)
    return fig, ax


def _require(frame: pd.DataFrame, *columns: str) -> None:
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise ValueError(f"Missing columns {missing}; got {list(frame.columns)}")


# ────────────────────────────────────────────────────────────────────────
#  Chart generators
# ────────────────────────────────────────────────────────────────────────


def visits_histogram(visits: pd.DataFrame, size: tuple[float, float] = (6, 3.5)) -> plt.Figure:
    """Histogram of visit counts to K at each horizon."""
    cols = [c for c in visits.columns if c.startswith("visits_")]
    if not cols:
        raise ValueError("No visits_<n> columns found")
    fig, ax = _axes(size, "Visits to K")
    for col, color in zip(cols, (PALETTE["primary"], PALETTE["warning"], PALETTE["info"])):
        ax.hist(visits[col], bins=30, alpha=0.6, color=color, label=col.replace("_", " by "))
    ax.set_xlabel("visits")
    ax.set_ylabel("trials")
    ax.legend(fontsize=8, frameon=False)
    fig.tight_layout()
    return fig


def oscillation_curve(frame: pd.DataFrame, size: tuple[float, float] = (6, 3.5)) -> plt.Figure:
    """Per-step fraction of trajectories at or above their start, with a 3 SE band."""
    _require(frame, "step", "frac_stay_above_start", "se")
    fig, ax = _axes(size, "P(X_k >= x)")
    f, se = frame["frac_stay_above_start"], frame["se"]
    ax.fill_between(frame["step"], f - 3 * se, f + 3 * se, color=PALETTE["muted"], alpha=0.3)
    ax.plot(frame["step"], f, color=PALETTE["primary"], linewidth=1)
    ax.axhline(0.5, color=PALETTE["danger"], linestyle="--", linewidth=1)
    ax.set_xlabel("step")
    ax.set_ylim(0, 1)
    fig.tight_layout()
    return fig


def martingale_curve(frame: pd.DataFrame, size: tuple[float, float] = (6, 3.5)) -> plt.Figure:
    """Mean stationary distance per step with a 3 SE band around its start."""
    _require(frame, "step", "mean", "se")
    fig, ax = _axes(size, "E d(X_k^x, X_k^y)")
    se = np.sqrt(frame["se"] ** 2 + frame.get("nu_se", 0.0) ** 2)
    start = frame["mean"].iloc[0]
    band = (start - 3 * se, start + 3 * se)
    ax.fill_between(frame["step"], *band, color=PALETTE["muted"], alpha=0.3)
    ax.plot(frame["step"], frame["mean"], color=PALETTE["primary"], linewidth=1)
    ax.axhline(start, color=PALETTE["danger"], linestyle="--", linewidth=1)
    ax.set_xlabel("step")
    fig.tight_layout()
    return fig


def measure_histogram(nu: pd.DataFrame, size: tuple[float, float] = (6, 3.5)) -> plt.Figure:
    """Weighted histogram (density) of the stationary measure pool."""
    _require(nu, "position", "weight")
    fig, ax = _axes(size, "Stationary measure")
    pos, w = nu["position"].to_numpy(), nu["weight"].to_numpy()
    lo, hi = weighted_quantile(pos, w, 0.01), weighted_quantile(pos, w, 0.99)
    if not lo < hi:
        lo, hi = pos.min() - 0.5, pos.max() + 0.5
    ax.hist(pos, bins=100, range=(lo, hi), weights=w, color=PALETTE["primary"], alpha=0.8)
    ax.set_xlabel("x")
    ax.set_ylabel("mass")
    fig.tight_layout()
    return fig


def contraction_quantiles(
    frame: pd.DataFrame, size: tuple[float, float] = (6, 3.5)
) -> plt.Figure:
    """Median and 90% quantile of the gated gap at each checkpoint."""
    _require(frame, "step", "median", "q90")
    fig, ax = _axes(size, "Gated gap")
    ax.plot(frame["step"], frame["median"], marker="o", color=PALETTE["primary"], label="median")
    ax.plot(frame["step"], frame["q90"], marker="s", color=PALETTE["warning"], label="q90")
    if (frame[["median", "q90"]] > 0).all().all():
        ax.set_yscale("log")
    ax.set_xlabel("step")
    ax.legend(fontsize=8, frameon=False)
    fig.tight_layout()
    return fig


def chart_curve(chart: pd.DataFrame, size: tuple[float, float] = (5, 4)) -> plt.Figure:
    """The coordinate chart ``D`` through its nodes."""
    _require(chart, "x", "D")
    fig, ax = _axes(size, "Chart D")
    ax.plot(chart["x"], chart["D"], color=PALETTE["primary"], linewidth=1.2)
    ax.set_xlabel("x")
    ax.set_ylabel("D(x)")
    fig.tight_layout()
    return fig


def drift_plot(drift: pd.DataFrame, size: tuple[float, float] = (6, 3.5)) -> plt.Figure:
    """Post-chart drift on the grid, with 3 sigma error bars when available."""
    _require(drift, "y", "drift")
    fig, ax = _axes(size, "Drift after the chart")
    yerr = 3 * drift["sigma"] if "sigma" in drift.columns else None
    ax.errorbar(
        drift["y"],
        drift["drift"],
        yerr=yerr,
        fmt="o",
        color=PALETTE["primary"],
        ecolor=PALETTE["muted"],
        capsize=3,
    )
    ax.axhline(0, color=PALETTE["danger"], linestyle="--", linewidth=1)
    ax.set_xlabel("y")
    fig.tight_layout()
    return fig


def checks_summary_bar(
    checks: list[dict[str, Any]],
    size: tuple[float, float] = (7, 3.5),
) -> plt.Figure:
    """Create a horizontal bar chart summarizing check results.

    Args:
        checks: List of dicts with keys 'Check', 'Status', 'Details'.
        size: (width, height) in inches.

    Returns:
        matplotlib Figure.
    """
    if not checks:
        fig, ax = plt.subplots(figsize=size)
        ax.text(
            0.5, 0.5, "No check data", ha="center", va="center", fontsize=12, color=PALETTE["muted"]
        )
        ax.axis("off")
        return fig

    names = [c["Check"] for c in checks]
    statuses = [c["Status"] for c in checks]
    fig, ax = plt.subplots(figsize=(size[0], max(size[1], 0.4 * len(checks))))
    fig.patch.set_facecolor(PALETTE["bg"])
    colors = [STATUS_COLORS.get(s, PALETTE["muted"]) for s in statuses]
    ax.barh(names, [1] * len(names), color=colors, edgecolor=PALETTE["bg"], height=0.6)

    for i, (status, check) in enumerate(zip(statuses, checks)):
        detail = str(check.get("Details", ""))
        if len(detail) > 50:
            detail = detail[:47] + "..."
        ax.text(
            0.5,
            i,
            f"{status}: {detail}",
            ha="center",
            va="center",
            fontsize=8,
            fontweight="bold",
            color="white",
        )

    ax.set_xlim(0, 1)
    ax.set_xticks([])
    ax.set_title("Checks", fontsize=11, fontweight="bold", color=PALETTE["text"], pad=12)
    ax.tick_params(axis="y", labelsize=9)
    for side in ("top", "right", "bottom"):
        ax.spines[side].set_visible(False)
    ax.invert_yaxis()
    fig.tight_layout()
    return fig


# ────────────────────────────────────────────────────────────────────────
#  Convenience: render every figure for a scenario directory
# ────────────────────────────────────────────────────────────────────────

FIGURES: dict[str, Callable[[pd.DataFrame], plt.Figure]] = {
    "visits": visits_histogram,
    "oscillation": oscillation_curve,
    "martingale": martingale_curve,
    "nu": measure_histogram,
    "contraction": contraction_quantiles,
    "chart": chart_curve,
    "drift": drift_plot,
    "checks": lambda frame: checks_summary_bar(frame.to_dict("records")),
}


def render_all(output_dir: Union[str, Path], dpi: int = 150) -> list[Path]:
    """Draw a PNG for every known CSV artifact in ``output_dir``.

    Returns:
        Paths of the PNG files written.
    """
    output_dir = Path(output_dir)
    written = []
    for name, build in FIGURES.items():
        source = output_dir / f"{name}.csv"
        if not source.exists():
            continue
        fig = build(read_csv(source))
        target = output_dir / f"{name}.png"
        fig.savefig(target, dpi=dpi, bbox_inches="tight", facecolor=PALETTE["bg"])
        plt.close(fig)
        written.append(target)
    logger.info("Rendered %d figures in %s", len(written), output_dir)
    return written


def weighted_quantile(values: np.ndarray, weights: np.ndarray, q: float) -> float:
    """Quantile of a weighted sample (for axis limits on heavy-tailed pools)."""
    order = np.argsort(values)
    cum = np.cumsum(weights[order])
    return float(values[order][np.searchsorted(cum, q * cum[-1])])
