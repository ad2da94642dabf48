"""
Zero-drift coordinates built from a stationary measure.

The chart ``D(x) = nu[x0, x]`` (signed) pushes the stationary measure to
Lebesgue measure. Conjugating each generator by ``D`` gives a system with
the Derriennic property: zero drift everywhere, Lipschitz generators and a
uniform displacement bound. This module builds the chart, fits the
conjugated generators, and checks those three properties.

Author: linewalk developers
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Optional, Sequence

import numpy as np
import pandas as pd

from linewalk.errors import ChartError, ConjugationError
from linewalk.homeo import Homeo, Interval, PLHomeo
from linewalk.stationary import EmpiricalRadonMeasure
from linewalk.walkgroup import Generator, GeneratorSystem, drift_at, phi_mu

logger = logging.getLogger("linewalk")

DEFAULT_NODES = 512
WIDTH_FLOOR = 1e-9
DEFAULT_CELLS = 256
MIN_CELL_SAMPLES = 32
TAIL_CELLS = 4
MAX_REFINEMENTS = 2


@dataclass
class DerriennicChart:
    """Monotone PL chart ``D`` with nodes ``(xs[i], ds[i])`` and affine tails.

    Args:
        xs: Strictly increasing node positions.
        ds: Strictly increasing chart values, with ``D(x0) = 0``.
        left_slope: Slope of ``D`` below ``xs[0]``.
        right_slope: Slope of ``D`` above ``xs[-1]``.
        x0: Anchor point.
        resolution: Largest chart increment between neighbouring nodes.
    """

    xs: np.ndarray
    ds: np.ndarray
    left_slope: float
    right_slope: float
    x0: float
    resolution: float
    meta: dict[str, Any] = field(default_factory=dict)

    @property
    def hull(self) -> Interval:
        return Interval(float(self.xs[0]), float(self.xs[-1]))

    @property
    def range(self) -> Interval:
        return Interval(float(self.ds[0]), float(self.ds[-1]))

    def __call__(self, x: Any) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        out = np.interp(x, self.xs, self.ds)
        out = np.where(x < self.xs[0], self.ds[0] + self.left_slope * (x - self.xs[0]), out)
        return np.where(x > self.xs[-1], self.ds[-1] + self.right_slope * (x - self.xs[-1]), out)

    def inverse(self, y: Any) -> np.ndarray:
        y = np.asarray(y, dtype=np.float64)
        out = np.interp(y, self.ds, self.xs)
        out = np.where(y < self.ds[0], self.xs[0] + (y - self.ds[0]) / self.left_slope, out)
        return np.where(y > self.ds[-1], self.xs[-1] + (y - self.ds[-1]) / self.right_slope, out)

    def as_homeo(self) -> PLHomeo:
        """The chart as an exact PL map (float nodes)."""
        return PLHomeo.from_points(
            self.xs.tolist(), self.ds.tolist(), self.left_slope, self.right_slope
        )

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"x": self.xs, "D": self.ds})


def build_chart(
    nu: EmpiricalRadonMeasure,
    x0: Optional[float] = None,
    cells: int = DEFAULT_CELLS,
    min_cell_samples: int = MIN_CELL_SAMPLES,
) -> DerriennicChart:
    """Chart from the signed CDF of ``nu`` anchored at ``x0``.

    The hull of ``nu`` is cut into at most ``cells`` cells of equal mass,
    each holding at least ``min_cell_samples`` pooled positions, and ``D``
    is linear inside each cell. Cuts sit halfway between neighbouring
    positions, where the CDF value is exact; the two end nodes sit halfway
    through the mass of the outermost positions. Positions closer than
    ``1e-9`` of the hull length are merged first. Tails extend with the
    density of the outermost cells.

    Args:
        nu: Stationary measure (normalized as desired).
        x0: Anchor; defaults to ``nu.anchor``.
        cells: Upper bound on the number of cells.
        min_cell_samples: Fewest pooled positions per cell.

    Raises:
        ChartError: If ``nu`` is concentrated on a single point.
        ValueError: If ``x0`` lies outside the sampled hull.
    """
    if nu.size == 0:
        raise ChartError("Cannot build a chart from an empty measure")
    x0 = float(nu.anchor if x0 is None else x0)
    lo, hi = float(nu.positions[0]), float(nu.positions[-1])
    if hi - lo <= 0:
        raise ChartError(f"Measure is a single atom at {lo:g}")
    if not lo <= x0 <= hi:
        raise ValueError(f"Anchor {x0:g} outside the sampled hull [{lo:g}, {hi:g}]")

    floor = WIDTH_FLOOR * (hi - lo)
    starts = np.concatenate([[True], np.diff(nu.positions) > floor])
    group = np.cumsum(starts) - 1
    pos = nu.positions[starts]
    mass = np.bincount(group, weights=nu.weights)
    if len(pos) < 2:
        raise ChartError(f"Measure collapses to one point at {pos[0]:g}")

    cum = np.cumsum(mass)
    total = float(cum[-1])
    m = min(cells, max(len(pos) // min_cell_samples, 1))
    levels = total * np.arange(1, m) / m
    cuts = np.unique(np.minimum(np.searchsorted(cum, levels), len(pos) - 2))
    xs = np.concatenate([[lo], (pos[cuts] + pos[cuts + 1]) / 2, [hi]])
    cdf = np.concatenate([[mass[0] / 2], cum[cuts], [total - mass[-1] / 2]])
    ds = cdf - np.interp(x0, xs, cdf)

    k = min(TAIL_CELLS, len(xs) - 1)
    left = (ds[k] - ds[0]) / (xs[k] - xs[0])
    right = (ds[-1] - ds[-1 - k]) / (xs[-1] - xs[-1 - k])
    resolution = float(np.max(np.diff(ds)))
    logger.debug(
        "Chart: %d cells, resolution %.3g, range [%.4g, %.4g]",
        len(xs) - 1,
        resolution,
        ds[0],
        ds[-1],
    )
    return DerriennicChart(
        xs,
        ds,
        float(left),
        float(right),
        x0,
        resolution,
        meta={"pool_size": nu.size, "total_mass": nu.total_mass, "cells": len(xs) - 1},
    )


# ── Conjugation ─────────────────────────────────────────────────────────


def _tail_slopes(g: Homeo) -> tuple[Fraction, Fraction]:
    # D has affine tails, so D o g o D^-1 ends with the tail slopes of g; lifts average to 1
    if isinstance(g, PLHomeo):
        return Fraction(g.left_slope), Fraction(g.right_slope)
    return Fraction(1), Fraction(1)


def _fit(chart: DerriennicChart, g: Homeo, ys: np.ndarray) -> Optional[PLHomeo]:
    vals = chart(g.evaluator()(chart.inverse(ys)))
    if not np.all(np.diff(vals) > 0):
        return None
    xs = [Fraction(float(y)) for y in ys]
    fs = [Fraction(float(v)) for v in vals]
    return PLHomeo.from_points(xs, fs, *_tail_slopes(g))


def _sup_gap(chart: DerriennicChart, g: Homeo, fit: Homeo, ys: np.ndarray) -> float:
    direct = chart(g.evaluator()(chart.inverse(ys)))
    return float(np.max(np.abs(fit.evaluator()(ys) - direct)))


def conjugate(
    system: GeneratorSystem,
    chart: DerriennicChart,
    nodes: int = DEFAULT_NODES,
    gap_tolerance: Optional[float] = None,
    gap_points: int = 101,
) -> GeneratorSystem:
    """``D o g o D^-1`` for every generator, fitted on a grid over the chart range.

    The first generator of each inverse pair is fitted; its partner is the
    exact inverse of that fit, so the result passes :func:`validate`. Fits
    use rational nodes to keep that inversion exact. Every fit, and the
    inverse standing in for its partner, must stay within ``gap_tolerance``
    (default: the chart resolution) of ``D o g o D^-1`` on ``gap_points``
    points of the range; the grid is refined until it does.

    Raises:
        ConjugationError: If a fit is still non-monotone, or still too far
            from the conjugate, after refining the grid.
    """
    tolerance = chart.resolution if gap_tolerance is None else gap_tolerance
    check_ys = np.linspace(chart.range.lo, chart.range.hi, gap_points)
    gens = system.generators
    fitted: dict[int, Homeo] = {}
    for i, gen in enumerate(gens):
        j = system.pairs[i]
        if j < i:
            continue
        n = nodes
        for _ in range(MAX_REFINEMENTS + 1):
            ys = np.linspace(chart.range.lo, chart.range.hi, n)
            fit = _fit(chart, gen.homeo, ys)
            if fit is None:
                reason = "chart too coarse for this generator"
                logger.info("Conjugate of '%s' not monotone on %d nodes; refining", gen.name, n)
            else:
                gap = _sup_gap(chart, gen.homeo, fit, check_ys)
                if j != i:
                    gap = max(gap, _sup_gap(chart, gens[j].homeo, fit.inverse(), check_ys))
                if gap <= tolerance:
                    break
                reason = f"pairing gap {gap:.3g} exceeds {tolerance:.3g}"
                logger.info("Conjugate of '%s' on %d nodes: %s; refining", gen.name, n, reason)
            n *= 2
        else:
            raise ConjugationError(gen.name, n // 2, reason)
        fitted[i] = fit
        if j != i:
            fitted[j] = fit.inverse()

    logger.info("Conjugated %d generators on %d nodes or more", system.size, nodes)
    return GeneratorSystem(
        tuple(Generator(g.name, fitted[i], g.weight) for i, g in enumerate(gens)),
        system.pairs,
    )


def pairing_gaps(
    system: GeneratorSystem,
    chart: DerriennicChart,
    conjugated: GeneratorSystem,
    points: int = 101,
) -> dict[str, float]:
    """Sup-gap between each conjugated generator and the chart applied to the original."""
    ys = np.linspace(chart.range.lo, chart.range.hi, points)
    return {
        g.name: _sup_gap(chart, g.homeo, gbar.homeo, ys)
        for g, gbar in zip(system.generators, conjugated.generators)
    }


# ── Checks on the conjugated system ─────────────────────────────────────


@dataclass
class DriftProfile:
    grid: np.ndarray
    drift: np.ndarray

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.drift))) if len(self.drift) else 0.0

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"y": self.grid, "drift": self.drift})


def drift_profile(conjugated: GeneratorSystem, grid: Sequence[float]) -> DriftProfile:
    """``drift_at`` over ``grid``."""
    grid = np.asarray(grid, dtype=np.float64)
    return DriftProfile(grid, np.array([float(drift_at(conjugated, y)) for y in grid.tolist()]))


def inner_grid(
    chart: DerriennicChart, points: int = 11, K: Optional[Interval] = None
) -> np.ndarray:
    """Evenly spaced chart coordinates inside ``D(K)`` (or the central half of the range)."""
    if K is not None:
        lo, hi = (float(v) for v in chart([float(K.lo), float(K.hi)]))
    else:
        r = chart.range
        pad = float(r.length) / 4
        lo, hi = float(r.lo) + pad, float(r.hi) - pad
    return np.linspace(lo, hi, points)


def drift_noise(
    system: GeneratorSystem,
    nu: EmpiricalRadonMeasure,
    chart: DerriennicChart,
    grid: Sequence[float],
    nodes: int = DEFAULT_NODES,
) -> np.ndarray:
    """Batch-means standard error of the drift at each grid point.

    Each replica of ``nu`` gets its own chart and conjugation; the drift is
    read at the chart coordinate of the same base point. The spread across
    replicas divided by ``sqrt(R)`` is returned.

    Raises:
        ValueError: If ``nu`` carries fewer than two replicas.
    """
    R = nu.n_replicas
    if R < 2:
        raise ValueError(f"Need at least two replicas for drift noise, got {R}")
    base = chart.inverse(np.asarray(grid, dtype=np.float64))
    rows = []
    for r in range(R):
        part = nu.replica(r)
        if nu.reference is not None:
            part = part.normalized(nu.reference)
        sub = build_chart(part, min(max(chart.x0, part.positions[0]), part.positions[-1]))
        rows.append(drift_profile(conjugate(system, sub, nodes), sub(base)).drift)
    return np.std(np.vstack(rows), axis=0, ddof=1) / math.sqrt(R)


def _slope_within(h: Homeo, domain: Optional[Interval]) -> float:
    # pieces of y in domain with h(y) in domain; outside, both sides of D are extrapolated
    if domain is None or not isinstance(h, PLHomeo):
        return float(h.max_slope())
    lo, hi = float(domain.lo), float(domain.hi)
    inv = h.inverse().evaluator()
    a, b = max(lo, float(inv(lo))), min(hi, float(inv(hi)))
    if not a < b:
        return float(h.max_slope())
    return float(h.max_slope_on(a, b))


def lipschitz_check(
    conjugated: GeneratorSystem,
    tolerance: float = 0.1,
    domain: Optional[Interval] = None,
) -> pd.DataFrame:
    """Max piece slope of each generator against ``(1 + tolerance) / weight``.

    With ``domain`` (normally the chart range) only the pieces mapping
    ``domain`` into itself are read.
    """
    rows = []
    for g in conjugated.generators:
        slope = _slope_within(g.homeo, domain)
        bound = (1 + tolerance) / float(g.weight)
        rows.append(
            {
                "generator": g.name,
                "weight": float(g.weight),
                "max_slope": slope,
                "bound": bound,
                "passed": slope <= bound,
            }
        )
    return pd.DataFrame(rows)


def displacement_check(
    conjugated: GeneratorSystem,
    grid: Sequence[float],
    tolerance: float = 0.1,
) -> pd.DataFrame:
    """Sup of ``|g(y) - y|`` over ``grid`` against ``sqrt(2 Phi) / weight``.

    ``Phi`` is the largest value of :func:`phi_mu` over the grid.
    """
    grid = np.asarray(grid, dtype=np.float64)
    phi_max = max(float(phi_mu(conjugated, y)) for y in grid.tolist())
    rows = []
    for g in conjugated.generators:
        disp = float(np.max(np.abs(g.homeo.evaluator()(grid) - grid)))
        bound = math.sqrt(2 * max(phi_max, 0.0)) / float(g.weight) * (1 + tolerance)
        rows.append(
            {
                "generator": g.name,
                "displacement": disp,
                "phi_max": phi_max,
                "bound": bound,
                "passed": disp <= bound,
            }
        )
    return pd.DataFrame(rows)


def augment_to_minimal(system: GeneratorSystem, share: Any = Fraction(1, 2)) -> GeneratorSystem:
    """Add translations by ``+-1`` and ``+-sqrt(2)`` carrying ``share`` of the weight.

    The original weights are scaled by ``1 - share``. The added translations
    generate a dense subgroup, so the augmented action is minimal.
    """
    share = Fraction(share) if not isinstance(share, float) else share
    if not 0 < share < 1:
        raise ValueError(f"share must be in (0, 1), got {share}")
    taken = set(system.names)

    def fresh(name: str) -> str:
        while name in taken:
            name += "'"
        taken.add(name)
        return name

    root2 = math.sqrt(2)
    extra = [
        (fresh("t+1"), PLHomeo.translation(1)),
        (fresh("t-1"), PLHomeo.translation(-1)),
        (fresh("t+r2"), PLHomeo.translation(root2)),
        (fresh("t-r2"), PLHomeo.translation(-root2)),
    ]
    keep = 1 - share
    gens = [Generator(g.name, g.homeo, g.weight * keep) for g in system.generators]
    gens += [Generator(name, h, share / 4) for name, h in extra]
    n = system.size
    pairs = tuple(system.pairs) + (n + 1, n, n + 3, n + 2)
    return GeneratorSystem(tuple(gens), pairs)
