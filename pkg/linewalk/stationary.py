"""
Stationary Radon measures of the walk.

Builds the stationary measure from bump-stopped runs: the stop-point
distribution ``nu0`` by time averaging the stopped kernel, then
``nu = integral of occupation measures d nu0``, normalized to ``nu(K) = 1``.
Also provides the ratio estimator along single trajectories and the
diagnostics run on a finished measure (stationarity residual, atoms,
window growth, cross-start agreement, support).

Author: linewalk developers
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Sequence

import numpy as np
import pandas as pd
from scipy import stats

from linewalk.chain import (
    DEFAULT_BLOCK,
    DEFAULT_CAP,
    DEFAULT_ESCAPE_RADIUS,
    BumpProfile,
    CompiledSystem,
    iterate_ensemble,
    simulate,
    stopped_walks,
)
from linewalk.errors import NumericalError
from linewalk.homeo import Interval
from linewalk.rng import RandomStream
from linewalk.utils import map_batches
from linewalk.walkgroup import GeneratorSystem

logger = logging.getLogger("linewalk")

DEFAULT_WINDOW_WIDEN = 4.5
SPREAD_GAP_FRACTION = 0.05


# ── Measures ────────────────────────────────────────────────────────────


@dataclass
class EmpiricalRadonMeasure:
    """Weighted sample pool representing a Radon measure on the line.

    Interval masses are prefix sums over the sorted pool. ``replicas`` labels
    each sample with the independent batch it came from, so batch-means
    errors can be computed for any functional of the measure.

    Args:
        positions: Sample positions (sorted on construction).
        weights: Positive weights, one per sample.
        anchor: Reference point ``x0`` of the signed CDF.
        reference: Interval ``K`` used for normalization and atom thresholds.
        replicas: Optional batch label per sample.
        meta: Free-form provenance (run counts, window, ...).
    """

    positions: np.ndarray
    weights: np.ndarray
    anchor: float = 0.0
    reference: Optional[Interval] = None
    replicas: Optional[np.ndarray] = None
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        pos = np.asarray(self.positions, dtype=np.float64)
        w = np.asarray(self.weights, dtype=np.float64)
        if pos.shape != w.shape:
            raise ValueError(f"{len(pos)} positions but {len(w)} weights")
        if np.any(w <= 0):
            raise ValueError("Weights must be strictly positive")
        order = np.argsort(pos, kind="stable")
        self.positions = pos[order]
        self.weights = w[order]
        if self.replicas is not None:
            self.replicas = np.asarray(self.replicas, dtype=np.int64)[order]
        self._prefix = np.concatenate([[0.0], np.cumsum(self.weights)])

    @classmethod
    def from_samples(
        cls,
        positions: Sequence[float],
        weights: Optional[Sequence[float]] = None,
        anchor: float = 0.0,
        reference: Optional[Interval] = None,
    ) -> "EmpiricalRadonMeasure":
        """Pool samples, merging repeated positions into single weighted atoms."""
        pos = np.asarray(positions, dtype=np.float64)
        w = np.ones_like(pos) if weights is None else np.asarray(weights, dtype=np.float64)
        uniq, inverse = np.unique(pos, return_inverse=True)
        merged = np.zeros(len(uniq))
        np.add.at(merged, inverse, w)
        return cls(uniq, merged, anchor=anchor, reference=reference)

    @property
    def size(self) -> int:
        return len(self.positions)

    @property
    def total_mass(self) -> float:
        return float(self._prefix[-1])

    @property
    def n_replicas(self) -> int:
        if self.replicas is None or not self.size:
            return 0
        return int(self.replicas.max()) + 1

    @property
    def hull(self) -> Interval:
        if not self.size:
            raise ValueError("Empty measure has no hull")
        return Interval(float(self.positions[0]), float(self.positions[-1]))

    def mass(self, a: float, b: float) -> float:
        """Mass of the closed interval ``[a, b]`` (0 if ``a > b``)."""
        if a > b:
            return 0.0
        i = np.searchsorted(self.positions, a, side="left")
        j = np.searchsorted(self.positions, b, side="right")
        return float(self._prefix[j] - self._prefix[i])

    def mass_between(self, lo: Any, hi: Any) -> np.ndarray:
        """Mass of the half-open interval ``(lo, hi]``, vectorized."""
        i = np.searchsorted(self.positions, lo, side="right")
        j = np.searchsorted(self.positions, hi, side="right")
        return np.maximum(self._prefix[j] - self._prefix[i], 0.0)

    def cdf(self, x: Any) -> np.ndarray:
        """Signed CDF: ``nu[x0, x]`` for ``x >= x0`` and ``-nu[x, x0]`` below."""
        x = np.asarray(x, dtype=np.float64)
        x0 = self.anchor
        lo_x0 = np.searchsorted(self.positions, x0, side="left")
        hi_x0 = np.searchsorted(self.positions, x0, side="right")
        right = self._prefix[np.searchsorted(self.positions, x, side="right")] - self._prefix[lo_x0]
        left = self._prefix[hi_x0] - self._prefix[np.searchsorted(self.positions, x, side="left")]
        return np.where(x >= x0, right, -left)

    def integrate(
        self,
        f: Callable[[np.ndarray], np.ndarray],
        lo: Optional[float] = None,
        hi: Optional[float] = None,
    ) -> float:
        """``sum_i w_i f(x_i)``, over samples in ``[lo, hi]`` when bounds are given.

        Bounds only skip work: ``f`` must vanish outside them.
        """
        i = 0 if lo is None else int(np.searchsorted(self.positions, lo, side="left"))
        j = self.size if hi is None else int(np.searchsorted(self.positions, hi, side="right"))
        if j <= i:
            return 0.0
        return float(np.dot(self.weights[i:j], f(self.positions[i:j])))

    def scaled(self, factor: float) -> "EmpiricalRadonMeasure":
        return EmpiricalRadonMeasure(
            self.positions,
            self.weights * factor,
            self.anchor,
            self.reference,
            self.replicas,
            dict(self.meta),
        )

    def normalized(self, K: Optional[Interval] = None) -> "EmpiricalRadonMeasure":
        """Rescale so that ``nu(K) = 1``.

        Raises:
            NumericalError: If ``K`` carries no mass.
        """
        K = K or self.reference
        if K is None:
            raise ValueError("No normalization interval given")
        mass = self.mass(float(K.lo), float(K.hi))
        if mass <= 0:
            raise NumericalError(f"No mass in normalization interval {K.as_tuple()}")
        out = self.scaled(1.0 / mass)
        out.reference = K
        return out

    def replica(self, index: int) -> "EmpiricalRadonMeasure":
        """The sub-pool from one batch, with weights unchanged."""
        if self.replicas is None:
            raise ValueError("Measure carries no replica labels")
        keep = self.replicas == index
        return EmpiricalRadonMeasure(
            self.positions[keep], self.weights[keep], self.anchor, self.reference
        )

    def restricted(self, lo: float, hi: float) -> "EmpiricalRadonMeasure":
        keep = (self.positions >= lo) & (self.positions <= hi)
        return EmpiricalRadonMeasure(
            self.positions[keep],
            self.weights[keep],
            self.anchor,
            self.reference,
            None if self.replicas is None else self.replicas[keep],
            dict(self.meta),
        )

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame({"position": self.positions, "weight": self.weights})
        if self.replicas is not None:
            frame["replica"] = self.replicas
        return frame


class LebesgueMeasure:
    """Lebesgue measure with the same query interface as the empirical pool."""

    def __init__(self, anchor: float = 0.0) -> None:
        self.anchor = anchor

    def mass(self, a: float, b: float) -> float:
        return max(float(b) - float(a), 0.0)

    def mass_between(self, lo: Any, hi: Any) -> np.ndarray:
        return np.maximum(np.asarray(hi, dtype=np.float64) - np.asarray(lo, dtype=np.float64), 0.0)

    def cdf(self, x: Any) -> np.ndarray:
        return np.asarray(x, dtype=np.float64) - self.anchor

    def integrate(self, f: "TestFunction") -> float:
        return f.lebesgue_integral()


# ── Test functions ──────────────────────────────────────────────────────


@dataclass(frozen=True)
class TestFunction:
    """Compactly supported continuous PL function (zero at both end nodes)."""

    __test__ = False

    breakpoints: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        bps = tuple(float(b) for b in self.breakpoints)
        vals = tuple(float(v) for v in self.values)
        if len(bps) != len(vals) or len(bps) < 2:
            raise ValueError("Need at least two breakpoints with one value each")
        if any(a >= b for a, b in zip(bps, bps[1:])):
            raise ValueError(f"Breakpoints must be strictly ascending: {bps}")
        if vals[0] != 0 or vals[-1] != 0:
            raise ValueError("Test functions must vanish at their end nodes")
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "_xp", np.array(bps))
        object.__setattr__(self, "_fp", np.array(vals))

    @classmethod
    def bump(cls, a: float, b: float, ramp: float, height: float = 1.0) -> "TestFunction":
        """``height`` on ``[a, b]``, linear ramps of width ``ramp`` to zero."""
        if ramp <= 0:
            raise ValueError(f"Ramp must be positive, got {ramp}")
        return cls((a - ramp, a, b, b + ramp), (0.0, height, height, 0.0))

    def __call__(self, x: Any) -> np.ndarray:
        return np.interp(x, self._xp, self._fp, left=0.0, right=0.0)

    @property
    def support(self) -> Interval:
        return Interval(self.breakpoints[0], self.breakpoints[-1])

    @property
    def is_nonnegative(self) -> bool:
        return min(self.values) >= 0

    def is_one_on(self, interval: Interval) -> bool:
        """True when the function equals 1 on all of ``interval``."""
        lo, hi = float(interval.lo), float(interval.hi)
        inner = [x for x in self.breakpoints if lo < x < hi]
        return bool(np.all(self(np.array([lo, hi, *inner])) == 1.0))

    def scale(self, factor: float) -> "TestFunction":
        return TestFunction(self.breakpoints, tuple(v * factor for v in self.values))

    def absolute(self) -> Callable[[np.ndarray], np.ndarray]:
        return lambda x: np.abs(self(x))

    def lebesgue_integral(self) -> float:
        xs, ys = self._xp, self._fp
        return float(np.sum((xs[1:] - xs[:-1]) * (ys[1:] + ys[:-1]) / 2.0))


# ── Construction ────────────────────────────────────────────────────────


def default_window(xi: BumpProfile, widen: float = DEFAULT_WINDOW_WIDEN) -> Interval:
    """Occupation recording window: the bump support widened on both sides."""
    return xi.outer.widen(widen)


def reach_window(
    system: GeneratorSystem,
    K: Interval,
    n: int,
    stream: RandomStream,
    trials: int = 4096,
    quantile: float = 0.999,
    base: Optional[Interval] = None,
    escape_radius: float = DEFAULT_ESCAPE_RADIUS,
    workers: int = 1,
    batch_trials: int = 1024,
) -> Interval:
    """Interval holding ``n``-step paths from the ends of ``K`` with probability ``quantile``.

    Coupled paths from ``K.lo`` and ``K.hi`` are run for ``n`` steps; the
    window spans the ``1 - quantile`` quantile of their running minima and
    the ``quantile`` quantile of their running maxima, joined with ``base``
    and clipped to the escape radius. Recording ``nu`` over this window keeps
    ``d(x, y) = nu(x, y]`` faithful along every path a martingale check of
    horizon ``n`` is likely to follow.
    """
    if not 0 < quantile < 1:
        raise ValueError(f"quantile must lie in (0, 1), got {quantile}")
    compiled = CompiledSystem(system)
    ends = [float(K.lo), float(K.hi)]

    def run(bounds: tuple[int, int]) -> np.ndarray:
        streams = [stream.child(t) for t in range(*bounds)]
        low = np.full(len(streams), ends[0])
        high = np.full(len(streams), ends[1])
        for _, pos, _ in iterate_ensemble(compiled, ends, n, streams):
            np.minimum(low, pos.min(axis=1), out=low)
            np.maximum(high, pos.max(axis=1), out=high)
        return np.column_stack([low, high])

    extremes = np.concatenate(map_batches(run, trials, batch_trials, workers))
    lo = float(np.quantile(extremes[:, 0], 1 - quantile))
    hi = float(np.quantile(extremes[:, 1], quantile))
    if base is not None:
        lo, hi = min(lo, float(base.lo)), max(hi, float(base.hi))
    lo, hi = max(lo, -escape_radius), min(hi, escape_radius)
    logger.info("Reach of %d steps from K at quantile %g: [%g, %g]", n, quantile, lo, hi)
    return Interval(lo, hi)


def default_test_functions(K: Interval, count: int = 5) -> list[TestFunction]:
    """``count`` narrow bumps spread evenly over ``K`` widened by half its length."""
    L = float(K.length)
    lo, hi = float(K.lo) - L / 2, float(K.hi) + L / 2
    centres = np.linspace(lo, hi, count) if count > 1 else np.array([(lo + hi) / 2])
    return [TestFunction.bump(c - L / 8, c + L / 8, L / 8) for c in centres.tolist()]


def krylov_bogolyubov(
    system: GeneratorSystem,
    xi: BumpProfile,
    m: int,
    lanes: int,
    stream: RandomStream,
    start: Optional[float] = None,
    cap: int = DEFAULT_CAP,
    on_cap: str = "censor",
    escape_radius: float = DEFAULT_ESCAPE_RADIUS,
    workers: int = 1,
) -> EmpiricalRadonMeasure:
    """Time-averaged stop-point distribution of the stopped kernel.

    Each of ``lanes`` independent lanes iterates the stopped kernel ``m``
    times from ``start`` (default: the midpoint of ``K``); the pool of all
    stop points, equally weighted, estimates ``nu0``.

    Returns:
        Probability measure supported in the bump support.
    """
    if m < 1 or lanes < 1:
        raise ValueError(f"Need m >= 1 and lanes >= 1, got m={m}, lanes={lanes}")
    x0 = float(xi.inner.midpoint) if start is None else float(start)
    logger.info("Time-averaging stopped kernel: %d lanes x %d iterations from %g", lanes, m, x0)
    batch = stopped_walks(
        system,
        np.full(lanes, x0),
        xi,
        stream,
        runs_per_lane=m,
        cap=cap,
        on_cap=on_cap,
        escape_radius=escape_radius,
        workers=workers,
    )
    keep = ~batch.censored
    points = batch.Y[keep]
    if not len(points):
        raise NumericalError("Every stopped run was censored; raise the cap")
    nu0 = EmpiricalRadonMeasure(
        points,
        np.full(len(points), 1.0 / len(points)),
        anchor=x0,
        reference=xi.inner,
        replicas=batch.lane[keep],
        meta={"lanes": lanes, "iterations": m, "censored": batch.n_censored},
    )
    return nu0


def stratified_starts(nu0: EmpiricalRadonMeasure, n: int) -> np.ndarray:
    """``n`` quantiles of ``nu0`` at levels ``(i + 1/2) / n``."""
    if not nu0.size:
        raise ValueError("Cannot draw starts from an empty measure")
    levels = (np.arange(n) + 0.5) / n * nu0.total_mass
    idx = np.searchsorted(np.cumsum(nu0.weights), levels, side="left")
    return nu0.positions[np.minimum(idx, nu0.size - 1)]


def spread_starts(
    nu0: EmpiricalRadonMeasure, n: int, stream: RandomStream, gap: float
) -> np.ndarray:
    """``n`` randomized stratified draws from ``nu0`` with dense stretches smoothed.

    Level ``i`` is drawn uniformly in ``[i / n, (i + 1) / n)`` of the total
    mass. Each distinct position of ``nu0`` owns the half-gaps to neighbours
    closer than ``gap`` and its mass is spread evenly over them, so starts
    inside a densely sampled stretch are continuous while isolated atoms
    (a discrete orbit) are returned exactly.
    """
    if not nu0.size:
        raise ValueError("Cannot draw starts from an empty measure")
    pts, inverse = np.unique(nu0.positions, return_inverse=True)
    mass = np.bincount(inverse, weights=nu0.weights)
    steps = np.diff(pts)
    mids = (pts[:-1] + pts[1:]) / 2
    close = steps <= gap
    left = np.concatenate([[pts[0]], np.where(close, mids, pts[1:])])
    right = np.concatenate([np.where(close, mids, pts[:-1]), [pts[-1]]])

    cum = np.cumsum(mass)
    levels = (np.arange(n) + stream.random(n)) / n * cum[-1]
    idx = np.minimum(np.searchsorted(cum, levels, side="right"), len(pts) - 1)
    below = np.where(idx > 0, cum[idx - 1], 0.0)
    frac = np.clip((levels - below) / mass[idx], 0.0, 1.0)
    return left[idx] + frac * (right[idx] - left[idx])


def build_stationary(
    system: GeneratorSystem,
    nu0: EmpiricalRadonMeasure,
    xi: BumpProfile,
    samples_per_start: int,
    stream: RandomStream,
    n_starts: int = 256,
    n_batches: int = 10,
    window: Optional[Interval] = None,
    cap: int = DEFAULT_CAP,
    on_cap: str = "censor",
    escape_radius: float = DEFAULT_ESCAPE_RADIUS,
    workers: int = 1,
    spread_gap: Optional[float] = None,
) -> EmpiricalRadonMeasure:
    """Pool occupation measures of stopped runs started from ``nu0``.

    ``n_starts * samples_per_start`` runs start from randomized stratified
    draws of ``nu0`` (see :func:`spread_starts`; ``spread_gap`` defaults to
    5% of the bump support). Every visit inside ``window`` contributes
    ``1 / (number of runs)``; the pool is then normalized to ``nu(K) = 1``.
    Run ``r`` is assigned to replica ``r mod n_batches``.

    Returns:
        The stationary measure estimate restricted to ``window``.
    """
    window = window or default_window(xi)
    if spread_gap is None:
        spread_gap = SPREAD_GAP_FRACTION * float(xi.outer.length)
    starts = spread_starts(nu0, n_starts * samples_per_start, stream.child(1), spread_gap)
    logger.info("Pooling %d stopped runs over window [%g, %g]", len(starts), *window.as_tuple())
    batch = stopped_walks(
        system,
        starts,
        xi,
        stream.child(0),
        cap=cap,
        on_cap=on_cap,
        escape_radius=escape_radius,
        window=window,
        workers=workers,
    )
    pos = batch.occupation_positions
    if not len(pos):
        raise NumericalError("Stopped runs never visited the recording window")
    nu = EmpiricalRadonMeasure(
        pos,
        np.full(len(pos), 1.0 / len(starts)),
        anchor=float(xi.inner.lo),
        reference=xi.inner,
        replicas=batch.occupation_lanes % n_batches,
        meta={
            "runs": len(starts),
            "censored": batch.n_censored,
            "window": window.as_tuple(),
            "mean_T": float(batch.T.mean()),
        },
    )
    return nu.normalized(xi.inner)


# ── Ratio ergodic estimator ─────────────────────────────────────────────


@dataclass
class RatioEstimate:
    """``S_N psi / S_N phi`` along one trajectory."""

    value: float
    s_psi: float
    s_phi: float
    steps: int

    @property
    def recurrent(self) -> bool:
        """False when the trajectory never charged ``phi`` (increase ``N``)."""
        return self.s_phi > 0


def _check_ratio_inputs(phi: "TestFunction", K: Optional[Interval]) -> None:
    if not phi.is_nonnegative:
        raise ValueError("The denominator test function must be non-negative")
    if K is not None and not phi.is_one_on(K):
        raise ValueError(f"The denominator test function must equal 1 on K = {K}")


def ratio_ergodic(
    system: GeneratorSystem,
    x: float,
    psi: TestFunction,
    phi: TestFunction,
    N: int,
    stream: RandomStream,
    K: Optional[Interval] = None,
) -> RatioEstimate:
    """Ratio of Birkhoff sums ``sum_{k=1..N} psi(X_k) / sum phi(X_k)``.

    Converges to ``integral psi d nu / integral phi d nu`` for the unique
    stationary measure. Returns NaN with ``recurrent == False`` when the
    denominator sum is still zero.

    Args:
        K: Recurrence interval. When given, ``phi`` must equal 1 on it.

    Raises:
        ValueError: If ``phi`` is negative somewhere, or not 1 on ``K``.
    """
    _check_ratio_inputs(phi, K)
    traj = simulate(system, x, N, stream)
    visited = traj.positions[1:]
    s_psi = float(psi(visited).sum())
    s_phi = float(phi(visited).sum())
    value = s_psi / s_phi if s_phi > 0 else float("nan")
    if s_phi <= 0:
        logger.warning("Trajectory from x=%g did not charge the denominator in %d steps", x, N)
    return RatioEstimate(value, s_psi, s_phi, N)


def ratio_ergodic_ensemble(
    system: GeneratorSystem,
    starts: Sequence[float],
    psi: TestFunction,
    phi: TestFunction,
    N: int,
    trials: int,
    stream: RandomStream,
    workers: int = 1,
    batch_trials: int = 512,
    K: Optional[Interval] = None,
) -> np.ndarray:
    """Ratio estimates for coupled starts, shape ``(trials, len(starts))``.

    Copies within a trial share letters. ``K`` is checked as in :func:`ratio_ergodic`.
    """
    _check_ratio_inputs(phi, K)
    compiled = CompiledSystem(system)
    copies = len(starts)

    def run(bounds: tuple[int, int]) -> np.ndarray:
        streams = [stream.child(t) for t in range(*bounds)]
        s_psi = np.zeros((len(streams), copies))
        s_phi = np.zeros((len(streams), copies))
        buf = np.empty((DEFAULT_BLOCK, len(streams), copies))
        j = 0
        for k, pos, _ in iterate_ensemble(compiled, starts, N, streams):
            if k == 0:
                continue
            buf[j] = pos
            j += 1
            if j == DEFAULT_BLOCK or k == N:
                s_psi += psi(buf[:j]).sum(axis=0)
                s_phi += phi(buf[:j]).sum(axis=0)
                j = 0
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(s_phi > 0, s_psi / s_phi, np.nan)

    return np.concatenate(map_batches(run, trials, batch_trials, workers))


# ── Diagnostics ─────────────────────────────────────────────────────────


def _preimage(g: Any, lo: float, hi: float) -> tuple[float, float]:
    a, b = g.inverse().evaluator()(np.array([lo, hi]))
    pad = 1e-9 * max(1.0, abs(a), abs(b))
    return float(a) - pad, float(b) + pad


def _push_integral(system: GeneratorSystem, nu: EmpiricalRadonMeasure, f: TestFunction) -> float:
    compiled = CompiledSystem(system)
    lo, hi = (float(v) for v in f.support.as_tuple())
    total = 0.0
    for gen, ev in zip(system.generators, compiled.evaluators):
        a, b = _preimage(gen.homeo, lo, hi)
        total += float(gen.weight) * nu.integrate(lambda x, ev=ev: f(ev(x)), a, b)
    return total


def _check_support_window(
    system: GeneratorSystem, nu: EmpiricalRadonMeasure, f: TestFunction
) -> None:
    window = nu.meta.get("window")
    if window is None:
        return
    lo, hi = (float(v) for v in f.support.as_tuple())
    for g in system.maps:
        a, b = _preimage(g, lo, hi)
        if a < window[0] or b > window[1]:
            logger.warning(
                "Test function support [%g, %g] pulls back outside the recorded window %s",
                lo,
                hi,
                window,
            )
            return


def _signed_residual(
    system: GeneratorSystem, nu: EmpiricalRadonMeasure, f: TestFunction
) -> float:
    lo, hi = (float(v) for v in f.support.as_tuple())
    denom = nu.integrate(f.absolute(), lo, hi)
    if denom <= 0:
        return float("nan")
    return (_push_integral(system, nu, f) - nu.integrate(f, lo, hi)) / denom


def stationarity_residual(
    system: GeneratorSystem,
    nu: EmpiricalRadonMeasure,
    functions: Sequence[TestFunction],
) -> float:
    """``max_phi |integral P phi d nu - integral phi d nu| / integral |phi| d nu``.

    ``P phi = sum_g w(g) phi o g`` is evaluated exactly over the generators.
    """
    if not functions:
        raise ValueError("Need at least one test function")
    for f in functions:
        _check_support_window(system, nu, f)
    return float(max(abs(_signed_residual(system, nu, f)) for f in functions))


def stationarity_noise_floor(
    system: GeneratorSystem,
    nu: EmpiricalRadonMeasure,
    functions: Sequence[TestFunction],
) -> np.ndarray:
    """Batch-means standard error of each test function's signed residual.

    The residual is recomputed on every replica of ``nu``; the floor is the
    spread across replicas over ``sqrt(R)``. NaN when fewer than two
    replicas carry mass under the function.
    """
    floors = np.full(len(functions), np.nan)
    R = nu.n_replicas
    if R < 2:
        return floors
    parts = [nu.replica(r) for r in range(R)]
    for i, f in enumerate(functions):
        per_batch = np.array([_signed_residual(system, part, f) for part in parts])
        per_batch = per_batch[np.isfinite(per_batch)]
        if len(per_batch) >= 2:
            floors[i] = per_batch.std(ddof=1) / np.sqrt(len(per_batch))
    return floors


def stationarity_report(
    system: GeneratorSystem,
    nu: EmpiricalRadonMeasure,
    functions: Sequence[TestFunction],
) -> pd.DataFrame:
    """Per-function residual next to its noise floor.

    Returns:
        DataFrame with columns function, support_lo, support_hi, residual,
        noise_floor, z.
    """
    floors = stationarity_noise_floor(system, nu, functions)
    rows = []
    for i, f in enumerate(functions):
        _check_support_window(system, nu, f)
        residual = abs(_signed_residual(system, nu, f))
        floor = float(floors[i])
        rows.append(
            {
                "function": i,
                "support_lo": f.support.lo,
                "support_hi": f.support.hi,
                "residual": residual,
                "noise_floor": floor,
                "z": residual / floor if floor > 0 else float("nan"),
            }
        )
    return pd.DataFrame(rows)


@dataclass(frozen=True)
class Atom:
    position: float
    mass: float


def atom_scan(
    nu: EmpiricalRadonMeasure,
    resolution: float,
    tolerance: float = 1e-9,
) -> list[Atom]:
    """Point masses heavier than ``resolution * nu(K)``.

    Samples closer than ``tolerance * max(1, |x|)`` are pooled into one
    candidate, absorbing float drift along long orbits.
    """
    if not nu.size:
        return []
    ref = nu.reference
    scale = nu.mass(float(ref.lo), float(ref.hi)) if ref is not None else nu.total_mass
    if scale <= 0:
        logger.warning("Atom scan skipped: reference interval %s carries no mass", ref)
        return []
    pos, w = nu.positions, nu.weights
    gaps = np.diff(pos)
    breaks = gaps > tolerance * np.maximum(1.0, np.abs(pos[1:]))
    labels = np.concatenate([[0], np.cumsum(breaks)])
    masses = np.bincount(labels, weights=w)
    centers = np.bincount(labels, weights=w * pos) / masses
    keep = masses > resolution * scale
    return [Atom(float(c), float(m)) for c, m in zip(centers[keep], masses[keep])]


def bi_infiniteness_scan(
    system: GeneratorSystem,
    xi: BumpProfile,
    radii: Sequence[float],
    stream: RandomStream,
    nu0: Optional[EmpiricalRadonMeasure] = None,
    runs: int = 2048,
    kb_iterations: int = 20,
    kb_lanes: int = 128,
    cap: int = DEFAULT_CAP,
    escape_radius: float = DEFAULT_ESCAPE_RADIUS,
    workers: int = 1,
) -> pd.DataFrame:
    """Un-normalized masses of ``[-M, M]`` for increasing radii ``M``.

    Returns:
        DataFrame with columns radius, mass, left, right, ratio. ``left`` is the
        mass of ``[-M, 0)``, ``right`` that of ``[0, M]`` and ``ratio`` compares
        ``mass`` with the previous radius.
    """
    radii = [float(r) for r in radii]
    if any(a >= b for a, b in zip(radii, radii[1:])) or radii[0] <= 0:
        raise ValueError(f"Radii must be positive and increasing: {radii}")
    if nu0 is None:
        nu0 = krylov_bogolyubov(
            system,
            xi,
            kb_iterations,
            kb_lanes,
            stream.child(0),
            cap=cap,
            escape_radius=escape_radius,
            workers=workers,
        )
    window = Interval(-radii[-1], radii[-1])
    starts = stratified_starts(nu0, runs)
    batch = stopped_walks(
        system,
        starts,
        xi,
        stream.child(1),
        cap=cap,
        on_cap="censor",
        escape_radius=escape_radius,
        window=window,
        workers=workers,
    )
    pool = EmpiricalRadonMeasure(
        batch.occupation_positions, np.full(len(batch.occupation_positions), 1.0 / runs)
    )
    masses = np.array([pool.mass(-r, r) for r in radii])
    right = np.array([pool.mass(0.0, r) for r in radii])
    previous = np.where(masses[:-1] > 0, masses[:-1], np.nan)
    ratios = np.concatenate([[np.nan], masses[1:] / previous])
    return pd.DataFrame(
        {"radius": radii, "mass": masses, "left": masses - right, "right": right, "ratio": ratios}
    )


@dataclass
class UniquenessReport:
    """Agreement of ratio estimates from two starts (and the pooled measure)."""

    median_x1: float
    median_x2: float
    nu_ratio: Optional[float]
    tolerance: float
    ratios: np.ndarray = field(repr=False)

    @property
    def relative_gap(self) -> float:
        return abs(self.median_x1 - self.median_x2) / max(abs(self.median_x1), 1e-300)

    @property
    def starts_agree(self) -> bool:
        return self.relative_gap <= self.tolerance

    @property
    def measure_agrees(self) -> Optional[bool]:
        if self.nu_ratio is None:
            return None
        centre = 0.5 * (self.median_x1 + self.median_x2)
        return abs(centre - self.nu_ratio) <= self.tolerance * abs(self.nu_ratio)


def uniqueness_cross_check(
    system: GeneratorSystem,
    x1: float,
    x2: float,
    psi: TestFunction,
    phi: TestFunction,
    N: int,
    trials: int,
    stream: RandomStream,
    nu: Optional[EmpiricalRadonMeasure] = None,
    tolerance: float = 0.10,
    workers: int = 1,
    K: Optional[Interval] = None,
) -> UniquenessReport:
    """Compare ratio-estimator medians from ``x1`` and ``x2`` (coupled letters).

    When ``nu`` is given, also compares against ``integral psi d nu / integral phi d nu``.
    """
    if x1 == x2:
        raise ValueError("Starting points must differ")
    ratios = ratio_ergodic_ensemble(
        system, [x1, x2], psi, phi, N, trials, stream, workers=workers, K=K
    )
    nu_ratio = None
    if nu is not None:
        denom = nu.integrate(phi)
        nu_ratio = nu.integrate(psi) / denom if denom > 0 else None
    return UniquenessReport(
        median_x1=float(np.nanmedian(ratios[:, 0])),
        median_x2=float(np.nanmedian(ratios[:, 1])),
        nu_ratio=nu_ratio,
        tolerance=tolerance,
        ratios=ratios,
    )


def ks_distance(a: EmpiricalRadonMeasure, b: EmpiricalRadonMeasure) -> float:
    """Two-sample Kolmogorov-Smirnov statistic between two equally weighted pools."""
    return float(stats.ks_2samp(a.positions, b.positions).statistic)


def minimal_set_estimate(
    system: GeneratorSystem,
    x: float,
    n: int,
    gap: float,
    stream: RandomStream,
) -> list[Interval]:
    """Cover a long orbit sample by intervals, splitting at gaps wider than ``gap``."""
    pts = np.unique(simulate(system, x, n, stream).positions)
    cuts = np.flatnonzero(np.diff(pts) > gap)
    lo = np.concatenate([[0], cuts + 1])
    hi = np.concatenate([cuts, [len(pts) - 1]])
    return [Interval(float(pts[i]), float(pts[j])) for i, j in zip(lo, hi)]


def support_mass_outside(nu: EmpiricalRadonMeasure, intervals: Sequence[Interval]) -> float:
    """``nu``-mass inside the hull of ``intervals`` but outside every interval."""
    if not intervals:
        return 0.0
    hull = nu.mass(float(intervals[0].lo), float(intervals[-1].hi))
    inside = sum(nu.mass(float(c.lo), float(c.hi)) for c in intervals)
    return max(hull - inside, 0.0)
