"""
Geometry of the walk measured with a stationary measure.

Defines the distance ``d(x, y) = nu(min, max]``, checks that it is a
martingale along coupled trajectories, runs the contraction experiments,
and classifies a generator system into one of the structural regimes
(discrete orbit, translation-like, lift-like, strongly contracting).

Author: linewalk developers
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Optional, Protocol, Sequence

import numpy as np
import pandas as pd
from scipy import stats

from linewalk.chain import DEFAULT_BATCH_TRIALS, CompiledSystem, iterate_ensemble, simulate
from linewalk.homeo import Interval, LiftedPLHomeo
from linewalk.rng import RandomStream
from linewalk.utils import map_batches
from linewalk.walkgroup import GeneratorSystem, recurrence_interval

logger = logging.getLogger("linewalk")

VERDICTS = (
    "discrete-orbit",
    "translation-like",
    "lift-like",
    "strong-contraction-like",
    "inconclusive",
)


class _MassQueries(Protocol):
    def mass_between(self, lo: Any, hi: Any) -> np.ndarray: ...


class NuDistance:
    """``d(x, y) = nu(min(x, y), max(x, y)]``.

    The half-open interval gives ``d(x, x) = 0`` and exact additivity
    ``d(x, z) = d(x, y) + d(y, z)`` for ``x <= y <= z`` even when ``nu`` has atoms.

    Args:
        nu: Any measure exposing ``mass_between`` (empirical or Lebesgue).
    """

    def __init__(self, nu: _MassQueries) -> None:
        self.nu = nu

    def __call__(self, x: Any, y: Any) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        return self.nu.mass_between(np.minimum(x, y), np.maximum(x, y))


# ── Martingale property ─────────────────────────────────────────────────


@dataclass
class MartingaleResult:
    """Per-step mean of ``d(X_k^x, X_k^y)`` over coupled trials.

    ``nu_se`` is the batch-means error of ``mean_k - d(x, y)`` across the
    replicas of ``nu`` (zero when the measure carries none); it is added to
    the path-sampling error ``se`` in quadrature.
    """

    initial: float
    means: np.ndarray
    se: np.ndarray
    trials: int
    nu_se: Optional[np.ndarray] = None

    @property
    def total_se(self) -> np.ndarray:
        if self.nu_se is None:
            return self.se
        return np.sqrt(self.se**2 + self.nu_se**2)

    @property
    def z(self) -> np.ndarray:
        floor = 1e-12 * max(1.0, abs(self.initial))
        return np.abs(self.means - self.initial) / np.maximum(self.total_se, floor)

    @property
    def max_z(self) -> float:
        return float(self.z.max())

    @property
    def passed(self) -> bool:
        return self.max_z <= 3.0

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(
            {"step": np.arange(len(self.means)), "mean": self.means, "se": self.se, "z": self.z}
        )
        if self.nu_se is not None:
            frame.insert(3, "nu_se", self.nu_se)
        return frame


def _replica_measures(nu: _MassQueries) -> list[_MassQueries]:
    R = getattr(nu, "n_replicas", 0)
    if R < 2:
        return []
    parts = []
    for r in range(R):
        part = nu.replica(r)
        if part.reference is not None and part.mass(*part.reference.as_tuple()) > 0:
            part = part.normalized(part.reference)
        parts.append(part)
    return parts


def martingale_check(
    system: GeneratorSystem,
    nu: _MassQueries,
    x: float,
    y: float,
    n: int,
    trials: int,
    stream: RandomStream,
    workers: int = 1,
    batch_trials: int = DEFAULT_BATCH_TRIALS,
) -> MartingaleResult:
    """Track ``d(X_k^x, X_k^y)`` on trajectories driven by the same letters.

    When ``nu`` carries two or more replicas, each replica measure is run
    over the same trajectories to estimate how much of the deviation comes
    from the measure itself.
    """
    if x > y:
        raise ValueError(f"Need x <= y, got x={x}, y={y}")
    d = NuDistance(nu)
    parts = _replica_measures(nu)
    dists = [NuDistance(p) for p in parts]
    compiled = CompiledSystem(system)

    def run(bounds: tuple[int, int]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        streams = [stream.child(t) for t in range(*bounds)]
        sums = np.zeros(n + 1)
        sq = np.zeros(n + 1)
        rep = np.zeros((len(dists), n + 1))
        for k, pos, _ in iterate_ensemble(compiled, [x, y], n, streams):
            gap = d(pos[:, 0], pos[:, 1])
            sums[k] = gap.sum()
            sq[k] = np.dot(gap, gap)
            for r, dr in enumerate(dists):
                rep[r, k] = dr(pos[:, 0], pos[:, 1]).sum()
        return sums, sq, rep

    out = map_batches(run, trials, batch_trials, workers)
    sums = np.sum([p[0] for p in out], axis=0)
    sq = np.sum([p[1] for p in out], axis=0)
    means = sums / trials
    if trials > 1:
        var = np.maximum(sq - trials * means**2, 0.0) / (trials - 1)
        se = np.sqrt(var / trials)
    else:
        se = np.full_like(means, np.nan)
    nu_se = None
    if dists:
        rep = np.sum([p[2] for p in out], axis=0) / trials
        deltas = rep - np.array([[float(dr(x, y))] for dr in dists])
        nu_se = deltas.std(axis=0, ddof=1) / np.sqrt(len(dists))
    return MartingaleResult(float(d(x, y)), means, se, trials, nu_se)


# ── Contraction ─────────────────────────────────────────────────────────


@dataclass
class ContractionResult:
    """Gated gaps ``|X_k^y - X_k^x|`` over trials with ``X_k^x`` in ``J``."""

    initial_gap: float
    checkpoints: list[int]
    gaps: dict[int, np.ndarray]
    trials: int
    dump: Optional[pd.DataFrame] = field(default=None, repr=False)

    def median(self, k: int) -> float:
        g = self.gaps[k]
        return float(np.median(g)) if len(g) else float("nan")

    def quantile(self, k: int, q: float) -> float:
        g = self.gaps[k]
        return float(np.quantile(g, q)) if len(g) else float("nan")

    def gated_fraction(self, k: int) -> float:
        return len(self.gaps[k]) / self.trials

    @property
    def final(self) -> int:
        return self.checkpoints[-1]

    def contracting_fraction(self, factor: float = 0.1) -> tuple[float, float, float]:
        """Fraction of gated trials with final gap below ``factor * initial``, with a 95% CI."""
        g = self.gaps[self.final]
        if not len(g):
            return float("nan"), 0.0, 1.0
        k = int(np.count_nonzero(g < factor * self.initial_gap))
        ci = stats.binomtest(k, len(g)).proportion_ci(confidence_level=0.95, method="wilson")
        return k / len(g), float(ci.low), float(ci.high)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [
                {
                    "step": k,
                    "gated_fraction": self.gated_fraction(k),
                    "median": self.median(k),
                    "q90": self.quantile(k, 0.9),
                }
                for k in self.checkpoints
            ]
        )


def contraction_experiment(
    system: GeneratorSystem,
    x: float,
    y: float,
    J: Interval,
    n: int,
    trials: int,
    stream: RandomStream,
    nu: Optional[_MassQueries] = None,
    dump_trials: int = 0,
    dump_every: int = 1,
    workers: int = 1,
    batch_trials: int = DEFAULT_BATCH_TRIALS,
) -> ContractionResult:
    """Gaps of coupled trajectories from ``x < y``, read while ``X_k^x`` is in ``J``.

    Checkpoints are ``n // 4``, ``n // 2`` and ``n``. The first ``dump_trials``
    trials are also recorded every ``dump_every`` steps as rows
    ``(trial, step, gap_euclidean, gap_nu, gated)``.
    """
    if not x < y:
        raise ValueError(f"Need x < y, got x={x}, y={y}")
    checkpoints = sorted({max(n // 4, 1), max(n // 2, 1), n})
    lo, hi = float(J.lo), float(J.hi)
    d = NuDistance(nu) if nu is not None else None
    compiled = CompiledSystem(system)

    def run(bounds: tuple[int, int]):
        first = bounds[0]
        streams = [stream.child(t) for t in range(*bounds)]
        out: dict[int, np.ndarray] = {}
        rows = []
        n_dump = max(min(dump_trials - first, len(streams)), 0)
        for k, pos, _ in iterate_ensemble(compiled, [x, y], n, streams):
            gap = pos[:, 1] - pos[:, 0]
            gated = (pos[:, 0] >= lo) & (pos[:, 0] <= hi)
            if k in checkpoints:
                out[k] = gap[gated]
            if n_dump and k % dump_every == 0:
                nu_gap = d(pos[:n_dump, 0], pos[:n_dump, 1]) if d is not None else np.nan
                rows.append(
                    pd.DataFrame(
                        {
                            "trial": np.arange(first, first + n_dump),
                            "step": k,
                            "gap_euclidean": gap[:n_dump],
                            "gap_nu": nu_gap,
                            "gated": gated[:n_dump],
                        }
                    )
                )
        return out, rows

    parts = map_batches(run, trials, batch_trials, workers)
    gaps = {k: np.concatenate([p[0][k] for p in parts]) for k in checkpoints}
    rows = [r for p in parts for r in p[1]]
    dump = None
    if rows:
        dump = pd.concat(rows, ignore_index=True).sort_values(["trial", "step"], kind="stable")
        dump = dump.reset_index(drop=True)
    return ContractionResult(float(y - x), checkpoints, gaps, trials, dump)


def contraction_verdict(
    result: ContractionResult,
    structure: str,
    median_bound: float = 0.2,
    rigid_tolerance: float = 1e-6,
) -> tuple[bool, float, float, str]:
    """Pass/fail reading of a contraction run, given the structure verdict.

    Discrete-orbit and translation-like systems must keep every gated gap
    equal to the initial one. Any other system passes when the median gated
    gap has shrunk to ``median_bound`` of the initial gap, or when the 95%
    interval of the contracting fraction excludes 0.

    Returns:
        ``(passed, value, threshold, details)`` for the checks table.
    """
    g = result.gaps[result.final]
    if structure in ("discrete-orbit", "translation-like"):
        drift = float(np.max(np.abs(g / result.initial_gap - 1.0))) if len(g) else 0.0
        return (
            drift <= rigid_tolerance,
            drift,
            rigid_tolerance,
            f"{structure}: largest relative change of the gated gap after {result.final} steps",
        )
    ratio = result.median(result.final) / result.initial_gap
    frac, lo, hi = result.contracting_fraction()
    passed = bool(ratio <= median_bound or lo > 0)
    return (
        passed,
        round(ratio, 4),
        median_bound,
        f"median gated gap over initial; contracting fraction {frac:.3f} [{lo:.3f}, {hi:.3f}]",
    )


def gap_excursions(
    system: GeneratorSystem,
    nu: _MassQueries,
    x: float,
    y: float,
    n: int,
    trials: int,
    stream: RandomStream,
    workers: int = 1,
    batch_trials: int = DEFAULT_BATCH_TRIALS,
) -> pd.DataFrame:
    """Extremes of the Euclidean gap and the final ``nu``-gap along coupled runs.

    Returns:
        One row per trial: max_ratio, min_ratio (Euclidean gap over its
        initial value) and final_nu_gap.
    """
    d = NuDistance(nu)
    initial = float(y - x)
    compiled = CompiledSystem(system)

    def run(bounds: tuple[int, int]) -> np.ndarray:
        streams = [stream.child(t) for t in range(*bounds)]
        big = np.ones(len(streams))
        small = np.ones(len(streams))
        last = None
        for _, pos, _ in iterate_ensemble(compiled, [x, y], n, streams):
            ratio = (pos[:, 1] - pos[:, 0]) / initial
            np.maximum(big, ratio, out=big)
            np.minimum(small, ratio, out=small)
            last = pos
        return np.column_stack([big, small, d(last[:, 0], last[:, 1])])

    data = np.concatenate(map_batches(run, trials, batch_trials, workers))
    return pd.DataFrame(
        {
            "trial": np.arange(trials),
            "max_ratio": data[:, 0],
            "min_ratio": data[:, 1],
            "final_nu_gap": data[:, 2],
            "initial_nu_gap": float(d(x, y)),
        }
    )


# ── Structure classification ────────────────────────────────────────────


def _distinct(positions: np.ndarray) -> np.ndarray:
    pts = np.unique(positions)
    # merge float drift along the orbit
    keep = np.concatenate([[True], np.diff(pts) > 1e-9 * np.maximum(1.0, np.abs(pts[1:]))])
    return pts[keep]


class StructureClassifier:
    """Heuristic classifier of the dynamics of a generator system.

    Runs, in order:
    - Discrete orbit: a long orbit sample has gaps bounded below
    - Translations: every generator is a translation
    - Lift: generators commute with a unit translation, or coupled gaps
      of one unit never move while half-unit gaps contract
    - Contraction: coupled gaps shrink below ``contraction_factor`` of the start

    Args:
        system: Validated generator system.
        stream: Random stream for the sampling checks.
        samples: Orbit sample length.
        gap_ratio: Minimum gap over median gap that counts as discrete.
        contraction_factor: Median final gap over initial gap for a
            strong-contraction verdict.
        unit: Period used by the lift check.
        steps: Length of the coupled runs.
        trials: Number of coupled runs.
    """

    def __init__(
        self,
        system: GeneratorSystem,
        stream: RandomStream,
        samples: int = 20_000,
        gap_ratio: float = 0.5,
        contraction_factor: float = 0.2,
        unit: float = 1.0,
        steps: int = 2_000,
        trials: int = 400,
        workers: int = 1,
    ) -> None:
        self._system = system
        self._stream = stream
        self._samples = samples
        self._gap_ratio = gap_ratio
        self._contraction_factor = contraction_factor
        self._unit = unit
        self._steps = steps
        self._trials = trials
        self._workers = workers
        K = recurrence_interval(system)
        self._K = K
        self._x0 = float(K.midpoint)

    def check_discrete_orbit(self) -> dict[str, Any]:
        """Gaps of a long orbit stay bounded below, and do not shrink as it grows.

        The second condition compares against the first sixteenth of the
        orbit: dense orbits can show only two or three gap lengths at a
        time, but their smallest gap keeps shrinking with the sample.
        """
        traj = simulate(self._system, self._x0, self._samples, self._stream.child(0))
        full = _distinct(traj.positions)
        if len(full) < 3:
            return {"discrete": True, "min_gap": float("inf"), "median_gap": float("inf")}
        gaps = np.diff(full)
        min_gap, median_gap = float(gaps.min()), float(np.median(gaps))
        prefix = _distinct(traj.positions[: self._samples // 16 + 1])
        prefix_gap = float(np.diff(prefix).min()) if len(prefix) >= 3 else min_gap
        return {
            "discrete": min_gap >= self._gap_ratio * median_gap and min_gap >= 0.5 * prefix_gap,
            "min_gap": min_gap,
            "median_gap": median_gap,
            "prefix_min_gap": prefix_gap,
            "distinct_points": int(len(full)),
        }

    def check_translations(self) -> dict[str, Any]:
        flags = [bool(g.is_translation) for g in self._system.maps]
        return {"translations": all(flags), "translation_count": sum(flags)}

    def _coupled(self, gap: float, key: int) -> ContractionResult:
        J = self._K.widen(2)
        return contraction_experiment(
            self._system,
            self._x0,
            self._x0 + gap,
            J,
            self._steps,
            self._trials,
            self._stream.child(key),
            workers=self._workers,
        )

    def check_lift(self) -> dict[str, Any]:
        maps = self._system.maps
        lifted = [g for g in maps if isinstance(g, LiftedPLHomeo)]
        by_type = bool(lifted) and all(
            isinstance(g, LiftedPLHomeo) or g.is_translation for g in maps
        )
        if by_type:
            return {"lift": True, "evidence": "generators commute with x+period"}
        whole = self._coupled(self._unit, 1)
        half = self._coupled(self._unit / 2, 2)
        g_whole = whole.gaps[whole.final]
        rigid = len(g_whole) > 0 and bool(np.allclose(g_whole, self._unit, rtol=0, atol=1e-9))
        half_contracts = half.median(half.final) < self._contraction_factor * (self._unit / 2)
        return {
            "lift": rigid and half_contracts,
            "evidence": "unit gaps rigid, half-unit gaps contract" if rigid else "unit gaps move",
        }

    def check_contraction(self) -> dict[str, Any]:
        result = self._coupled(self._unit, 3)
        ratio = result.median(result.final) / result.initial_gap
        return {
            "strong": bool(ratio <= self._contraction_factor),
            "median_ratio": ratio,
            "medians": [result.median(k) for k in result.checkpoints],
        }

    def classify(self) -> dict[str, Any]:
        """Run the decision tree.

        Returns:
            Dictionary with ``verdict`` (one of :data:`VERDICTS`) and the
            evidence gathered by each check that ran.
        """
        evidence: dict[str, Any] = {}
        evidence["discrete_orbit"] = self.check_discrete_orbit()
        if evidence["discrete_orbit"]["discrete"]:
            return {"verdict": "discrete-orbit", **evidence}
        evidence["translations"] = self.check_translations()
        if evidence["translations"]["translations"]:
            return {"verdict": "translation-like", **evidence}
        evidence["lift"] = self.check_lift()
        if evidence["lift"]["lift"]:
            return {"verdict": "lift-like", **evidence}
        evidence["contraction"] = self.check_contraction()
        if evidence["contraction"]["strong"]:
            return {"verdict": "strong-contraction-like", **evidence}
        logger.warning(
            "Structure inconclusive: median gap ratio %.3g above %.3g",
            evidence["contraction"]["median_ratio"],
            self._contraction_factor,
        )
        return {"verdict": "inconclusive", **evidence}


def classify_structure(
    system: GeneratorSystem,
    samples: int,
    stream: RandomStream,
    **knobs: Any,
) -> str:
    """Verdict of :class:`StructureClassifier` for ``system``."""
    return StructureClassifier(system, stream, samples=samples, **knobs).classify()["verdict"]
