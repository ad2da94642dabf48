"""
Markov chain engine for random walks on generator systems.

Simulates ``X_n^x = g_n(...g_1(x))`` one trajectory at a time or as
vectorized ensembles of coupled copies, runs the bump-stopped process used
to build stationary measures, and gathers the recurrence, oscillation and
word-insertion statistics.

Each trial ``t`` (or lane) owns ``stream.child(t)`` and consumes it in a
fixed order, so ensemble trial ``t`` reproduces ``simulate(..., stream.child(t))``
exactly, whatever the batch size or worker count.

Author: linewalk developers
"""

from __future__ import annotations

import logging
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

import numpy as np
import pandas as pd

from linewalk.errors import StoppingCapExceeded
from linewalk.homeo import FloatEvaluator, Interval
from linewalk.rng import RandomStream
from linewalk.utils import map_batches
from linewalk.walkgroup import GeneratorSystem

logger = logging.getLogger("linewalk")

DEFAULT_CAP = 10**7
DEFAULT_ESCAPE_RADIUS = 1e100
DEFAULT_BLOCK = 256
DEFAULT_BATCH_TRIALS = 2048
STRAGGLER_LANES = 8


class CompiledSystem:
    """Float64 form of a generator system for Monte Carlo stepping.

    Args:
        system: The (validated) generator system.
    """

    def __init__(self, system: GeneratorSystem) -> None:
        self.system = system
        self.evaluators: list[FloatEvaluator] = [g.evaluator() for g in system.maps]
        self.cdf = system.cdf()
        self._cdf_list = self.cdf.tolist()

    @property
    def size(self) -> int:
        return len(self.evaluators)

    def letters(self, u: np.ndarray) -> np.ndarray:
        """Generator indices for uniforms ``u``."""
        return np.searchsorted(self.cdf, u, side="right")

    def letter(self, u: float) -> int:
        return bisect_right(self._cdf_list, u)

    def apply(self, letters: np.ndarray, positions: np.ndarray) -> np.ndarray:
        """Apply generator ``letters[i]`` to ``positions[i]`` for every row."""
        out = np.empty_like(positions, dtype=np.float64)
        for i, ev in enumerate(self.evaluators):
            rows = letters == i
            if rows.any():
                out[rows] = ev(positions[rows])
        return out

    def step(self, letter: int, x: float) -> float:
        return self.evaluators[letter].scalar(x)


# ── Trajectories ────────────────────────────────────────────────────────


@dataclass
class Trajectory:
    """A realized path ``X_0, ..., X_N`` with the letters that produced it."""

    start: float
    positions: np.ndarray
    letters: np.ndarray
    seed: int
    key: tuple[int, ...] = ()

    @property
    def length(self) -> int:
        return len(self.letters)

    def to_frame(self, trial: int = 0) -> pd.DataFrame:
        """Rows ``(trial, step, position, letter)``; step 0 has letter -1."""
        n = len(self.positions)
        return pd.DataFrame(
            {
                "trial": np.full(n, trial, dtype=np.int64),
                "step": np.arange(n, dtype=np.int64),
                "position": self.positions,
                "letter": np.concatenate([[-1], self.letters]).astype(np.int64),
            }
        )


def simulate(system: GeneratorSystem, x: float, n: int, stream: RandomStream) -> Trajectory:
    """Run the walk from ``x`` for ``n`` steps.

    Args:
        system: Generator system.
        x: Starting point.
        n: Number of steps (``n >= 0``).
        stream: Random stream; identical streams give identical trajectories.

    Returns:
        The :class:`Trajectory`.
    """
    if n < 0:
        raise ValueError(f"Number of steps must be non-negative, got {n}")
    compiled = CompiledSystem(system)
    letters = compiled.letters(stream.random(n)).astype(np.int64)
    positions = np.empty(n + 1, dtype=np.float64)
    positions[0] = x = float(x)
    for k, letter in enumerate(letters.tolist(), start=1):
        x = compiled.step(letter, x)
        positions[k] = x
    return Trajectory(float(positions[0]), positions, letters, stream.seed, stream.key)


def iterate_ensemble(
    compiled: CompiledSystem,
    starts: Sequence[float],
    n: int,
    streams: Sequence[RandomStream],
    block: int = DEFAULT_BLOCK,
) -> Iterator[tuple[int, np.ndarray, Optional[np.ndarray]]]:
    """Advance one trial per stream, each carrying coupled copies.

    Copies within a trial start at ``starts`` and share the trial's letters.

    Yields:
        ``(k, positions, letters)`` for ``k = 0..n``; ``positions`` has shape
        ``(trials, copies)`` and ``letters`` is None at ``k = 0``.
    """
    trials = len(streams)
    copies = len(starts)
    pos = np.tile(np.asarray(starts, dtype=np.float64), (trials, 1))
    yield 0, pos, None
    k = 0
    while k < n:
        b = min(block, n - k)
        uniforms = np.empty((b, trials), dtype=np.float64)
        for t, s in enumerate(streams):
            uniforms[:, t] = s.random(b)
        for j in range(b):
            letters = compiled.letters(uniforms[j])
            pos = compiled.apply(np.repeat(letters, copies), pos.ravel()).reshape(trials, copies)
            k += 1
            yield k, pos, letters


def simulate_ensemble(
    system: GeneratorSystem,
    starts: Sequence[float],
    n: int,
    stream: RandomStream,
    trials: int,
) -> np.ndarray:
    """Full paths of ``trials`` coupled ensembles.

    Returns:
        Array of shape ``(trials, n + 1, copies)``; trial ``t`` uses
        ``stream.child(t)``, so row ``t`` does not depend on ``trials``.
    """
    compiled = CompiledSystem(system)
    out = np.empty((trials, n + 1, len(starts)), dtype=np.float64)
    for k, pos, _ in iterate_ensemble(compiled, starts, n, _trial_streams(stream, 0, trials)):
        out[:, k, :] = pos
    return out


def _trial_streams(stream: RandomStream, lo: int, hi: int) -> list[RandomStream]:
    return [stream.child(t) for t in range(lo, hi)]


# ── Oscillation and recurrence ──────────────────────────────────────────


@dataclass
class OscillationStats:
    """Threshold-crossing fractions over an ensemble of trajectories."""

    trials: int
    frac_exceed_up: float
    frac_exceed_down: float
    frac_stay_above_start: np.ndarray
    up_threshold: float
    down_threshold: float

    @property
    def stay_se(self) -> np.ndarray:
        f = self.frac_stay_above_start
        return np.sqrt(f * (1.0 - f) / self.trials)

    @property
    def min_stay_z(self) -> float:
        """Largest shortfall below 1/2, in binomial standard errors at p = 1/2."""
        se = np.sqrt(0.25 / self.trials)
        return float(np.max((0.5 - self.frac_stay_above_start) / se))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "step": np.arange(len(self.frac_stay_above_start)),
                "frac_stay_above_start": self.frac_stay_above_start,
                "se": self.stay_se,
            }
        )


def oscillation_stats(
    system: GeneratorSystem,
    x: float,
    n: int,
    trials: int,
    A: float,
    stream: RandomStream,
    lower: Optional[float] = None,
    workers: int = 1,
    batch_trials: int = DEFAULT_BATCH_TRIALS,
) -> OscillationStats:
    """Fractions of trajectories reaching ``A`` from below and ``lower`` from above.

    Args:
        x: Common starting point.
        n: Trajectory length.
        trials: Number of trajectories.
        A: Upper threshold; ``frac_exceed_up`` counts ``max_k X_k >= A``.
        lower: Lower threshold for ``frac_exceed_down`` (``min_k X_k <= lower``);
            defaults to the mirror image ``2x - A``.

    Returns:
        :class:`OscillationStats`, including the per-step fraction with ``X_k >= x``.
    """
    if trials < 1:
        raise ValueError(f"Need at least one trial, got {trials}")
    x, A = float(x), float(A)
    lower = 2.0 * x - A if lower is None else float(lower)
    compiled = CompiledSystem(system)

    def run(bounds: tuple[int, int]) -> tuple[int, int, np.ndarray]:
        streams = _trial_streams(stream, *bounds)
        up = np.zeros(len(streams), dtype=bool)
        down = np.zeros(len(streams), dtype=bool)
        stay = np.zeros(n + 1, dtype=np.int64)
        for k, pos, _ in iterate_ensemble(compiled, [x], n, streams):
            col = pos[:, 0]
            up |= col >= A
            down |= col <= lower
            stay[k] = np.count_nonzero(col >= x)
        return int(up.sum()), int(down.sum()), stay

    parts = map_batches(run, trials, batch_trials, workers)
    ups = sum(p[0] for p in parts)
    downs = sum(p[1] for p in parts)
    stay = np.sum([p[2] for p in parts], axis=0)
    return OscillationStats(
        trials=trials,
        frac_exceed_up=ups / trials,
        frac_exceed_down=downs / trials,
        frac_stay_above_start=stay / trials,
        up_threshold=A,
        down_threshold=lower,
    )


def visit_counts(trajectory: Trajectory, K: Interval) -> int:
    """Number of indices ``k`` with ``X_k`` in the closed interval ``K``."""
    lo, hi = float(K.lo), float(K.hi)
    pos = trajectory.positions
    return int(np.count_nonzero((pos >= lo) & (pos <= hi)))


def recurrence_visits(
    system: GeneratorSystem,
    x: float,
    K: Interval,
    horizons: Sequence[int],
    trials: int,
    stream: RandomStream,
    workers: int = 1,
    batch_trials: int = DEFAULT_BATCH_TRIALS,
) -> pd.DataFrame:
    """Visit counts to ``K`` by each horizon, one row per trial.

    Returns:
        DataFrame with column ``trial`` and one ``visits_<h>`` column per horizon.
    """
    horizons = sorted(int(h) for h in horizons)
    n = horizons[-1]
    lo, hi = float(K.lo), float(K.hi)
    compiled = CompiledSystem(system)

    def run(bounds: tuple[int, int]) -> np.ndarray:
        streams = _trial_streams(stream, *bounds)
        counts = np.zeros(len(streams), dtype=np.int64)
        out = np.zeros((len(streams), len(horizons)), dtype=np.int64)
        for k, pos, _ in iterate_ensemble(compiled, [x], n, streams):
            col = pos[:, 0]
            counts += (col >= lo) & (col <= hi)
            for j, h in enumerate(horizons):
                if k == h:
                    out[:, j] = counts
        return out

    counts = np.concatenate(map_batches(run, trials, batch_trials, workers))
    frame = pd.DataFrame({"trial": np.arange(trials, dtype=np.int64)})
    for j, h in enumerate(horizons):
        frame[f"visits_{h}"] = counts[:, j]
    return frame


# ── Bump-stopped process ────────────────────────────────────────────────


@dataclass(frozen=True)
class BumpProfile:
    """Trapezoid stopping profile: 1 on ``inner``, 0 outside ``outer``, linear between."""

    inner: Interval
    outer: Interval

    def __post_init__(self) -> None:
        if not (self.outer.lo < self.inner.lo and self.inner.hi < self.outer.hi):
            raise ValueError(
                f"Outer interval {self.outer.as_tuple()} must strictly contain "
                f"{self.inner.as_tuple()} on both sides"
            )
        a, b = float(self.outer.lo), float(self.inner.lo)
        c, d = float(self.inner.hi), float(self.outer.hi)
        object.__setattr__(self, "_edges", (a, b - a, c, d, d - c))

    @classmethod
    def around(cls, K: Interval, widen: float = 0.2) -> "BumpProfile":
        """Profile equal to 1 on ``K`` with support ``K`` widened by ``widen`` per side."""
        return cls(K, K.widen(widen))

    def __call__(self, x: np.ndarray) -> np.ndarray:
        a, rise, _, d, fall = self._edges
        x = np.asarray(x, dtype=np.float64)
        return np.maximum(0.0, np.minimum(np.minimum((x - a) / rise, (d - x) / fall), 1.0))

    def scalar(self, x: float) -> float:
        a, rise, _, d, fall = self._edges
        return max(0.0, min(min((x - a) / rise, (d - x) / fall), 1.0))

    @property
    def support(self) -> Interval:
        return self.outer


@dataclass
class StoppedRun:
    """One bump-stopped run: positions ``X_0..X_T``.

    A censored run hit the step cap or the escape radius before stopping;
    its ``Y`` is NaN.
    """

    start: float
    positions: np.ndarray
    censored: bool = False

    @property
    def T(self) -> int:
        return len(self.positions) - 1

    @property
    def Y(self) -> float:
        return float("nan") if self.censored else float(self.positions[-1])

    @property
    def occupation(self) -> np.ndarray:
        """``X_0, ..., X_{T-1}``: the points whose Dirac masses form the occupation measure."""
        return self.positions[:-1]


def _check_policy(on_cap: str) -> None:
    if on_cap not in ("raise", "censor"):
        raise ValueError(f"on_cap must be 'raise' or 'censor', got {on_cap!r}")


def stopped_walk(
    system: GeneratorSystem,
    x: float,
    xi: BumpProfile,
    stream: RandomStream,
    cap: int = DEFAULT_CAP,
    on_cap: str = "raise",
    escape_radius: float = DEFAULT_ESCAPE_RADIUS,
    block: int = DEFAULT_BLOCK,
) -> StoppedRun:
    """Walk from ``x``, stopping after each move with probability ``xi(X_{n+1})``.

    Each step consumes two uniforms from ``stream``: the letter, then the
    stopping coin.

    Raises:
        StoppingCapExceeded: If ``on_cap="raise"`` and the run does not stop
            within ``cap`` steps or leaves ``[-escape_radius, escape_radius]``.
    """
    _check_policy(on_cap)
    compiled = CompiledSystem(system)
    pos = float(x)
    path = [pos]
    steps = 0
    while True:
        draws = stream.random((block, 2)).tolist()
        for u, coin in draws:
            pos = compiled.step(compiled.letter(u), pos)
            path.append(pos)
            steps += 1
            if coin < xi.scalar(pos):
                return StoppedRun(float(x), np.array(path))
            reason = _blown(steps, pos, cap, escape_radius)
            if reason:
                if on_cap == "raise":
                    raise StoppingCapExceeded(float(x), steps, pos, reason)
                logger.warning(
                    "Censored stopped run from x=%g after %d steps (%s)", x, steps, reason
                )
                return StoppedRun(float(x), np.array(path), censored=True)


def _blown(steps: int, pos: float, cap: int, escape_radius: float) -> Optional[str]:
    if steps >= cap:
        return "cap"
    if abs(pos) > escape_radius:
        return "escape"
    return None


@dataclass
class StoppedBatch:
    """Results of many stopped runs, one row per run, ordered by ``(lane, run)``.

    ``occupation_positions`` / ``occupation_lanes`` hold every pre-stop
    position that fell inside the recording window, with its lane.
    """

    lane: np.ndarray
    run: np.ndarray
    start: np.ndarray
    T: np.ndarray
    Y: np.ndarray
    censored: np.ndarray
    occupation_positions: np.ndarray = field(default_factory=lambda: np.empty(0))
    occupation_lanes: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))

    @property
    def n_runs(self) -> int:
        return len(self.T)

    @property
    def n_censored(self) -> int:
        return int(np.count_nonzero(self.censored))

    def stop_points(self) -> np.ndarray:
        """Stop points of the runs that actually stopped."""
        return self.Y[~self.censored]

    def to_frame(self) -> pd.DataFrame:
        """Rows ``(trial, run, start, T, Y, censored)``."""
        return pd.DataFrame(
            {
                "trial": self.lane,
                "run": self.run,
                "start": self.start,
                "T": self.T,
                "Y": self.Y,
                "censored": self.censored,
            }
        )

    @classmethod
    def concat(cls, parts: Sequence["StoppedBatch"]) -> "StoppedBatch":
        return cls(
            lane=np.concatenate([p.lane for p in parts]),
            run=np.concatenate([p.run for p in parts]),
            start=np.concatenate([p.start for p in parts]),
            T=np.concatenate([p.T for p in parts]),
            Y=np.concatenate([p.Y for p in parts]),
            censored=np.concatenate([p.censored for p in parts]),
            occupation_positions=np.concatenate([p.occupation_positions for p in parts]),
            occupation_lanes=np.concatenate([p.occupation_lanes for p in parts]),
        )


class _LaneRunner:
    """Vectorized stopped runs over independent lanes.

    All active lanes consume one ``(letter, coin)`` pair per global step, so
    they share a read pointer into their per-lane random blocks. Once only a
    handful of lanes remain, they are finished one by one with the scalar
    code path, which performs the same arithmetic.
    """

    def __init__(
        self,
        compiled: CompiledSystem,
        xi: BumpProfile,
        starts: np.ndarray,
        lane_ids: np.ndarray,
        streams: Sequence[RandomStream],
        runs_per_lane: int,
        cap: int,
        on_cap: str,
        escape_radius: float,
        window: Optional[Interval],
        block: int,
    ) -> None:
        self.compiled = compiled
        self.xi = xi
        self.lane_ids = lane_ids
        self.streams = streams
        self.runs_per_lane = runs_per_lane
        self.cap = cap
        self.on_cap = on_cap
        self.escape_radius = escape_radius
        self.window = None if window is None else (float(window.lo), float(window.hi))
        self.block = block

        n = len(starts)
        self.pos = np.asarray(starts, dtype=np.float64).copy()
        self.run_start = self.pos.copy()
        self.steps = np.zeros(n, dtype=np.int64)
        self.run_idx = np.zeros(n, dtype=np.int64)
        self.active = np.ones(n, dtype=bool)
        self.buf = np.empty((n, block, 2), dtype=np.float64)
        self.ptr = block
        self.records: list[tuple[np.ndarray, ...]] = []
        self.occ_pos: list[np.ndarray] = []
        self.occ_lane: list[np.ndarray] = []

    def run(self) -> StoppedBatch:
        while True:
            idx = np.flatnonzero(self.active)
            if idx.size == 0:
                break
            if idx.size <= STRAGGLER_LANES:
                for lane in idx.tolist():
                    self._finish_scalar(lane, self.ptr)
                break
            self._vector_step(idx)
        return self._collect()

    def _vector_step(self, idx: np.ndarray) -> None:
        if self.ptr == self.block:
            for lane in idx.tolist():
                self.buf[lane] = self.streams[lane].random((self.block, 2))
            self.ptr = 0
        x = self.pos[idx]
        if self.window is not None:
            inside = (x >= self.window[0]) & (x <= self.window[1])
            self.occ_pos.append(x[inside])
            self.occ_lane.append(idx[inside])
        u = self.buf[idx, self.ptr, 0]
        coin = self.buf[idx, self.ptr, 1]
        self.ptr += 1

        new = self.compiled.apply(self.compiled.letters(u), x)
        self.pos[idx] = new
        self.steps[idx] += 1
        stopped = coin < self.xi(new)
        over = (self.steps[idx] >= self.cap) | (np.abs(new) > self.escape_radius)
        blown = ~stopped & over
        if blown.any() and self.on_cap == "raise":
            lane = int(idx[blown][0])
            steps, where = int(self.steps[lane]), float(self.pos[lane])
            reason = _blown(steps, where, self.cap, self.escape_radius)
            raise StoppingCapExceeded(float(self.run_start[lane]), steps, where, reason)
        ended = stopped | blown
        if ended.any():
            self._end_runs(idx[ended], new[ended], blown[ended])

    def _end_runs(self, lanes: np.ndarray, final: np.ndarray, censored: np.ndarray) -> None:
        Y = np.where(censored, np.nan, final)
        self.records.append(
            (
                lanes.copy(),
                self.run_idx[lanes].copy(),
                self.run_start[lanes].copy(),
                self.steps[lanes].copy(),
                Y,
                censored.copy(),
            )
        )
        self.run_idx[lanes] += 1
        self.steps[lanes] = 0
        more = self.run_idx[lanes] < self.runs_per_lane
        restart = np.where(censored, self.run_start[lanes], final)
        self.pos[lanes[more]] = restart[more]
        self.run_start[lanes[more]] = restart[more]
        self.active[lanes[~more]] = False

    def _finish_scalar(self, lane: int, ptr: int) -> None:
        compiled, xi, stream = self.compiled, self.xi, self.streams[lane]
        buf = self.buf[lane].tolist() if ptr < self.block else []
        x = float(self.pos[lane])
        start = float(self.run_start[lane])
        steps = int(self.steps[lane])
        run = int(self.run_idx[lane])
        occ: list[float] = []
        lo, hi = self.window if self.window is not None else (0.0, -1.0)

        while run < self.runs_per_lane:
            if ptr >= self.block:
                buf = stream.random((self.block, 2)).tolist()
                ptr = 0
            u, coin = buf[ptr]
            ptr += 1
            if lo <= x <= hi:
                occ.append(x)
            x = compiled.step(compiled.letter(u), x)
            steps += 1
            stop = coin < xi.scalar(x)
            reason = None if stop else _blown(steps, x, self.cap, self.escape_radius)
            if reason and self.on_cap == "raise":
                raise StoppingCapExceeded(start, steps, x, reason)
            if stop or reason:
                self.records.append(
                    (
                        np.array([lane], dtype=np.int64),
                        np.array([run], dtype=np.int64),
                        np.array([start]),
                        np.array([steps], dtype=np.int64),
                        np.array([np.nan if reason else x]),
                        np.array([reason is not None]),
                    )
                )
                run += 1
                steps = 0
                if reason:
                    x = start
                start = x

        self.active[lane] = False

        if occ:
            self.occ_pos.append(np.array(occ))
            self.occ_lane.append(np.full(len(occ), lane, dtype=np.int64))

    def _collect(self) -> StoppedBatch:
        if self.records:
            cols = [np.concatenate(c) for c in zip(*self.records)]
        else:
            cols = [np.empty(0, dtype=np.int64)] * 2 + [np.empty(0)] * 3 + [np.empty(0, bool)]
        lane, run, start, T, Y, censored = cols
        order = np.lexsort((run, lane))
        occ_pos = np.concatenate(self.occ_pos) if self.occ_pos else np.empty(0)
        occ_lane = (
            np.concatenate(self.occ_lane) if self.occ_lane else np.empty(0, dtype=np.int64)
        )
        occ_order = np.lexsort((occ_pos, occ_lane))
        return StoppedBatch(
            lane=self.lane_ids[lane[order]],
            run=run[order],
            start=start[order],
            T=T[order],
            Y=Y[order],
            censored=censored[order].astype(bool),
            occupation_positions=occ_pos[occ_order],
            occupation_lanes=self.lane_ids[occ_lane[occ_order]],
        )


def stopped_walks(
    system: GeneratorSystem,
    starts: Sequence[float],
    xi: BumpProfile,
    stream: RandomStream,
    runs_per_lane: int = 1,
    cap: int = DEFAULT_CAP,
    on_cap: str = "raise",
    escape_radius: float = DEFAULT_ESCAPE_RADIUS,
    window: Optional[Interval] = None,
    workers: int = 1,
    batch_lanes: int = DEFAULT_BATCH_TRIALS,
    block: int = DEFAULT_BLOCK,
) -> StoppedBatch:
    """Run one lane of bump-stopped runs per start, vectorized across lanes.

    Lane ``l`` uses ``stream.child(l)``; with ``runs_per_lane = 1`` it
    reproduces ``stopped_walk(system, starts[l], xi, stream.child(l))``.
    With more runs per lane each run starts at the previous stop point,
    which iterates the stopped kernel.

    Args:
        window: If given, positions ``X_0..X_{T-1}`` inside it are recorded.
        on_cap: ``"raise"`` or ``"censor"`` when a run exceeds ``cap`` steps
            or leaves ``[-escape_radius, escape_radius]``; censored runs
            restart from their own start.

    Returns:
        A :class:`StoppedBatch`.
    """
    _check_policy(on_cap)
    if runs_per_lane < 1:
        raise ValueError(f"runs_per_lane must be >= 1, got {runs_per_lane}")
    starts = np.asarray(starts, dtype=np.float64)
    compiled = CompiledSystem(system)

    def run(bounds: tuple[int, int]) -> StoppedBatch:
        lo, hi = bounds
        runner = _LaneRunner(
            compiled,
            xi,
            starts[lo:hi],
            np.arange(lo, hi, dtype=np.int64),
            _trial_streams(stream, lo, hi),
            runs_per_lane,
            cap,
            on_cap,
            escape_radius,
            window,
            block,
        )
        return runner.run()

    batch = StoppedBatch.concat(map_batches(run, len(starts), batch_lanes, workers))
    if batch.n_censored:
        logger.warning(
            "%d of %d stopped runs censored (cap=%d, escape radius=%g)",
            batch.n_censored,
            batch.n_runs,
            cap,
            escape_radius,
        )
    return batch


# ── Word insertion events ───────────────────────────────────────────────


@dataclass
class WordEventStats:
    """How often the walk is in ``K`` and then reads a given word."""

    word: tuple[int, ...]
    trials: int
    hit_fraction: float
    mean_hits: float
    hits_se: float
    word_probability: float
    mean_occupancy: float
    excess_se: float = float("nan")

    @property
    def expected_hits(self) -> float:
        """``p * mean occupancy``: the hit count if letters were independent of position."""
        return self.word_probability * self.mean_occupancy

    @property
    def z(self) -> float:
        """``|mean hits - expected hits|`` over the standard error of the per-trial excess."""
        excess = abs(self.mean_hits - self.expected_hits)
        if excess == 0:
            return 0.0
        return excess / self.excess_se if self.excess_se > 0 else float("inf")

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [
                {
                    "word": " ".join(str(w) for w in self.word),
                    "trials": self.trials,
                    "hit_fraction": self.hit_fraction,
                    "mean_hits": self.mean_hits,
                    "expected_hits": self.expected_hits,
                    "excess_se": self.excess_se,
                    "z": self.z,
                }
            ]
        )


def word_event_frequency(
    system: GeneratorSystem,
    x: float,
    K: Interval,
    word: Sequence[int],
    n: int,
    trials: int,
    stream: RandomStream,
    workers: int = 1,
    batch_trials: int = DEFAULT_BATCH_TRIALS,
) -> WordEventStats:
    """Count indices ``k <= n - |word|`` with ``X_k`` in ``K`` followed by ``word``.

    The empty word reduces to visit counts of ``K`` up to ``n``.
    """
    word = tuple(int(w) for w in word)
    if any(not 0 <= w < system.size for w in word):
        raise ValueError(f"Word {word} uses letters outside 0..{system.size - 1}")
    m = len(word)
    lo, hi = float(K.lo), float(K.hi)
    compiled = CompiledSystem(system)

    def run(bounds: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
        streams = _trial_streams(stream, *bounds)
        size = len(streams)
        # matched[j]: a candidate in K started j steps ago and has read word[:j]
        matched = np.zeros((m + 1, size), dtype=bool)
        hits = np.zeros(size, dtype=np.int64)
        occupancy = np.zeros(size, dtype=np.int64)
        for k, pos, letters in iterate_ensemble(compiled, [x], n, streams):
            if letters is not None:
                for j in range(m, 0, -1):
                    matched[j] = matched[j - 1] & (letters == word[j - 1])
            col = pos[:, 0]
            matched[0] = (col >= lo) & (col <= hi)
            if k <= n - m:
                occupancy += matched[0]
            hits += matched[m]
        return hits, occupancy

    parts = map_batches(run, trials, batch_trials, workers)
    hits = np.concatenate([p[0] for p in parts])
    occupancy = np.concatenate([p[1] for p in parts])
    p = 1.0
    for w in word:
        p *= float(system.generators[w].weight)
    excess = hits - p * occupancy
    return WordEventStats(
        word=word,
        trials=trials,
        hit_fraction=float(np.mean(hits > 0)),
        mean_hits=float(hits.mean()),
        hits_se=float(hits.std(ddof=1) / np.sqrt(trials)) if trials > 1 else float("nan"),
        word_probability=p,
        mean_occupancy=float(occupancy.mean()),
        excess_se=float(excess.std(ddof=1) / np.sqrt(trials)) if trials > 1 else float("nan"),
    )
