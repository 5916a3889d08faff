"""Piecewise-deterministic trajectories and their ensemble reduction.

A trajectory alternates exact Gaussian propagation (one closed-form
rotation per step dt) with per-step Bernoulli jump checks.  Everything
random about trajectory i comes from one private Philox stream derived
from (master_seed, i), so any trajectory is reproducible in isolation
and the ensemble result cannot depend on scheduling.

Trajectories are simulated in fixed-size batches of _BATCH_SIZE, with
the five moments held in parallel arrays and every step vectorized
across the batch.  The batch partition is a constant of the
implementation, never of the worker count: threads only decide which
worker computes which batch, and batch accumulators are merged in a
fixed pairwise tree afterwards, so the reduction is bit-stable for any
thread count.

Per sample time the accumulator keeps sums (not averages) of the
observables, which makes merging associative; jump positions are kept
raw so they can be histogrammed with any binning later.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ParameterError
from .gaussian import GaussianState, OscillatorParams
from .jumps import (
    CONSTANT,
    MAX_STEP_PROBABILITY,
    JumpEvent,
    JumpModel,
    overlap_with_ground,
)
from .phasespace import state_coherence

__all__ = [
    "SimulationConfig",
    "Trajectory",
    "StateSnapshot",
    "EnsembleAccumulator",
    "ObservableSeries",
    "simulate_trajectory",
    "simulate_trajectories",
    "run_ensemble",
    "merge_accumulators",
    "ensemble_observables",
    "jump_histogram",
]

# Trajectories per vectorized batch.  Fixed: results must not depend on
# how the ensemble is partitioned, only the partition's wall time may.
_BATCH_SIZE = 1024


@dataclass(frozen=True)
class SimulationConfig:
    """Complete description of one stochastic-oscillator run."""

    omega1: float
    omega2: float
    nu: float
    model: str
    initial_state: GaussianState
    mass: float = 1.0
    hbar: float = 1.0
    initial_level: int = 1
    t_final: float = 30.0
    dt: float = 0.01
    sample_stride: int = 10
    n_trajectories: int = 30000
    master_seed: int = 123456789

    def __post_init__(self):
        # constructing the params validates omega/mass/hbar positivity
        self.level_params(1)
        self.level_params(2)
        JumpModel(self.model, self.nu)
        if self.initial_level not in (1, 2):
            raise ParameterError(f"initial_level must be 1 or 2, got {self.initial_level}")
        if not (self.dt > 0 and np.isfinite(self.dt)):
            raise ParameterError(f"dt must be positive, got {self.dt}")
        if not (self.t_final >= 0 and np.isfinite(self.t_final)):
            raise ParameterError(f"t_final must be nonnegative, got {self.t_final}")
        if self.n_trajectories < 1:
            raise ParameterError(f"n_trajectories must be >= 1, got {self.n_trajectories}")
        if self.sample_stride < 1:
            raise ParameterError(f"sample_stride must be >= 1, got {self.sample_stride}")
        if self.nu * self.dt > MAX_STEP_PROBABILITY:
            raise ParameterError(
                f"nu*dt = {self.nu * self.dt:.4g} exceeds {MAX_STEP_PROBABILITY}"
            )
        if self.master_seed < 0:
            raise ParameterError("master_seed must be nonnegative")
        n_steps = round(self.t_final / self.dt)
        if abs(n_steps * self.dt - self.t_final) > 1e-9 * max(1.0, self.t_final):
            raise ParameterError(
                f"t_final = {self.t_final} is not an integer number of dt = {self.dt} steps"
            )
        if n_steps % self.sample_stride != 0:
            raise ParameterError(
                f"step count {n_steps} is not a multiple of sample_stride = {self.sample_stride}"
            )

    def level_params(self, level: int) -> OscillatorParams:
        omega = self.omega1 if level == 1 else self.omega2
        return OscillatorParams(omega=omega, mass=self.mass, hbar=self.hbar)

    @property
    def jump_model(self) -> JumpModel:
        return JumpModel(self.model, self.nu)

    @property
    def n_steps(self) -> int:
        return round(self.t_final / self.dt)

    @property
    def n_samples(self) -> int:
        return self.n_steps // self.sample_stride + 1

    @property
    def sample_times(self) -> np.ndarray:
        return np.arange(0, self.n_steps + 1, self.sample_stride) * self.dt

    def with_overrides(self, **kwargs) -> "SimulationConfig":
        return replace(self, **kwargs)


@dataclass(frozen=True)
class Trajectory:
    """One stochastic realization, sampled every `sample_stride` steps.

    ``levels[k]`` is the level in force as the packet arrives at
    ``sample_times[k]``; a jump recorded exactly at a sample time takes
    effect just after it.
    """

    sample_times: np.ndarray
    states: tuple
    levels: np.ndarray
    jumps: tuple


@dataclass
class StateSnapshot:
    """Per-trajectory moments frozen at one shared sample time.

    ``moments`` columns are (mean_x, mean_p, var_x, var_p, cov_xp); row
    order is trajectory-index order.
    """

    time: float
    moments: np.ndarray
    levels: np.ndarray

    def states(self) -> list:
        return [GaussianState(*row) for row in self.moments]

    def merge(self, other: "StateSnapshot") -> "StateSnapshot":
        return StateSnapshot(
            time=self.time,
            moments=np.concatenate([self.moments, other.moments]),
            levels=np.concatenate([self.levels, other.levels]),
        )


@dataclass
class EnsembleAccumulator:
    """Mergeable per-sample-time sums of trajectory observables.

    Sums (never averages) are stored so that merging is plain addition;
    jump positions are stored raw per direction.  ``merge`` is
    commutative and, up to float rounding, associative; `run_ensemble`
    removes even the rounding ambiguity by always merging in a fixed
    pairwise tree.
    """

    sample_times: np.ndarray
    count: int
    sum_mean_x: np.ndarray
    sum_mean_p: np.ndarray
    sum_raw_x2: np.ndarray
    sum_raw_p2: np.ndarray
    sum_raw_xp: np.ndarray
    sum_energy: np.ndarray
    sum_coherence: np.ndarray
    sum_mean_x_sq: np.ndarray
    sum_mean_p_sq: np.ndarray
    jump_positions_12: np.ndarray
    jump_positions_21: np.ndarray
    snapshots: dict = field(default_factory=dict)

    _SUM_FIELDS = (
        "sum_mean_x", "sum_mean_p", "sum_raw_x2", "sum_raw_p2", "sum_raw_xp",
        "sum_energy", "sum_coherence", "sum_mean_x_sq", "sum_mean_p_sq",
    )

    def merge(self, other: "EnsembleAccumulator") -> "EnsembleAccumulator":
        if not np.array_equal(self.sample_times, other.sample_times):
            raise ParameterError("accumulators with different sample times cannot be merged")
        if set(self.snapshots) != set(other.snapshots):
            raise ParameterError("accumulators with different snapshot times cannot be merged")
        sums = {name: getattr(self, name) + getattr(other, name) for name in self._SUM_FIELDS}
        return EnsembleAccumulator(
            sample_times=self.sample_times,
            count=self.count + other.count,
            jump_positions_12=np.concatenate([self.jump_positions_12, other.jump_positions_12]),
            jump_positions_21=np.concatenate([self.jump_positions_21, other.jump_positions_21]),
            snapshots={k: self.snapshots[k].merge(other.snapshots[k]) for k in self.snapshots},
            **sums,
        )


def merge_accumulators(accumulators) -> EnsembleAccumulator:
    """Reduce accumulators pairwise in index order (fixed tree)."""
    accs = list(accumulators)
    if not accs:
        raise ParameterError("nothing to merge")
    while len(accs) > 1:
        nxt = []
        for i in range(0, len(accs) - 1, 2):
            nxt.append(accs[i].merge(accs[i + 1]))
        if len(accs) % 2:
            nxt.append(accs[-1])
        accs = nxt
    return accs[0]


def _trajectory_uniforms(master_seed: int, index: int, n_steps: int) -> np.ndarray:
    """The full per-step uniform stream owned by one trajectory.

    Counter-based Philox keyed by (master_seed, index): splittable,
    order-independent, and stable across runs and platforms.
    """
    seq = np.random.SeedSequence(master_seed, spawn_key=(index,))
    return np.random.Generator(np.random.Philox(seq)).random(n_steps)


class _LevelTables:
    """Per-level constants gathered by the kernel once per config."""

    def __init__(self, config: SimulationConfig):
        om = np.array([config.omega1, config.omega2])
        m, dt = config.mass, config.dt
        c, s = np.cos(om * dt), np.sin(om * dt)
        mw = m * om
        self.a11 = c
        self.a12 = s / mw
        self.a21 = -mw * s
        self.a22 = c
        self.omega_sq = om**2
        # ground-state position variance of the *other* level, indexed
        # by the current level: the jump target of level 1 is level 2
        self.target_var = (config.hbar / (2 * mw))[::-1].copy()


@dataclass
class _BatchResult:
    accumulator: EnsembleAccumulator
    rec_moments: np.ndarray | None = None   # (n_samples, 5, B)
    rec_levels: np.ndarray | None = None    # (n_samples, B)
    rec_events: list | None = None          # (step, local index, from level idx, mean_x)


def _simulate_batch(
    config: SimulationConfig,
    indices,
    snapshot_steps: dict,
    record: bool = False,
) -> _BatchResult:
    """Run a batch of trajectories in lockstep; the real kernel.

    Per step k: record the sample if due, evaluate each trajectory's
    jump probability from its start-of-step state, compare against its
    k-th uniform, switch the levels that fired, then apply the exact
    one-step rotation of the level now in force.
    """
    indices = np.asarray(indices, dtype=np.int64)
    nb = indices.size
    n_steps, stride = config.n_steps, config.sample_stride
    n_samples = config.n_samples
    m, hbar, nu, dt = config.mass, config.hbar, config.nu, config.dt
    tables = _LevelTables(config)
    constant_rate = config.model == CONSTANT
    nu_dt = nu * dt

    uniforms = np.empty((n_steps, nb))
    for j, idx in enumerate(indices):
        uniforms[:, j] = _trajectory_uniforms(config.master_seed, int(idx), n_steps)

    init = config.initial_state
    mx = np.full(nb, init.mean_x)
    mp = np.full(nb, init.mean_p)
    vx = np.full(nb, init.var_x)
    vp = np.full(nb, init.var_p)
    cv = np.full(nb, init.cov_xp)
    lvl = np.full(nb, config.initial_level - 1, dtype=np.int64)

    sums = {name: np.zeros(n_samples) for name in EnsembleAccumulator._SUM_FIELDS}
    jump_x = ([], [])  # positions of 1->2 and 2->1 events
    snapshots = {}
    rec_moments = np.empty((n_samples, 5, nb)) if record else None
    rec_levels = np.empty((n_samples, nb), dtype=np.int64) if record else None
    rec_events = [] if record else None

    def take_sample(s):
        raw_x2 = vx + mx * mx
        raw_p2 = vp + mp * mp
        sums["sum_mean_x"][s] = mx.sum()
        sums["sum_mean_p"][s] = mp.sum()
        sums["sum_raw_x2"][s] = raw_x2.sum()
        sums["sum_raw_p2"][s] = raw_p2.sum()
        sums["sum_raw_xp"][s] = (cv + mx * mp).sum()
        sums["sum_energy"][s] = (
            raw_p2 / (2 * m) + 0.5 * m * tables.omega_sq[lvl] * raw_x2
        ).sum()
        sums["sum_coherence"][s] = state_coherence(mp, vp, hbar).sum()
        sums["sum_mean_x_sq"][s] = (mx * mx).sum()
        sums["sum_mean_p_sq"][s] = (mp * mp).sum()
        if s in snapshot_steps:
            snapshots[s] = StateSnapshot(
                time=snapshot_steps[s],
                moments=np.stack([mx, mp, vx, vp, cv], axis=1),
                levels=lvl + 1,
            )
        if record:
            rec_moments[s] = np.stack([mx, mp, vx, vp, cv])
            rec_levels[s] = lvl + 1

    for k in range(n_steps):
        if k % stride == 0:
            take_sample(k // stride)
        if constant_rate:
            fired = uniforms[k] < nu_dt
        else:
            overlap = overlap_with_ground(mx, mp, vx, cv, tables.target_var[lvl], hbar)
            fired = uniforms[k] < nu_dt * overlap
        if fired.any():
            hit = np.nonzero(fired)[0]
            from_idx = lvl[hit]
            x_at = mx[hit]
            jump_x[0].append(x_at[from_idx == 0])
            jump_x[1].append(x_at[from_idx == 1])
            if record:
                rec_events.append((k, hit, from_idx.copy(), x_at.copy()))
            lvl[hit] ^= 1
        a11 = tables.a11[lvl]
        a12 = tables.a12[lvl]
        a21 = tables.a21[lvl]
        a22 = tables.a22[lvl]
        mx, mp = a11 * mx + a12 * mp, a21 * mx + a22 * mp
        vx, vp, cv = (
            a11 * a11 * vx + a12 * a12 * vp + 2 * a11 * a12 * cv,
            a21 * a21 * vx + a22 * a22 * vp + 2 * a21 * a22 * cv,
            a11 * a21 * vx + a12 * a22 * vp + (a11 * a22 + a12 * a21) * cv,
        )
    take_sample(n_samples - 1)

    for arr in (mx, mp, vx, vp, cv):
        bad = ~np.isfinite(arr)
        if bad.any():
            raise ArithmeticError(
                f"trajectory {int(indices[np.nonzero(bad)[0][0]])} produced non-finite moments"
            )

    acc = EnsembleAccumulator(
        sample_times=config.sample_times,
        count=nb,
        jump_positions_12=np.concatenate(jump_x[0]) if jump_x[0] else np.empty(0),
        jump_positions_21=np.concatenate(jump_x[1]) if jump_x[1] else np.empty(0),
        snapshots=snapshots,
        **sums,
    )
    return _BatchResult(acc, rec_moments, rec_levels, rec_events)


def simulate_trajectories(config: SimulationConfig, indices) -> list:
    """Simulate the listed trajectory indices, returning full Trajectory records."""
    indices = list(indices)
    if any(i < 0 for i in indices):
        raise ParameterError("trajectory indices must be nonnegative")
    res = _simulate_batch(config, indices, snapshot_steps={}, record=True)
    trajectories = []
    for j in range(len(indices)):
        events = []
        for (k, hit, from_idx, x_at) in res.rec_events:
            pos = np.nonzero(hit == j)[0]
            if pos.size:
                p = pos[0]
                events.append(
                    JumpEvent(
                        time=k * config.dt,
                        from_level=int(from_idx[p]) + 1,
                        to_level=2 - int(from_idx[p]),
                        mean_x_at_jump=float(x_at[p]),
                    )
                )
        states = tuple(GaussianState(*res.rec_moments[s, :, j]) for s in range(config.n_samples))
        trajectories.append(
            Trajectory(
                sample_times=config.sample_times,
                states=states,
                levels=res.rec_levels[:, j].copy(),
                jumps=tuple(events),
            )
        )
    return trajectories


def simulate_trajectory(config: SimulationConfig, trajectory_index: int) -> Trajectory:
    """Simulate a single trajectory, fully determined by (master_seed, index)."""
    return simulate_trajectories(config, [trajectory_index])[0]


def _snapshot_steps(config: SimulationConfig, snapshot_times) -> dict:
    steps = {}
    for t in snapshot_times:
        s = round(t / (config.dt * config.sample_stride))
        if s < 0 or s >= config.n_samples or abs(config.sample_times[s] - t) > 1e-9:
            raise ParameterError(
                f"snapshot time {t} is not one of the sample times in [0, {config.t_final}]"
            )
        steps[s] = config.sample_times[s]
    return steps


def run_ensemble(
    config: SimulationConfig,
    *,
    snapshot_times=(),
    n_threads: int = 1,
) -> EnsembleAccumulator:
    """Simulate all trajectories and reduce them into one accumulator.

    ``snapshot_times`` (sample-aligned) request full per-trajectory
    moment snapshots for phase-space reconstruction.  ``n_threads``
    affects wall time only: the batch partition and the merge tree are
    fixed, so the result is bit-identical for any worker count.
    """
    snap = _snapshot_steps(config, snapshot_times)
    n = config.n_trajectories
    ranges = [np.arange(lo, min(lo + _BATCH_SIZE, n)) for lo in range(0, n, _BATCH_SIZE)]

    def worker(idx_range):
        return _simulate_batch(config, idx_range, snapshot_steps=snap).accumulator

    if n_threads <= 1 or len(ranges) == 1:
        parts = [worker(r) for r in ranges]
    else:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            parts = list(pool.map(worker, ranges))
    return merge_accumulators(parts)


@dataclass(frozen=True)
class ObservableSeries:
    """Ensemble-averaged time series derived from an accumulator.

    ``var_x``/``var_p`` are mixture variances (averaged raw second
    moment minus squared averaged mean): the spread of the ensemble
    density matrix, not the average packet width.  The per-trajectory
    average widths are kept as ``mean_var_x``/``mean_var_p`` for
    diagnostics.
    """

    time: np.ndarray
    mean_x: np.ndarray
    mean_p: np.ndarray
    var_x: np.ndarray
    var_p: np.ndarray
    energy: np.ndarray
    coherence: np.ndarray
    mean_var_x: np.ndarray
    mean_var_p: np.ndarray

    COLUMNS = ("time", "mean_x", "mean_p", "var_x", "var_p", "energy", "coherence")

    def columns(self):
        return [getattr(self, name) for name in self.COLUMNS]


def ensemble_observables(acc: EnsembleAccumulator) -> ObservableSeries:
    """Averages and mixture variances from accumulated sums."""
    if acc.count < 1:
        raise ParameterError("empty accumulator")
    n = acc.count
    mean_x = acc.sum_mean_x / n
    mean_p = acc.sum_mean_p / n
    raw_x2 = acc.sum_raw_x2 / n
    raw_p2 = acc.sum_raw_p2 / n
    return ObservableSeries(
        time=acc.sample_times,
        mean_x=mean_x,
        mean_p=mean_p,
        var_x=raw_x2 - mean_x**2,
        var_p=raw_p2 - mean_p**2,
        energy=acc.sum_energy / n,
        coherence=acc.sum_coherence / n,
        mean_var_x=raw_x2 - acc.sum_mean_x_sq / n,
        mean_var_p=raw_p2 - acc.sum_mean_p_sq / n,
    )


def jump_histogram(acc: EnsembleAccumulator, direction: str, bins):
    """Histogram of packet-centre positions at jump instants.

    ``direction`` is ``"1to2"`` or ``"2to1"``; ``bins`` is anything
    np.histogram accepts, but explicit edges must cover the observed
    positions so no event is silently dropped.
    """
    if direction == "1to2":
        data = acc.jump_positions_12
    elif direction == "2to1":
        data = acc.jump_positions_21
    else:
        raise ParameterError(f"direction must be '1to2' or '2to1', got {direction!r}")
    edges = np.asarray(bins, dtype=float) if np.ndim(bins) == 1 else bins
    if isinstance(edges, np.ndarray) and data.size:
        if edges[0] > data.min() or edges[-1] < data.max():
            raise ParameterError(
                f"bins [{edges[0]}, {edges[-1]}] do not cover the observed "
                f"jump positions [{data.min():.4g}, {data.max():.4g}]"
            )
    counts, out_edges = np.histogram(data, bins=edges if isinstance(edges, np.ndarray) else bins)
    return counts, out_edges
