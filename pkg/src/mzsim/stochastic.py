"""Homodyne stochastic-master-equation trajectories for continuous monitoring.

A monitored qubit with dephasing rate ``Gamma`` (rad/s) is unraveled with the
measured operator ``A = sigma_z / sqrt(2)``, so that ``Gamma D[A]`` equals the
Lindblad channel ``sqrt(Gamma/2) sigma_z`` used by the deterministic engine.
Each step is a half step of the unmonitored Lindblad propagator, a positive
measurement update and another half step. The measurement update draws the
record from its exact law and applies a Kraus operator, so conditioned states
stay positive and their average over records is exactly ``exp(Gamma D[A] dt)``.
To first order in ``dt`` the update is the Euler-Maruyama increment
``Gamma D[A] rho dt + sqrt(Gamma) H[A] rho dW``.

Every trajectory draws its noise from its own stream
``SeedSequence(seed, spawn_key=(index,))``; ensembles are processed in chunks
of fixed size and reduced in index order, so results do not depend on the
number of worker threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from . import device as dm
from . import lindblad as lb
from .parallel import pmap
from .qlinalg import ShapeError, hermiticity_error

TWO_PI = 2 * math.pi
DEFAULT_DT = 1e-10
CHUNK = 250


class InstabilityError(RuntimeError):
    pass


class AlignmentError(ValueError):
    pass


@dataclass(frozen=True)
class SmeConfig:
    """Integration settings for stochastic runs.

    ``measured_operator`` and ``rate`` (rad/s) are used by :func:`sme_step`;
    schedule-driven runs derive them from each stage's measurements instead.
    """

    measured_operator: np.ndarray | None = None
    rate: float = 0.0
    dt: float = DEFAULT_DT
    n_trajectories: int = 1
    seed: int = 0
    output_dt: float = lb.DEFAULT_OUTPUT_DT
    store_states: bool = False

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.rate < 0:
            raise ValueError("measurement rate must be non-negative")
        if self.n_trajectories < 1:
            raise ValueError("need at least one trajectory")
        if self.measured_operator is not None and hermiticity_error(np.asarray(self.measured_operator)) > 1e-12:
            raise ValueError("measured operator must be Hermitian")
        ratio = self.output_dt / self.dt
        if abs(ratio - round(ratio)) > 1e-6 or round(ratio) < 1:
            raise ValueError("output_dt must be a whole multiple of dt")


@dataclass
class TrajectoryRecord:
    """Measurement record ``I(t)`` of one trajectory.

    ``signal[k, m]`` is the record of channel ``m`` averaged over the step
    starting at ``times[k]``. ``states`` (optional) are snapshots on
    ``state_times``.
    """

    times: np.ndarray
    signal: np.ndarray
    seed: int
    index: int = 0
    state_times: np.ndarray | None = None
    states: np.ndarray | None = None


@dataclass
class EnsembleResult:
    """Trajectory-averaged states plus per-trajectory final states."""

    trace: lb.EvolutionTrace
    final_states: np.ndarray
    n_trajectories: int
    records: list[TrajectoryRecord] = field(default_factory=list)


def monitored_operator(basis: dm.SectorBasis, qubit: int) -> np.ndarray:
    return dm.sigma_z(basis, qubit) / math.sqrt(2.0)


class _Measurement:
    """Exact positive update for continuous monitoring of a Hermitian ``A`` over ``dt``.

    The record increment ``dY`` is drawn from its exact law, a Born-weighted
    mixture of ``N(2 sqrt(Gamma) a dt, dt)`` over the eigenvalues ``a``, and
    the state is updated with ``K = exp(sqrt(Gamma) A dY - Gamma A^2 dt)``.
    Averaged over ``dY`` this is exactly ``exp(Gamma D[A] dt)``.
    """

    def __init__(self, a: np.ndarray, rate: float, dt: float):
        a = np.asarray(a, dtype=complex)
        self.a = a
        self.rate = rate
        self.dt = dt
        self.diagonal = not np.any(a - np.diag(np.diag(a)))
        if self.diagonal:
            self.evals, self.vecs = np.real(np.diag(a)), None
        else:
            self.evals, self.vecs = np.linalg.eigh(a)

    def __call__(self, rho: np.ndarray, xi: np.ndarray, u: np.ndarray | None):
        """Return the updated batch, ``<A>`` before the update and the innovation ``dW``."""
        dt, s = self.dt, math.sqrt(self.rate)
        local = rho if self.diagonal else self.vecs.conj().T @ rho @ self.vecs
        probs = np.clip(np.real(np.einsum("nii->ni", local)), 0.0, None)
        mean = probs @ self.evals / probs.sum(axis=1)
        if u is None:
            dy = 2 * s * mean * dt + math.sqrt(dt) * xi
        else:
            cdf = np.cumsum(probs, axis=1)
            k = np.minimum((cdf < (u * cdf[:, -1])[:, None]).sum(axis=1), len(self.evals) - 1)
            dy = 2 * s * self.evals[k] * dt + math.sqrt(dt) * xi
        dw = dy - 2 * s * mean * dt
        if s == 0:
            return rho, mean, dw
        expo = s * dy[:, None] * self.evals[None, :] - self.rate * dt * self.evals[None, :] ** 2
        expo -= expo.max(axis=1, keepdims=True)
        k = np.exp(expo)
        local = local * k[:, :, None] * k[:, None, :]
        out = local if self.diagonal else self.vecs @ local @ self.vecs.conj().T
        return out, mean, dw


class _Stepper:
    """One-step map for a constant generator, Strang-split around the measurement.

    ``drift`` and ``half`` are exact propagators of the unmonitored Lindblad
    generator over ``dt`` and ``dt/2``.
    """

    def __init__(self, h, c_ops, channels: Sequence[tuple[np.ndarray, float]], dt: float):
        self.d = h.shape[0]
        self.dt = dt
        self.meas = [_Measurement(a, r, dt) for a, r in channels]
        lv = lb.liouvillian(h, c_ops)
        self.half_t = expm(lv * (dt / 2)).T
        self.full_t = self.half_t @ self.half_t

    def _apply(self, prop_t, rho):
        n, d = rho.shape[0], self.d
        return (rho.reshape(n, d * d) @ prop_t).reshape(n, d, d)

    def half(self, rho):
        return self._apply(self.half_t, rho)

    def full(self, rho):
        return self._apply(self.full_t, rho)

    def measure(self, rho, xi, u):
        """Apply every monitored channel; returns the state and the record ``I``."""
        n = rho.shape[0]
        signal = np.empty((n, len(self.meas)))
        for m, op in enumerate(self.meas):
            rho, mean, dw = op(rho, xi[:, m], None if u is None else u[:, m])
            signal[:, m] = mean + dw / self.dt
        rho = 0.5 * (rho + rho.conj().transpose(0, 2, 1))
        tr = np.real(np.einsum("nii->n", rho))
        if not np.all(np.isfinite(tr)) or np.any(tr <= 0):
            raise InstabilityError("conditioned state lost its trace; reduce dt")
        return rho / tr[:, None, None], signal

    def step(self, rho, xi, u=None):
        rho, signal = self.measure(self.half(rho), xi, u)
        return self.half(rho), signal


def sme_step(rho: lb.DensityOperator, h: np.ndarray, c_ops, cfg: SmeConfig, noise: float, branch: float | None = None):
    """One step of the conditioned evolution; returns the new state and ``I dt``.

    ``noise`` is the Gaussian increment ``dW`` (variance ``dt``). Without
    ``branch`` the record is ``dY = 2 sqrt(Gamma) <A> dt + dW``. A uniform
    ``branch`` in ``[0, 1)`` instead selects the eigenvalue of ``A`` whose
    Gaussian the record is drawn from, which is the exact record law.
    """
    if cfg.measured_operator is None:
        raise ValueError("config has no measured operator")
    a = np.asarray(cfg.measured_operator, dtype=complex)
    if a.shape != rho.matrix.shape:
        raise ShapeError("measured operator does not match the state")
    step = _Stepper(h, c_ops, [(a, cfg.rate)], cfg.dt)
    u = None if branch is None else np.array([[branch]])
    new, signal = step.step(rho.matrix[None], np.array([[noise / math.sqrt(cfg.dt)]]), u)
    return lb.DensityOperator(rho.basis, new[0]), float(signal[0, 0] * cfg.dt)


def _steps(duration: float, dt: float) -> int:
    n = round(duration / dt)
    if abs(n * dt - duration) > 1e-6 * dt:
        raise ValueError(f"stage duration {duration} is not a whole number of steps {dt}")
    return n


@dataclass(frozen=True)
class _StagePlan:
    stepper: _Stepper
    n_steps: int
    n_channels: int


def _plan(device, schedule: dm.Schedule, basis, dt: float) -> list[_StagePlan]:
    plans = []
    for stage in schedule.stages:
        h = dm.stage_hamiltonian(device, stage, basis, schedule.frame)
        c_ops = dm.collapse_operators(device, replace(stage, measurements=()), basis)
        channels = [(monitored_operator(basis, device.index(m.target)), TWO_PI * m.gamma_m) for m in stage.measurements]
        plans.append(_StagePlan(_Stepper(h, c_ops, channels, dt), _steps(stage.duration, dt), len(channels)))
    return plans


def _stream(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def _run_chunk(plans, rho0: np.ndarray, cfg: SmeConfig, indices, obs_ops, keep_records: bool):
    n = len(indices)
    rngs = [_stream(cfg.seed, i) for i in indices]
    every = round(cfg.output_dt / cfg.dt)
    rho = np.broadcast_to(rho0, (n,) + rho0.shape).copy()
    snaps = [rho.copy()] if cfg.store_states else None
    sums, signals = [rho.sum(axis=0)], []
    obs = [np.real(np.einsum("nij,oji->no", rho, obs_ops))] if obs_ops is not None else None
    k = 0
    for plan in plans:
        st = plan.stepper
        draws = [(g.standard_normal((plan.n_steps, plan.n_channels)), g.random((plan.n_steps, plan.n_channels))) for g in rngs]
        xi = np.stack([x for x, _ in draws])
        uu = np.stack([v for _, v in draws])
        sig = np.empty((n, plan.n_steps, plan.n_channels))
        # inner state: half a drift step ahead of the grid state
        inner = st.half(rho)
        for s in range(plan.n_steps):
            measured, sig[:, s] = st.measure(inner, xi[:, s], uu[:, s])
            k += 1
            last = s == plan.n_steps - 1
            if last or k % every == 0:
                rho = st.half(measured)
                if k % every == 0:
                    sums.append(rho.sum(axis=0))
                    if obs is not None:
                        obs.append(np.real(np.einsum("nij,oji->no", rho, obs_ops)))
                    if cfg.store_states:
                        snaps.append(rho.copy())
            if not last:
                inner = st.full(measured)
        signals.append(sig)
    obs_arr = np.stack(obs, axis=1) if obs is not None else None  # (n, T, o)
    records = []
    if keep_records:
        for j, i in enumerate(indices):
            sig = np.concatenate([s[j] for s in signals], axis=0) if signals else np.zeros((0, 0))
            states = np.stack([x[j] for x in snaps]) if cfg.store_states else None
            records.append(TrajectoryRecord(np.arange(len(sig)) * cfg.dt, sig, cfg.seed, i, None, states))
    return np.stack(sums), obs_arr, rho, records


def run_trajectories(
    device: dm.DeviceModel,
    schedule: dm.Schedule,
    initial,
    basis: dm.SectorBasis,
    cfg: SmeConfig,
    threads: int | None = None,
    keep_records: bool = False,
) -> EnsembleResult:
    """Sample ``cfg.n_trajectories`` conditioned runs and average them.

    The returned trace holds the mean state on the output grid, the mean
    ``n_<label>`` observables and their standard errors.
    """
    rho0 = lb.initial_state(basis, initial).matrix
    plans = _plan(device, schedule, basis, cfg.dt)
    named = lb.number_observables(device, basis)
    obs_ops = np.stack(list(named.values()))
    idx = list(range(cfg.n_trajectories))
    chunks = [idx[i : i + CHUNK] for i in range(0, len(idx), CHUNK)]
    parts = pmap(lambda c: _run_chunk(plans, rho0, cfg, c, obs_ops, keep_records), chunks, threads)
    total = parts[0][0].copy()
    for p in parts[1:]:
        total += p[0]
    obs_all = np.concatenate([p[1] for p in parts], axis=0)
    n = cfg.n_trajectories
    mean_states = total / n
    times = _output_times(schedule, cfg)
    means = obs_all.mean(axis=0)
    errs = obs_all.std(axis=0, ddof=1) / math.sqrt(n) if n > 1 else np.zeros_like(means)
    names = list(named)
    trace = lb.EvolutionTrace(
        basis,
        times,
        mean_states,
        {nm: means[:, o] for o, nm in enumerate(names)},
        _stage_starts(schedule),
        {nm: errs[:, o] for o, nm in enumerate(names)},
    )
    finals = np.concatenate([p[2] for p in parts], axis=0)
    records = [r for p in parts for r in p[3]]
    return EnsembleResult(trace, finals, n, records)


def _output_times(schedule, cfg) -> np.ndarray:
    total = sum(_steps(s.duration, cfg.dt) for s in schedule.stages)
    every = round(cfg.output_dt / cfg.dt)
    return np.arange(total // every + 1) * every * cfg.dt


def _stage_starts(schedule) -> list[float]:
    return list(np.cumsum([0.0] + [s.duration for s in schedule.stages[:-1]]))


def sample_trajectory(device, schedule: dm.Schedule, initial, cfg: SmeConfig, basis: dm.SectorBasis | None = None, index: int = 0) -> TrajectoryRecord:
    """Single conditioned run with the stream of trajectory ``index``."""
    basis = basis or dm.sector_basis(device.n_qubits, 1)
    rho0 = lb.initial_state(basis, initial).matrix
    plans = _plan(device, schedule, basis, cfg.dt)
    _, _, _, records = _run_chunk(plans, rho0, cfg, [index], None, True)
    rec = records[0]
    if cfg.store_states:
        rec.state_times = _output_times(schedule, cfg)
    return rec


def ensemble_average(records: Sequence[TrajectoryRecord], basis: dm.SectorBasis, observables=None) -> lb.EvolutionTrace:
    """Mean state and observable standard errors over records that kept their states."""
    if not records:
        raise ValueError("need at least one record")
    first = records[0]
    for r in records:
        if r.states is None:
            raise AlignmentError("records carry no state snapshots")
        if r.state_times is None or first.state_times is None or not np.array_equal(r.state_times, first.state_times):
            raise AlignmentError("records use different time grids")
    stack = np.stack([r.states for r in records])
    obs, errs = {}, {}
    for name, op in (observables or {}).items():
        vals = np.real(np.einsum("ntij,ji->nt", stack, op))
        obs[name] = vals.mean(axis=0)
        errs[name] = vals.std(axis=0, ddof=1) / math.sqrt(len(records)) if len(records) > 1 else np.zeros(vals.shape[1])
    return lb.EvolutionTrace(basis, first.state_times, stack.mean(axis=0), obs, [0.0], errs)
