"""Lindblad master-equation evolution over piecewise-constant schedules."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import device as dm
from .ode import dopri5
from .qlinalg import ShapeError, hermiticity_error

DEFAULT_OUTPUT_DT = 1e-9
DEFAULT_RTOL = 1e-8
DEFAULT_ATOL = 1e-10
TRACE_GUARD = 1e-7


class IntegrationError(RuntimeError):
    pass


class ConsistencyError(ValueError):
    pass


@dataclass(frozen=True)
class DensityOperator:
    basis: dm.SectorBasis
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (self.basis.dim, self.basis.dim):
            raise ShapeError(f"matrix shape {m.shape} does not match basis dimension {self.basis.dim}")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_bits(cls, basis: dm.SectorBasis, bits: str) -> "DensityOperator":
        m = np.zeros((basis.dim, basis.dim), dtype=complex)
        i = basis.index(bits)
        m[i, i] = 1.0
        return cls(basis, m)

    @classmethod
    def from_ket(cls, basis: dm.SectorBasis, amplitudes: Mapping[str, complex]) -> "DensityOperator":
        v = np.zeros(basis.dim, dtype=complex)
        for bits, a in amplitudes.items():
            v[basis.index(bits)] = a
        v /= np.linalg.norm(v)
        return cls(basis, np.outer(v, v.conj()))

    def validate(self, tol: float = 1e-9) -> None:
        m = self.matrix
        if hermiticity_error(m) > tol:
            raise ConsistencyError("density operator is not Hermitian")
        if abs(np.trace(m) - 1) > tol:
            raise ConsistencyError(f"density operator trace {np.trace(m).real:.12f} differs from 1")
        if np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0] < -tol:
            raise ConsistencyError("density operator has negative eigenvalues")


@dataclass
class EvolutionTrace:
    """Snapshots of a run on a common time grid.

    ``states`` has shape ``(len(times), dim, dim)``; ``observables`` maps a
    name to a real series aligned with ``times``. ``errors`` holds standard
    errors of the observables for trajectory averages and is empty otherwise.
    """

    basis: dm.SectorBasis
    times: np.ndarray
    states: np.ndarray
    observables: dict[str, np.ndarray] = field(default_factory=dict)
    stage_starts: list[float] = field(default_factory=list)
    errors: dict[str, np.ndarray] = field(default_factory=dict)

    def state(self, k: int) -> DensityOperator:
        return DensityOperator(self.basis, self.states[k])

    @property
    def final(self) -> DensityOperator:
        return self.state(-1)

    def populations(self) -> np.ndarray:
        """Per-qubit excitation ``<n_i>``, shape ``(len(times), n_qubits)``."""
        diag = np.real(np.einsum("tii->ti", self.states))
        return diag @ self.basis.occupations

    def at(self, t: float) -> int:
        """Index of the snapshot nearest to time ``t``."""
        return int(np.argmin(np.abs(self.times - t)))


def lindblad_rhs(h: np.ndarray, c_ops: Sequence[np.ndarray], rho: np.ndarray) -> np.ndarray:
    """``-i[H, rho] + sum_k (C rho C^dag - {C^dag C, rho}/2)`` with H in rad/s."""
    d = rho.shape[0]
    if h.shape != (d, d) or any(c.shape != (d, d) for c in c_ops):
        raise ShapeError("operator dimensions do not match rho")
    out = -1j * (h @ rho - rho @ h)
    for c in c_ops:
        cd = c.conj().T
        cdc = cd @ c
        out += c @ rho @ cd - 0.5 * (cdc @ rho + rho @ cdc)
    return out


def liouvillian(h: np.ndarray, c_ops: Sequence[np.ndarray]) -> np.ndarray:
    """Matrix of the Lindblad generator acting on row-major ``rho.ravel()``.

    Uses ``vec(A X B) = (A kron B^T) vec(X)`` for row-major vectorization.
    """
    d = h.shape[0]
    eye = np.eye(d)
    heff = h - 0.5j * sum((c.conj().T @ c for c in c_ops), np.zeros_like(h))
    lv = -1j * (np.kron(heff, eye) - np.kron(eye, heff.conj()))
    for c in c_ops:
        lv += np.kron(c, c.conj())
    return lv


def expectation(rho: DensityOperator | np.ndarray, op: np.ndarray) -> float:
    m = rho.matrix if isinstance(rho, DensityOperator) else np.asarray(rho)
    if op.shape != m.shape:
        raise ShapeError("operator and state dimensions differ")
    val = np.einsum("ij,ji->", m, op)
    if abs(val.imag) > 1e-6:
        raise ConsistencyError(f"expectation has imaginary part {val.imag:.3e}")
    return float(val.real)


def output_grid(duration: float, output_dt: float) -> np.ndarray:
    if duration == 0:
        return np.zeros(1)
    n = int(np.floor(duration / output_dt + 1e-9))
    t = output_dt * np.arange(n + 1)
    if duration - t[-1] > 1e-9 * output_dt:
        t = np.append(t, duration)
    else:
        t[-1] = duration
    return t


def evolve_stage(
    h: np.ndarray,
    c_ops: Sequence[np.ndarray],
    rho0: DensityOperator,
    duration: float,
    dt_max: float | None = None,
    output_dt: float = DEFAULT_OUTPUT_DT,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    observables: Mapping[str, np.ndarray] | None = None,
) -> EvolutionTrace:
    """Integrate one constant-generator stage from ``rho0`` for ``duration`` seconds.

    Snapshots are taken every ``output_dt`` (plus the end point). The final
    state is renormalized when its trace drifted by less than ``1e-7``;
    larger drift raises :class:`IntegrationError`.
    """
    if duration < 0:
        raise ValueError("duration must be non-negative")
    d = rho0.basis.dim
    if h.shape != (d, d):
        raise ShapeError("Hamiltonian does not match the state dimension")
    times = output_grid(duration, output_dt)
    if len(times) == 1:
        states = rho0.matrix[None].copy()
    else:
        lv = liouvillian(h, c_ops)
        ys, _ = dopri5(lambda t, y: lv @ y, rho0.matrix.ravel(), times, rtol=rtol, atol=atol, h_max=dt_max)
        states = ys.reshape(len(times), d, d)
        states = 0.5 * (states + states.conj().transpose(0, 2, 1))
        tr = np.trace(states[-1]).real
        if abs(tr - 1) > TRACE_GUARD:
            raise IntegrationError(f"trace drifted to {tr:.10f} during the stage")
        states[-1] /= tr
    obs = {}
    for name, op in (observables or {}).items():
        obs[name] = np.real(np.einsum("tij,ji->t", states, op))
    return EvolutionTrace(rho0.basis, times, states, obs, [0.0])


@dataclass(frozen=True)
class SolverOptions:
    output_dt: float = DEFAULT_OUTPUT_DT
    rtol: float = DEFAULT_RTOL
    atol: float = DEFAULT_ATOL
    dt_max: float | None = None


def initial_state(basis: dm.SectorBasis, initial) -> DensityOperator:
    if isinstance(initial, DensityOperator):
        if initial.basis != basis:
            raise ShapeError("initial state uses a different basis")
        return initial
    if isinstance(initial, str):
        return DensityOperator.from_bits(basis, initial)
    return DensityOperator(basis, np.asarray(initial))


def number_observables(device: dm.DeviceModel, basis: dm.SectorBasis) -> dict[str, np.ndarray]:
    return {f"n_{lab}": dm.number_operator(basis, i) for i, lab in enumerate(device.labels)}


def run_schedule(
    device: dm.DeviceModel,
    schedule: dm.Schedule,
    initial,
    basis: dm.SectorBasis,
    options: SolverOptions = SolverOptions(),
) -> EvolutionTrace:
    """Evolve through all stages, handing each final state to the next stage.

    ``initial`` is an occupation bitstring such as ``"1000"`` or a
    :class:`DensityOperator`. Observables ``n_<label>`` are recorded for every
    qubit.
    """
    rho = initial_state(basis, initial)
    obs_ops = number_observables(device, basis)
    t0 = 0.0
    times, states, starts = [], [], []
    for k, stage in enumerate(schedule.stages):
        h = dm.stage_hamiltonian(device, stage, basis, schedule.frame)
        c_ops = dm.collapse_operators(device, stage, basis)
        tr = evolve_stage(h, c_ops, rho, stage.duration, options.dt_max, options.output_dt, options.rtol, options.atol)
        skip = 0 if k == 0 else 1
        times.append(tr.times[skip:] + t0)
        states.append(tr.states[skip:])
        starts.append(t0)
        t0 += stage.duration
        rho = tr.final
    all_states = np.concatenate(states)
    obs = {name: np.real(np.einsum("tij,ji->t", all_states, op)) for name, op in obs_ops.items()}
    return EvolutionTrace(basis, np.concatenate(times), all_states, obs, starts)
