"""Working-point frequency alignment against a mock device with Z crosstalk.

The mock device realizes detunings ``M @ a + s`` on the free qubits, where
``a`` are the commanded offsets, ``M`` a hidden crosstalk matrix and ``s``
hidden static shifts. Its populations play the experimental data; the ideal
lattice plays the simulation. Each cost term compares one qubit's population
at the time its simulated population peaks, and Nelder-Mead tunes ``a``.
The exact answer is ``a* = -M^-1 s``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .. import device as dm
from .. import lindblad as lb
from ..presets import MZ4_DECOUPLE_Q0, MZ4_DECOUPLE_Q3, WORKING_FREQUENCY, mz4_device, mz12_device
from .nelder_mead import NelderMeadResult, nelder_mead

MHZ = 1e6


class CostKind(enum.Enum):
    MZ4_STAGE1 = "mz4_stage1"
    MZ4_STAGE4 = "mz4_stage4"
    MZ12 = "mz12"


@dataclass(frozen=True)
class _Setup:
    free: tuple[str, ...]
    observed: tuple[str, ...]
    excited: tuple[str, ...]
    fixed: dict
    duration: float
    max_excitations: int


_SETUPS = {
    CostKind.MZ4_STAGE1: _Setup(("Q1", "Q2"), ("Q1", "Q2"), ("Q0",), {"Q3": MZ4_DECOUPLE_Q3}, 100e-9, 1),
    CostKind.MZ4_STAGE4: _Setup(("Q3",), ("Q3",), ("Q1", "Q2"), {"Q0": MZ4_DECOUPLE_Q0}, 100e-9, 2),
    CostKind.MZ12: _Setup(("Q4", "Q8", "Q15"), ("Q4", "Q8", "Q15"), ("Q0",), {}, 200e-9, 1),
}


def default_device(kind: CostKind) -> dm.DeviceModel:
    return mz12_device() if kind is CostKind.MZ12 else mz4_device()


def random_crosstalk(n: int, rng: np.random.Generator, max_offdiag: float = 0.05) -> np.ndarray:
    m = rng.uniform(-max_offdiag, max_offdiag, size=(n, n))
    np.fill_diagonal(m, 1.0)
    return m


@dataclass
class AlignmentProblem:
    """Mock alignment task for one cost function.

    ``crosstalk`` and ``injected`` (Hz) are hidden from the optimizer and
    act on the free qubits of ``kind``. ``commanded_frequencies`` maps every
    qubit to its nominal working-point frequency.
    """

    kind: CostKind
    crosstalk: np.ndarray | None = None
    injected: np.ndarray | None = None
    budget: int = 500
    device: dm.DeviceModel | None = None
    initial_step: float = 0.5 * MHZ
    options: lb.SolverOptions = lb.SolverOptions()

    def __post_init__(self):
        self.kind = CostKind(self.kind)
        n = len(self.free_qubits)
        self.device = self.device or default_device(self.kind)
        self.crosstalk = np.eye(n) if self.crosstalk is None else np.asarray(self.crosstalk, dtype=float)
        self.injected = np.zeros(n) if self.injected is None else np.asarray(self.injected, dtype=float)
        m = self.crosstalk
        if m.shape != (n, n) or self.injected.shape != (n,):
            raise ValueError(f"{self.kind.name} has {n} free qubits")
        off = np.abs(m).sum(axis=1) - np.abs(np.diag(m))
        if np.any(np.abs(np.diag(m)) <= off):
            raise ValueError("crosstalk matrix must be diagonally dominant")

    @property
    def setup(self) -> _Setup:
        return _SETUPS[self.kind]

    @property
    def free_qubits(self) -> tuple[str, ...]:
        return _SETUPS[self.kind].free

    @cached_property
    def basis(self) -> dm.SectorBasis:
        return dm.sector_basis(self.device.n_qubits, self.setup.max_excitations)

    @property
    def commanded_frequencies(self) -> tuple[float, ...]:
        f = [WORKING_FREQUENCY] * self.device.n_qubits
        for lab, v in self.setup.fixed.items():
            f[self.device.index(lab)] = v
        return tuple(f)

    @property
    def target_offsets(self) -> np.ndarray:
        """Commanded offsets (Hz) that cancel the hidden shifts exactly."""
        return -np.linalg.solve(self.crosstalk, self.injected)

    def _initial(self) -> str:
        bits = ["0"] * self.device.n_qubits
        for q in self.setup.excited:
            bits[self.device.index(q)] = "1"
        return "".join(bits)

    def _populations(self, detunings: np.ndarray) -> np.ndarray:
        f = list(self.commanded_frequencies)
        for q, d in zip(self.free_qubits, detunings):
            f[self.device.index(q)] += d
        sched = dm.Schedule([dm.Stage(self.setup.duration, f)], WORKING_FREQUENCY)
        tr = lb.run_schedule(self.device, sched, self._initial(), self.basis, self.options)
        cols = [self.device.index(q) for q in self.setup.observed]
        return tr.populations()[:, cols]

    @cached_property
    def _reference(self) -> tuple[np.ndarray, np.ndarray]:
        pops = self._populations(np.zeros(len(self.free_qubits)))
        peaks = np.argmax(pops, axis=0)
        return peaks, pops[peaks, np.arange(pops.shape[1])]

    def measured(self, offsets: np.ndarray) -> np.ndarray:
        """Mock-device populations at the reference peak times for commanded ``offsets`` (Hz)."""
        peaks, _ = self._reference
        pops = self._populations(self.crosstalk @ np.asarray(offsets, dtype=float) + self.injected)
        return pops[peaks, np.arange(pops.shape[1])]

    def cost(self, offsets: np.ndarray) -> float:
        _, sim = self._reference
        return float(np.abs(self.measured(offsets) - sim).sum())


@dataclass
class AlignmentResult:
    offsets: np.ndarray
    cost: float
    initial_cost: float
    evaluations: int
    optimizer: NelderMeadResult = field(repr=False, default=None)


def align_frequencies(problem: AlignmentProblem, start=None) -> AlignmentResult:
    """Nelder-Mead over commanded offsets, working in MHz internally."""
    x0 = np.zeros(len(problem.free_qubits)) if start is None else np.asarray(start, dtype=float) / MHZ
    res = nelder_mead(
        lambda x: problem.cost(x * MHZ),
        x0,
        budget=problem.budget,
        step=problem.initial_step / MHZ,
    )
    return AlignmentResult(res.x * MHZ, res.fun, res.trace[0][1], res.n_evals, res)
