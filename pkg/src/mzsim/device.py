"""Qubit-lattice data model and Hamiltonian / collapse-operator builders.

Frequencies in the data model are ordinary frequencies in Hz (the numbers
quoted as ``omega/2pi``). Every matrix returned by a builder is in angular
units (rad/s) so that ``-i[H, rho]`` needs no further scaling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Mapping, Sequence

import numpy as np

from .qlinalg import ShapeError, kron_all
from .readout import ReadoutParams

TWO_PI = 2 * math.pi
BOSE_HUBBARD_MAX_DIM = 4096


class SectorError(ValueError):
    """A state lies outside the excitation sector being simulated."""


@dataclass(frozen=True)
class QubitSpec:
    """One transmon. ``t1``/``tphi`` of ``None`` mean no decay / no dephasing."""

    label: str
    idle_frequency: float
    anharmonicity: float = -220e6
    t1: float | None = None
    tphi: float | None = None

    def __post_init__(self):
        if not 1e9 < self.idle_frequency < 20e9:
            raise ValueError(f"{self.label}: idle frequency {self.idle_frequency} Hz outside (1, 20) GHz")
        for name in ("t1", "tphi"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ValueError(f"{self.label}: {name} must be positive, got {v}")


@dataclass(frozen=True)
class Coupling:
    a: str
    b: str
    j: float

    def __post_init__(self):
        if self.a == self.b:
            raise ValueError(f"self-coupling on {self.a}")


@dataclass(frozen=True)
class DeviceModel:
    qubits: tuple[QubitSpec, ...]
    couplings: tuple[Coupling, ...] = ()
    readout: Mapping[str, ReadoutParams] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(self.qubits))
        object.__setattr__(self, "couplings", tuple(self.couplings))
        labels = self.labels
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate qubit labels")
        seen = set()
        for c in self.couplings:
            if c.a not in labels or c.b not in labels:
                raise ValueError(f"coupling {c.a}-{c.b} references an unknown qubit")
            key = frozenset((c.a, c.b))
            if key in seen:
                raise ValueError(f"duplicate coupling {c.a}-{c.b}")
            seen.add(key)
        for k in self.readout:
            if k not in labels:
                raise ValueError(f"readout parameters for unknown qubit {k}")

    @property
    def labels(self) -> list[str]:
        return [q.label for q in self.qubits]

    @property
    def n_qubits(self) -> int:
        return len(self.qubits)

    def index(self, qubit: int | str) -> int:
        if isinstance(qubit, str):
            try:
                return self.labels.index(qubit)
            except ValueError:
                raise KeyError(f"unknown qubit {qubit!r}") from None
        if not 0 <= qubit < self.n_qubits:
            raise IndexError(f"qubit index {qubit} out of range")
        return int(qubit)

    def edges(self) -> list[tuple[int, int, float]]:
        return [(self.index(c.a), self.index(c.b), c.j) for c in self.couplings]

    def idle_frequencies(self) -> list[float]:
        return [q.idle_frequency for q in self.qubits]


@dataclass(frozen=True)
class SectorBasis:
    """Occupation bitstrings with at most ``max_excitations`` ones.

    Bit ``i`` of a string is qubit ``i`` (leftmost is qubit 0). States are
    ordered by excitation number, then lexicographically.
    """

    n_qubits: int
    max_excitations: int
    states: tuple[str, ...]

    @property
    def dim(self) -> int:
        return len(self.states)

    def index(self, bits: str) -> int:
        try:
            return self._lookup[bits]
        except KeyError:
            raise SectorError(f"state |{bits}> is outside the {self.max_excitations}-excitation sector") from None

    @property
    def _lookup(self) -> dict[str, int]:
        cache = self.__dict__.get("_lookup_cache")
        if cache is None:
            cache = {s: i for i, s in enumerate(self.states)}
            object.__setattr__(self, "_lookup_cache", cache)
        return cache

    @property
    def occupations(self) -> np.ndarray:
        """Integer array of shape (dim, n_qubits)."""
        return np.array([[int(c) for c in s] for s in self.states], dtype=int)

    def is_full_space(self) -> bool:
        return self.dim == 2**self.n_qubits

    def full_index(self) -> np.ndarray:
        """Position of each basis state in the Kronecker (binary) ordering."""
        return np.array([int(s, 2) for s in self.states])


def sector_basis(n_qubits: int, max_excitations: int) -> SectorBasis:
    if n_qubits < 1:
        raise ValueError("need at least one qubit")
    if not 1 <= max_excitations <= n_qubits:
        raise ValueError(f"max_excitations must be in [1, {n_qubits}], got {max_excitations}")
    states = []
    for k in range(max_excitations + 1):
        block = []
        for ones in combinations(range(n_qubits), k):
            bits = ["0"] * n_qubits
            for i in ones:
                bits[i] = "1"
            block.append("".join(bits))
        states.extend(sorted(block))
    return SectorBasis(n_qubits, max_excitations, tuple(states))


def number_operator(basis: SectorBasis, qubit: int) -> np.ndarray:
    return np.diag(basis.occupations[:, qubit].astype(complex))


def total_number(basis: SectorBasis) -> np.ndarray:
    return np.diag(basis.occupations.sum(axis=1).astype(complex))


def sigma_z(basis: SectorBasis, qubit: int) -> np.ndarray:
    """Pauli Z on one qubit with ``sigma_z|0> = +|0>``."""
    return np.diag(1.0 - 2.0 * basis.occupations[:, qubit]).astype(complex)


def lowering(basis: SectorBasis, qubit: int) -> np.ndarray:
    """``sigma^-`` on one qubit, restricted to the basis."""
    m = np.zeros((basis.dim, basis.dim), dtype=complex)
    for col, s in enumerate(basis.states):
        if s[qubit] == "1":
            lowered = s[:qubit] + "0" + s[qubit + 1 :]
            m[basis.index(lowered), col] = 1.0
    return m


def hopping(basis: SectorBasis, i: int, j: int) -> np.ndarray:
    """``sigma_i^+ sigma_j^- + h.c.`` restricted to the basis."""
    m = np.zeros((basis.dim, basis.dim), dtype=complex)
    for col, s in enumerate(basis.states):
        for src, dst in ((j, i), (i, j)):
            if s[src] == "1" and s[dst] == "0":
                b = list(s)
                b[src], b[dst] = "0", "1"
                m[basis.index("".join(b)), col] += 1.0
    return m


def _check_frequencies(device: DeviceModel, frequencies: Sequence[float]) -> np.ndarray:
    f = np.asarray(frequencies, dtype=float)
    if f.shape != (device.n_qubits,):
        raise ShapeError(f"expected {device.n_qubits} frequencies, got {f.shape}")
    return f


def build_hcb(device: DeviceModel, frequencies: Sequence[float], basis: SectorBasis, frame: float) -> np.ndarray:
    """Hard-core-boson Hamiltonian in the rotating frame at ``frame`` Hz."""
    f = _check_frequencies(device, frequencies)
    if basis.n_qubits != device.n_qubits:
        raise ShapeError("basis and device disagree on the number of qubits")
    occ = basis.occupations
    diag = np.zeros(basis.dim)
    for i in range(device.n_qubits):  # same summation order as build_bose_hubbard
        diag += TWO_PI * (f[i] - frame) * occ[:, i]
    h = np.diag(diag).astype(complex)
    for i, j, J in device.edges():
        h += TWO_PI * J * hopping(basis, i, j)
    return h


def _boson_ops(cutoff: int) -> tuple[np.ndarray, np.ndarray]:
    a = np.diag(np.sqrt(np.arange(1, cutoff)), k=1).astype(complex)
    return a, a.conj().T @ a


def build_bose_hubbard(
    device: DeviceModel,
    frequencies: Sequence[float],
    local_cutoff: int,
    frame: float,
    include_interaction: bool = True,
) -> np.ndarray:
    """Bose-Hubbard Hamiltonian on the full ``cutoff**n`` product space.

    Basis ordering is the Kronecker ordering with qubit 0 most significant.
    """
    f = _check_frequencies(device, frequencies)
    if local_cutoff < 2:
        raise ValueError("local_cutoff must be at least 2")
    n = device.n_qubits
    dim = local_cutoff**n
    if dim > BOSE_HUBBARD_MAX_DIM:
        raise ValueError(f"Bose-Hubbard space of dimension {dim} exceeds {BOSE_HUBBARD_MAX_DIM}")
    a, num = _boson_ops(local_cutoff)
    eye = np.eye(local_cutoff, dtype=complex)

    def site(op, i):
        return kron_all([op if k == i else eye for k in range(n)])

    ann = [site(a, i) for i in range(n)]
    h = np.zeros((dim, dim), dtype=complex)
    for i, q in enumerate(device.qubits):
        ni = site(num, i)
        h += TWO_PI * (f[i] - frame) * ni
        if include_interaction:
            h += TWO_PI * 0.5 * q.anharmonicity * ni @ (ni - np.eye(dim))
    for i, j, J in device.edges():
        hop = ann[i].conj().T @ ann[j]
        h += TWO_PI * J * (hop + hop.conj().T)
    return h


def hcb_sector_projection(full: np.ndarray, local_cutoff: int, basis: SectorBasis) -> np.ndarray:
    """Restrict a product-space operator to the hard-core states of ``basis``."""
    idx = [int(s, local_cutoff) for s in basis.states]
    return full[np.ix_(idx, idx)]


@dataclass(frozen=True)
class Measurement:
    """Continuous which-way drive on one qubit.

    ``gamma_m`` is the dephasing rate divided by 2 pi, in Hz.
    ``residual_detuning`` is the uncompensated Stark shift in Hz.
    """

    target: int | str
    gamma_m: float
    residual_detuning: float = 0.0

    def __post_init__(self):
        if self.gamma_m < 0:
            raise ValueError("measurement dephasing rate must be non-negative")


@dataclass(frozen=True)
class Stage:
    duration: float
    frequencies: tuple[float, ...]
    measurements: tuple[Measurement, ...] = ()
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "frequencies", tuple(float(x) for x in self.frequencies))
        object.__setattr__(self, "measurements", tuple(self.measurements))
        if self.duration < 0:
            raise ValueError("stage duration must be non-negative")


@dataclass(frozen=True)
class Schedule:
    stages: tuple[Stage, ...]
    frame: float

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(self.stages))
        if not self.stages:
            raise ValueError("a schedule needs at least one stage")

    @property
    def duration(self) -> float:
        return sum(s.duration for s in self.stages)


def stage_frequencies(device: DeviceModel, stage: Stage) -> np.ndarray:
    f = _check_frequencies(device, stage.frequencies).copy()
    for m in stage.measurements:
        f[device.index(m.target)] += m.residual_detuning
    return f


def stage_hamiltonian(device: DeviceModel, stage: Stage, basis: SectorBasis, frame: float) -> np.ndarray:
    return build_hcb(device, stage_frequencies(device, stage), basis, frame)


def dephasing_rates(device: DeviceModel, stage: Stage) -> np.ndarray:
    """Total pure-dephasing rate per qubit in s^-1 (``1/Tphi + 2 pi Gamma_m``)."""
    rates = np.array([0.0 if q.tphi is None else 1.0 / q.tphi for q in device.qubits])
    for m in stage.measurements:
        rates[device.index(m.target)] += TWO_PI * m.gamma_m
    return rates


def collapse_operators(device: DeviceModel, stage: Stage, basis: SectorBasis) -> list[np.ndarray]:
    """Decay ``sqrt(1/T1) sigma^-`` and dephasing ``sqrt(Gamma_phi/2) sigma_z`` operators."""
    ops = []
    for i, q in enumerate(device.qubits):
        if q.t1 is not None:
            if basis.max_excitations < 1:
                raise SectorError("decay needs the vacuum sector")
            ops.append(math.sqrt(1.0 / q.t1) * lowering(basis, i))
    for i, rate in enumerate(dephasing_rates(device, stage)):
        if rate > 0:
            ops.append(math.sqrt(rate / 2) * sigma_z(basis, i))
    return ops


def reduced_state(rho: np.ndarray, basis: SectorBasis, qubits: Sequence[int]) -> np.ndarray:
    """Reduced density matrix of ``qubits`` from a sector-basis state.

    The result uses the Kronecker ordering of the kept qubits in the order
    given. Basis states outside the sector carry no weight, so summing over
    the sector is the full partial trace.
    """
    qubits = list(qubits)
    occ = basis.occupations
    kept = occ[:, qubits]
    weights = 2 ** np.arange(len(qubits) - 1, -1, -1)
    kidx = kept @ weights
    rest_cols = [k for k in range(basis.n_qubits) if k not in qubits]
    rest = occ[:, rest_cols] @ (2 ** np.arange(len(rest_cols) - 1, -1, -1)) if rest_cols else np.zeros(basis.dim, int)
    d = 2 ** len(qubits)
    out = np.zeros((d, d), dtype=complex)
    for key in np.unique(rest):
        sel = np.flatnonzero(rest == key)
        np.add.at(out, (kidx[sel][:, None], kidx[sel][None, :]), rho[np.ix_(sel, sel)])
    return out


def embed_full(rho: np.ndarray, basis: SectorBasis) -> np.ndarray:
    """Place a sector-basis matrix into the full Kronecker-ordered space."""
    d = 2**basis.n_qubits
    out = np.zeros((d, d), dtype=complex)
    idx = basis.full_index()
    out[np.ix_(idx, idx)] = rho
    return out
