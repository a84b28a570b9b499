"""Pauli-basis state tomography of one or two qubits with optional shot noise."""

from __future__ import annotations

import itertools

import numpy as np

from ..qlinalg import SIGMA_X, SIGMA_Y, SIGMA_Z, ShapeError, kron_all

PAULI = {"I": np.eye(2, dtype=complex), "X": SIGMA_X, "Y": SIGMA_Y, "Z": SIGMA_Z}
# rows are the measurement eigenvectors (+1 outcome first)
_EIGVECS = {
    "X": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    "Y": np.array([[1, 1j], [1, -1j]], dtype=complex) / np.sqrt(2),
    "Z": np.eye(2, dtype=complex),
}
_EIGVALS = np.array([1.0, -1.0])


def settings(n_qubits: int) -> list[tuple[str, ...]]:
    return list(itertools.product("XYZ", repeat=n_qubits))


def outcome_probabilities(rho: np.ndarray, setting: tuple[str, ...]) -> np.ndarray:
    """Probabilities of the ``2**n`` outcomes of measuring each qubit in its Pauli basis."""
    basis = kron_all([_EIGVECS[b] for b in setting])
    p = np.real(np.einsum("ki,ij,kj->k", basis.conj(), rho, basis))
    p = np.clip(p, 0.0, None)
    return p / p.sum()


def linear_inversion(freqs: dict[tuple[str, ...], np.ndarray], n_qubits: int) -> np.ndarray:
    """Rebuild ``rho = 2^-n sum_P <P> P`` from outcome frequencies per setting.

    Pauli strings containing identities are averaged over every setting
    that determines them.
    """
    bits = (np.arange(2**n_qubits)[:, None] >> np.arange(n_qubits - 1, -1, -1)) & 1
    acc: dict[tuple[str, ...], list[float]] = {}
    for setting, f in freqs.items():
        for mask in itertools.product((False, True), repeat=n_qubits):
            label = tuple(b if keep else "I" for b, keep in zip(setting, mask))
            sgn = np.prod(np.where(np.array(mask)[None, :], _EIGVALS[bits], 1.0), axis=1)
            acc.setdefault(label, []).append(float(sgn @ f))
    rho = np.zeros((2**n_qubits, 2**n_qubits), dtype=complex)
    for label, vals in acc.items():
        rho += np.mean(vals) * kron_all([PAULI[p] for p in label])
    return rho / 2**n_qubits


def _simplex(w: np.ndarray) -> np.ndarray:
    """Euclidean projection of ``w`` onto ``{x >= 0, sum(x) = 1}``."""
    u = np.sort(w)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, len(w) + 1)
    r = k[u - css / k > 0][-1]
    return np.clip(w - css[r - 1] / r, 0.0, None)


def project_psd(rho: np.ndarray) -> np.ndarray:
    """Nearest unit-trace positive semidefinite matrix in Frobenius norm.

    Eigenvalues are shifted by a common amount and clipped at zero so that
    they sum to one; eigenvectors are kept.
    """
    h = 0.5 * (rho + rho.conj().T)
    w, v = np.linalg.eigh(h)
    return (v * _simplex(w)) @ v.conj().T


def simulate_tomography(rho_true, shots: int | None, seed: int | None = None) -> np.ndarray:
    """Reconstruct ``rho_true`` from simulated Pauli measurements.

    ``shots=None`` uses exact outcome probabilities. Otherwise each of the
    ``3**n`` settings is sampled ``shots`` times from a generator seeded
    with ``seed``.
    """
    rho = np.asarray(rho_true, dtype=complex)
    if rho.shape not in ((2, 2), (4, 4)):
        raise ShapeError("tomography supports one or two qubits")
    if shots is not None and shots < 1:
        raise ValueError("shots must be positive")
    n = 1 if rho.shape == (2, 2) else 2
    rng = np.random.default_rng(seed)
    freqs = {}
    for s in settings(n):
        p = outcome_probabilities(rho, s)
        freqs[s] = p if shots is None else rng.multinomial(shots, p) / shots
    return project_psd(linear_inversion(freqs, n))


def fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Uhlmann fidelity ``(tr sqrt(sqrt(rho) sigma sqrt(rho)))^2``."""
    w, v = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    root = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
    m = root @ sigma @ root
    ev = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    return float(np.sum(np.sqrt(np.clip(ev, 0.0, None))) ** 2)
