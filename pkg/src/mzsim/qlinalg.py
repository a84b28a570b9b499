"""Dense complex linear algebra used throughout the simulator.

All matrices are plain ``numpy`` arrays of dtype ``complex128``. The
functions here validate shapes and Hermiticity and otherwise defer to
LAPACK through numpy.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

HERMITIAN_TOL = 1e-10
MAX_DIM = 1 << 16

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
# basis order (|0>, |1>); sigma^- = |0><1|
SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_PLUS = SIGMA_MINUS.T.copy()
NUMBER = np.array([[0, 0], [0, 1]], dtype=complex)


class ShapeError(ValueError):
    """Matrix has the wrong shape or fails a structural check."""


class DimensionError(ValueError):
    """A requested dimension exceeds the supported size."""


@dataclass(frozen=True)
class HermitianEigenDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ShapeError(f"expected a non-empty 2-d matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ShapeError("matrix has non-finite entries")
    return m


def kron(a, b) -> np.ndarray:
    a = as_matrix(a)
    b = as_matrix(b)
    rows = a.shape[0] * b.shape[0]
    cols = a.shape[1] * b.shape[1]
    if rows > MAX_DIM or cols > MAX_DIM:
        raise DimensionError(f"kron result {rows}x{cols} exceeds limit {MAX_DIM}")
    return np.kron(a, b)


def kron_all(factors: Sequence) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for f in factors:
        out = kron(out, f)
    return out


def hermiticity_error(h: np.ndarray) -> float:
    """Frobenius norm of the anti-Hermitian part relative to the matrix norm."""
    scale = max(np.linalg.norm(h), 1.0)
    return float(np.linalg.norm(h - h.conj().T) / scale)


def hermitize(h, tol: float = HERMITIAN_TOL) -> np.ndarray:
    h = as_matrix(h)
    if h.shape[0] != h.shape[1]:
        raise ShapeError(f"matrix must be square, got {h.shape}")
    if hermiticity_error(h) > tol:
        raise ShapeError("matrix is not Hermitian within tolerance")
    return 0.5 * (h + h.conj().T)


def eigh(h, tol: float = HERMITIAN_TOL) -> HermitianEigenDecomposition:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    The input is symmetrized as ``(H + H^dagger)/2`` after checking that the
    anti-Hermitian residue is below ``tol``.
    """
    hs = hermitize(h, tol)
    w, v = np.linalg.eigh(hs)
    return HermitianEigenDecomposition(w, v)


def partial_trace(rho, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Reduced density matrix over the subsystems listed in ``keep``.

    Subsystem 0 is the most significant factor of the Kronecker ordering. The
    kept subsystems appear in ascending order in the result.
    """
    rho = as_matrix(rho)
    dims = [int(d) for d in dims]
    n = len(dims)
    total = int(np.prod(dims))
    if rho.shape != (total, total):
        raise ShapeError(f"rho shape {rho.shape} does not match dims {dims}")
    keep = sorted(set(int(k) for k in keep))
    for k in keep:
        if k < 0 or k >= n:
            raise IndexError(f"subsystem index {k} out of range for {n} subsystems")
    trace = np.trace(rho)
    if abs(trace - 1) > 1e-9:
        raise ShapeError(f"rho must have unit trace, got {trace}")

    traced = [i for i in range(n) if i not in keep]
    t = rho.reshape(dims + dims)
    # contract each traced subsystem's row and column index
    for offset, i in enumerate(traced):
        ax = i - offset
        t = np.trace(t, axis1=ax, axis2=ax + t.ndim // 2)
    d = int(np.prod([dims[k] for k in keep])) if keep else 1
    return t.reshape(d, d)


def matexp_herm(h, t: float) -> np.ndarray:
    """Unitary propagator ``exp(-i h t)`` through the eigendecomposition of ``h``."""
    dec = eigh(h)
    v = dec.eigenvectors
    return (v * np.exp(-1j * dec.eigenvalues * t)) @ v.conj().T


def expectation(rho: np.ndarray, op: np.ndarray) -> complex:
    return complex(np.einsum("ij,ji->", rho, op))


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    d = a - b
    d = 0.5 * (d + d.conj().T)
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(d))))


def ket(bits: str) -> np.ndarray:
    """Computational basis vector for a bitstring like ``"0110"``."""
    idx = int(bits, 2)
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[idx] = 1.0
    return v


def projector(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    return np.outer(v, v.conj())


def random_density_matrix(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho)


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return 0.5 * (g + g.conj().T)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))
