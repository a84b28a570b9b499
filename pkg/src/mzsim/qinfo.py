"""Two-qubit entanglement and single-photon complementarity metrics.

Two-qubit matrices use the ordering ``|00>, |01>, |10>, |11>`` with the first
qubit most significant. Entropies are in bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .qlinalg import SIGMA_Y, ShapeError

YY = np.kron(SIGMA_Y, SIGMA_Y)
NEGATIVE_TOL = 1e-9
# positions of |10> and |01> in the two-qubit ordering
I10, I01 = 2, 1


class NumericError(ValueError):
    pass


class EmptySectorError(ValueError):
    pass


def _two_qubit(rho) -> np.ndarray:
    m = np.asarray(rho, dtype=complex)
    if m.shape != (4, 4):
        raise ShapeError(f"expected a 4x4 two-qubit state, got {m.shape}")
    return 0.5 * (m + m.conj().T)


def spin_flip(rho) -> np.ndarray:
    """``(sigma_y x sigma_y) rho^* (sigma_y x sigma_y)``."""
    return YY @ np.conj(rho) @ YY


def concurrence(rho) -> float:
    """Wootters concurrence ``max(0, l1 - l2 - l3 - l4)``.

    The ``l_i`` are the singular values of ``W^T (sigma_y x sigma_y) W`` with
    ``rho = W W^dagger``; their squares are the eigenvalues of
    ``rho rho_tilde``. Going through singular values avoids taking square
    roots of round-off sized eigenvalues.
    """
    m = _two_qubit(rho)
    w, v = np.linalg.eigh(m)
    if w[0] < -NEGATIVE_TOL:
        raise NumericError(f"state has eigenvalue {w[0]:.3e} below tolerance")
    root = v * np.sqrt(np.clip(w, 0.0, None))
    tau = root.T @ YY @ root
    lam = np.linalg.svd(tau, compute_uv=False)
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def binary_entropy(p: float) -> float:
    s = 0.0
    for x in (p, 1.0 - p):
        if x > 0:
            s -= x * math.log2(x)
    return s


@dataclass(frozen=True)
class SingleExcitationState:
    """Normalized arm state in the basis ``{|10>, |01>}`` plus its weight."""

    p1: float
    p2: float
    c: complex
    weight: float

    def __post_init__(self):
        if abs(self.p1 + self.p2 - 1) > 1e-9:
            raise ValueError("populations must sum to one")
        if abs(self.c) > math.sqrt(max(self.p1 * self.p2, 0.0)) + 1e-9:
            raise ValueError("coherence exceeds the positivity bound")
        if not 0 < self.weight <= 1 + 1e-9:
            raise ValueError("weight must lie in (0, 1]")

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.p1, self.c], [np.conj(self.c), self.p2]], dtype=complex)

    @property
    def imbalance(self) -> float:
        return self.p1 - self.p2

    @property
    def bloch_length(self) -> float:
        """``R = sqrt(dp^2 + V^2)``, clipped to 1 against round-off."""
        return min(1.0, math.hypot(self.imbalance, visibility_of(self)))


def project_single_excitation(rho) -> SingleExcitationState:
    m = _two_qubit(rho)
    weight = float(np.real(m[I10, I10] + m[I01, I01]))
    if weight <= 1e-12:
        raise EmptySectorError("state has no weight in the single-excitation subspace")
    p1 = float(np.real(m[I10, I10])) / weight
    return SingleExcitationState(p1, 1.0 - p1, complex(m[I10, I01]) / weight, weight)


def visibility_of(state: SingleExcitationState) -> float:
    return min(1.0, 2.0 * abs(state.c))


def purity(state: SingleExcitationState) -> float:
    r = state.bloch_length
    return 0.5 * (1.0 + r * r)


def von_neumann_entropy(state: SingleExcitationState) -> float:
    return binary_entropy(0.5 * (1.0 + state.bloch_length))


def entropy_bound_sym(v: float) -> float:
    """Entropy of a population-balanced arm state with visibility ``v``."""
    if not -1e-12 <= v <= 1 + 1e-12:
        raise ValueError(f"visibility {v} outside [0, 1]")
    return binary_entropy(0.5 * (1.0 + min(max(v, 0.0), 1.0)))


@dataclass(frozen=True)
class ComplementarityReport:
    visibility: float
    purity: float
    entropy: float
    linear_entropy: float
    bound_gap_purity: float
    bound_gap_entropy: float
    imbalance: float


def complementarity_report(state: SingleExcitationState) -> ComplementarityReport:
    """Slack in ``2(1 - P_s) + V^2 <= 1`` and ``S_s <= S_sym(V)``.

    The purity slack equals the squared population imbalance.
    """
    v = visibility_of(state)
    p = purity(state)
    s = von_neumann_entropy(state)
    return ComplementarityReport(
        visibility=v,
        purity=p,
        entropy=s,
        linear_entropy=1.0 - p,
        bound_gap_purity=1.0 - (2.0 * (1.0 - p) + v * v),
        bound_gap_entropy=entropy_bound_sym(v) - s,
        imbalance=state.imbalance,
    )
