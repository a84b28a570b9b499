from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np


class FitError(ValueError):
    pass


@dataclass(frozen=True)
class FringeScan:
    """Interference populations ``P_I`` against the phase-stage detuning.

    ``delta_grid`` holds ``delta/2pi`` in Hz and ``gamma_bar`` the applied
    average dephasing ``/2pi`` in Hz.
    """

    delta_grid: np.ndarray
    t_p: float
    populations: np.ndarray
    gamma_bar: float = 0.0

    def __post_init__(self):
        d = np.asarray(self.delta_grid, dtype=float)
        p = np.asarray(self.populations, dtype=float)
        if d.shape != p.shape:
            raise ValueError("grid and populations differ in length")
        if np.any(np.diff(d) <= 0):
            raise ValueError("delta grid must be strictly increasing")
        if np.any(p < -1e-9) or np.any(p > 1 + 1e-9):
            raise ValueError("populations must lie in [0, 1]")
        object.__setattr__(self, "delta_grid", d)
        object.__setattr__(self, "populations", p)


@dataclass(frozen=True)
class FringeFit:
    offset: float
    amplitude: float
    phase: float
    visibility: float
    residual_rms: float
    phase_defined: bool = True

    def model(self, delta, t_p: float):
        return self.offset + self.amplitude * np.cos(2 * np.pi * t_p * np.asarray(delta) + self.phase)


def fit_fringe(scan: FringeScan, flat_tol: float = 1e-12) -> FringeFit:
    """Least-squares fit of ``a + b cos(2 pi t_p delta + phi0)``; visibility ``b/a``.

    The model is linear in ``(a, b cos phi0, -b sin phi0)``, so the fit is a
    single linear solve.
    """
    d, p = scan.delta_grid, scan.populations
    if len(d) < 6:
        raise FitError("need at least 6 grid points")
    if scan.t_p * (d[-1] - d[0]) < 1 - 1e-9:
        raise FitError("grid must span at least one fringe period")
    x = 2 * np.pi * scan.t_p * d
    design = np.column_stack([np.ones_like(x), np.cos(x), np.sin(x)])
    coef, *_ = np.linalg.lstsq(design, p, rcond=None)
    a, u, v = coef
    b = math.hypot(u, v)
    resid = p - design @ coef
    rms = float(np.sqrt(np.mean(resid**2)))
    if b <= flat_tol * max(1.0, abs(a)):
        return FringeFit(float(a), 0.0, 0.0, 0.0, rms, phase_defined=False)
    phase = math.atan2(-v, u)
    if a <= b:
        if b - a > 1e-9 * max(1.0, abs(a)):
            warnings.warn("fringe offset does not exceed its amplitude; clipping visibility to 1", RuntimeWarning, stacklevel=2)
        vis = 1.0
    else:
        vis = b / a
    return FringeFit(float(a), float(b), float(phase), float(vis), rms)


def extremal_visibility(populations) -> float:
    """Contrast ``(max - min) / (max + min)`` of sampled populations."""
    p = np.asarray(populations, dtype=float)
    hi, lo = p.max(), p.min()
    return float((hi - lo) / (hi + lo)) if hi + lo > 0 else 0.0
