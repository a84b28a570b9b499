"""Dormand-Prince 5(4) integrator with step-size control.

Steps are clipped so that every requested output time is hit exactly, which
avoids interpolation error in the recorded snapshots.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

# Butcher tableau
C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1])
A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
B5 = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
B4 = np.array([5179 / 57600, 0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
E = B5 - B4

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0
MAX_REJECTS = 60
MAX_STEPS = 1_000_000
MIN_RTOL = 100 * float(np.finfo(float).eps)


class StiffnessError(RuntimeError):
    """Step size collapsed without meeting the error tolerance."""


def _initial_step(f, t0, y0, f0, rtol, atol):
    scale = atol + rtol * np.abs(y0)
    d0 = np.max(np.abs(y0) / scale)
    d1 = np.max(np.abs(f0) / scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = y0 + h0 * f0
    f1 = f(t0 + h0, y1)
    d2 = np.max(np.abs(f1 - f0) / scale) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1)


def dopri5(
    f: Callable[[float, np.ndarray], np.ndarray],
    y0: np.ndarray,
    t_out: np.ndarray,
    rtol: float = 1e-8,
    atol: float = 1e-10,
    h_max: float | None = None,
) -> tuple[np.ndarray, dict]:
    """Integrate ``y' = f(t, y)`` and return ``y`` at each time in ``t_out``.

    ``t_out[0]`` is the initial time. The error norm is the maximum over
    components of ``|err| / (atol + rtol * max(|y|, |y_new|))``, so components
    that stay identically zero never influence the step size.
    """
    if rtol < MIN_RTOL:
        raise ValueError(f"rtol {rtol:g} is below the round-off floor {MIN_RTOL:g}")
    t_out = np.asarray(t_out, dtype=float)
    y = np.array(y0, dtype=complex)
    out = np.empty((len(t_out),) + y.shape, dtype=complex)
    out[0] = y
    stats = {"steps": 0, "rejected": 0, "evaluations": 0}
    if len(t_out) == 1:
        return out, stats
    t = float(t_out[0])
    span = float(t_out[-1] - t)
    h_max = span if h_max is None else min(h_max, span)
    k0 = f(t, y)
    stats["evaluations"] += 1
    h = min(_initial_step(f, t, y, k0, rtol, atol), h_max)
    stats["evaluations"] += 1
    k = np.empty((7,) + y.shape, dtype=complex)

    for i_out in range(1, len(t_out)):
        target = float(t_out[i_out])
        while t < target:
            rejects = 0
            while True:
                last = t + h >= target - 1e-12 * abs(span)
                step = target - t if last else h
                k[0] = k0
                for s in range(1, 7):
                    ys = y + step * np.tensordot(A[s], k[:s], axes=1)
                    k[s] = f(t + C[s] * step, ys)
                stats["evaluations"] += 6
                y_new = ys  # stage 7 evaluates at the 5th-order solution (FSAL)
                err = step * np.tensordot(E, k, axes=1)
                scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
                err_norm = float(np.max(np.abs(err) / scale))
                if err_norm <= 1.0:
                    break
                stats["rejected"] += 1
                rejects += 1
                if rejects > MAX_REJECTS:
                    raise StiffnessError(f"step size collapsed to {step:.3e} s at t = {t:.6e} s")
                h = step * max(MIN_FACTOR, SAFETY * err_norm ** (-0.2))
            t = target if last else t + step
            y = y_new
            k0 = k[6].copy()
            stats["steps"] += 1
            if stats["steps"] > MAX_STEPS:
                raise StiffnessError(f"more than {MAX_STEPS} steps before t = {target:.6e} s")
            factor = MAX_FACTOR if err_norm == 0 else min(MAX_FACTOR, max(MIN_FACTOR, SAFETY * err_norm ** (-0.2)))
            # a step shortened to land on an output time keeps the controller's step
            if not (last and step < h):
                h = min(h_max, step * factor)
        out[i_out] = y
    return out, stats
