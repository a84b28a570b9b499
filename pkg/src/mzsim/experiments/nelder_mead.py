"""Budgeted Nelder-Mead minimization on top of :func:`scipy.optimize.minimize`."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize

XATOL = 1e-9
FATOL = 1e-12


class OptimizerError(RuntimeError):
    pass


class _BudgetSpent(Exception):
    pass


@dataclass
class NelderMeadResult:
    x: np.ndarray
    fun: float
    n_evals: int
    converged: bool
    trace: list[tuple[np.ndarray, float]] = field(default_factory=list)


def nelder_mead(
    cost: Callable[[np.ndarray], float],
    start: Sequence[float],
    budget: int = 500,
    xatol: float = XATOL,
    fatol: float = FATOL,
    step: float | Sequence[float] = 0.05,
) -> NelderMeadResult:
    """Minimize ``cost`` from ``start`` using at most ``budget`` evaluations.

    Reflection, expansion, contraction and shrink coefficients are 1, 2,
    0.5 and 0.5. The initial simplex adds ``step`` to one coordinate of
    ``start`` per vertex. Every evaluation is recorded in ``trace``; the best
    point seen is returned even when the budget runs out mid-iteration.
    """
    x0 = np.atleast_1d(np.asarray(start, dtype=float))
    if x0.ndim != 1 or x0.size < 1:
        raise ValueError("start must be a non-empty vector")
    if budget < 1:
        raise ValueError("budget must be at least one evaluation")
    trace: list[tuple[np.ndarray, float]] = []
    best = [None, math.inf]

    def wrapped(x):
        if trace and np.array_equal(x, trace[0][0]):
            return trace[0][1]
        if len(trace) >= budget:
            raise _BudgetSpent
        f = float(cost(np.array(x)))
        if math.isnan(f):
            raise OptimizerError(f"cost returned NaN at {np.array(x)!r}")
        trace.append((np.array(x), f))
        if f < best[1]:
            best[0], best[1] = np.array(x), f
        return f

    f0 = wrapped(x0)
    if not math.isfinite(f0):
        raise OptimizerError("start point has a non-finite cost")
    steps = np.broadcast_to(np.asarray(step, dtype=float), x0.shape)
    simplex = np.vstack([x0] + [x0 + steps[i] * np.eye(x0.size)[i] for i in range(x0.size)])
    converged = False
    try:
        res = minimize(
            wrapped,
            x0,
            method="Nelder-Mead",
            options={"initial_simplex": simplex, "xatol": xatol, "fatol": fatol, "maxfev": 10 * budget + 10, "maxiter": 10 * budget + 10},
        )
        converged = bool(res.success)
    except _BudgetSpent:
        pass
    return NelderMeadResult(best[0], best[1], len(trace), converged, trace)
