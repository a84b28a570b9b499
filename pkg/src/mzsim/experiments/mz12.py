"""Twelve-qubit ring interferometer with continuous which-way monitoring of Q2.

A photon starts at Q0, splits into path 1 (Q1, Q4, Q5, Q7, Q13) and path 2
(Q2, Q8, Q10, Q11, Q14) and recombines at Q15. Q2 is dephased at ``Gamma_m``
for the whole 200 ns run; strong monitoring blocks path 2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import device as dm
from .. import lindblad as lb
from .. import stochastic as st
from ..parallel import pmap
from ..presets import PATH_1, PATH_2, WORKING_FREQUENCY
from ..qinfo import ComplementarityReport, complementarity_report, concurrence, project_single_excitation

REFERENCE_GAMMA_M = (0.0, 5.921e6, 11.195e6, 18.134e6)
RUN_TIME = 200e-9
PAIR = ("Q4", "Q8")


@dataclass(frozen=True)
class Trajectories:
    """Unraveled run: ``n`` homodyne trajectories averaged."""

    n: int
    seed: int = 0
    dt: float = st.DEFAULT_DT


def mz12_schedule(device: dm.DeviceModel, gamma_m: float, duration: float = RUN_TIME, frame: float = WORKING_FREQUENCY) -> dm.Schedule:
    meas = (dm.Measurement("Q2", gamma_m),) if gamma_m > 0 else ()
    stage = dm.Stage(duration, (frame,) * device.n_qubits, meas, label="propagate")
    return dm.Schedule([stage], frame)


def _initial(device) -> str:
    bits = ["0"] * device.n_qubits
    bits[device.index("Q0")] = "1"
    return "".join(bits)


def run_mz12(
    device: dm.DeviceModel,
    gamma_m: float,
    mode: str | Trajectories = "lindblad",
    options: lb.SolverOptions = lb.SolverOptions(),
    duration: float = RUN_TIME,
    threads: int | None = None,
) -> lb.EvolutionTrace:
    """Populations of all qubits on the output grid for one monitoring rate ``gamma_m`` (Hz)."""
    for lab in ("Q0", "Q15") + PATH_1 + PATH_2:
        device.index(lab)
    basis = dm.sector_basis(device.n_qubits, 1)
    sched = mz12_schedule(device, gamma_m, duration)
    if mode == "lindblad":
        return lb.run_schedule(device, sched, _initial(device), basis, options)
    if isinstance(mode, Trajectories):
        cfg = st.SmeConfig(dt=mode.dt, n_trajectories=mode.n, seed=mode.seed, output_dt=options.output_dt)
        return st.run_trajectories(device, sched, _initial(device), basis, cfg, threads).trace
    raise ValueError(f"unknown mode {mode!r}")


def path_population(trace: lb.EvolutionTrace, device, path=PATH_2) -> np.ndarray:
    cols = [device.index(q) for q in path]
    return trace.populations()[:, cols].sum(axis=1)


def arrival_time(trace: lb.EvolutionTrace, device, site: str = "Q15") -> float:
    """First time the population of ``site`` reaches half of its maximum."""
    n = trace.populations()[:, device.index(site)]
    return float(trace.times[int(np.argmax(n >= 0.5 * n.max()))])


def first_pass_peak(trace: lb.EvolutionTrace, device, until: float, path=PATH_2) -> float:
    """Largest total population of ``path`` for ``t <= until``.

    Restricting to the first pass excludes the share that re-enters the
    path from Q15 after the two wave packets meet.
    """
    p = path_population(trace, device, path)
    return float(p[trace.times <= until + 1e-15].max())


def pair_state(trace: lb.EvolutionTrace, device, k: int, pair=PAIR) -> np.ndarray:
    return dm.reduced_state(trace.states[k], trace.basis, [device.index(q) for q in pair])


@dataclass
class ZenoSweepResult:
    gamma_grid: np.ndarray
    times: np.ndarray
    labels: list[str]
    population_traces: np.ndarray  # (gamma, time, qubit)
    concurrence: np.ndarray
    purity: np.ndarray
    entropy: np.ndarray
    extraction_time: float
    reports: list[ComplementarityReport] = field(default_factory=list)
    path2_first_pass: np.ndarray | None = None
    arrival_time: float | None = None


def zeno_metrics(
    device: dm.DeviceModel,
    gamma_grid,
    options: lb.SolverOptions = lb.SolverOptions(),
    duration: float = RUN_TIME,
    threads: int | None = None,
) -> ZenoSweepResult:
    """Q4-Q8 concurrence, purity and entropy against the monitoring rate.

    All metrics are read at the time where the concurrence of the
    unmonitored run peaks. That run is always computed, and is part of the
    result only when ``0`` is on the grid.
    """
    grid = np.asarray(gamma_grid, dtype=float)
    if grid.size == 0:
        raise ValueError("gamma grid is empty")
    if np.any(np.diff(grid) < 0):
        raise ValueError("gamma grid must be sorted")
    todo = list(grid) if grid[0] == 0 else [0.0] + list(grid)
    traces = pmap(lambda g: run_mz12(device, g, "lindblad", options, duration), todo, threads)
    ref = traces[0]
    c0 = np.array([concurrence(pair_state(ref, device, k)) for k in range(len(ref.times))])
    k = int(np.argmax(c0))
    until = arrival_time(ref, device)
    if grid[0] != 0:
        traces = traces[1:]
    conc, pur, ent, reports, first = [], [], [], [], []
    for tr in traces:
        rho = pair_state(tr, device, k)
        conc.append(concurrence(rho))
        rep = complementarity_report(project_single_excitation(rho))
        reports.append(rep)
        pur.append(rep.purity)
        ent.append(rep.entropy)
        first.append(first_pass_peak(tr, device, until))
    return ZenoSweepResult(
        gamma_grid=grid,
        times=ref.times,
        labels=device.labels,
        population_traces=np.stack([tr.populations() for tr in traces]),
        concurrence=np.array(conc),
        purity=np.array(pur),
        entropy=np.array(ent),
        extraction_time=float(ref.times[k]),
        reports=reports,
        path2_first_pass=np.array(first),
        arrival_time=until,
    )
