"""Four-qubit interferometer with a decoupled which-way measurement on Q2.

Stage list (frequencies of Q0..Q3):

1. split      [5.820, 5.820, 5.820, 6.190] GHz for 57 ns
2. measure    [6.165, 5.830, 5.820, 6.190] GHz for 200 ns, Q2 dephased
3. phase      [6.165, 5.830 + delta, 5.820, 6.190] GHz for 100 ns
4. interfere  [6.165, 5.820, 5.820, 5.820] GHz for 49 ns

``P_I`` is the Q3 population at the end of stage 4.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .. import device as dm
from .. import lindblad as lb
from ..parallel import pmap
from ..presets import MZ4_DECOUPLE_Q0, MZ4_DECOUPLE_Q3, WAITING_FREQUENCY, WORKING_FREQUENCY
from ..qinfo import SingleExcitationState, project_single_excitation
from .fringe import FringeScan

REFERENCE_GAMMA_BAR = (0.0, 0.333e6, 0.748e6, 1.330e6, 2.365e6)
MAX_GAMMA_BAR = 3.695e6
MEASUREMENT_WINDOW = 200e-9
PHASE_TIME = 100e-9


@dataclass(frozen=True)
class Mz4Timing:
    split: float = 57e-9
    measure: float = MEASUREMENT_WINDOW
    phase: float = PHASE_TIME
    interfere: float = 49e-9
    tomography_wait: float = 100e-9


@dataclass(frozen=True)
class Mz4Frequencies:
    working: float = WORKING_FREQUENCY
    waiting: float = WAITING_FREQUENCY
    decouple_q0: float = MZ4_DECOUPLE_Q0
    decouple_q3: float = MZ4_DECOUPLE_Q3


def _check_device(device: dm.DeviceModel) -> list[int]:
    if device.n_qubits < 4:
        raise ValueError("the 4-qubit interferometer needs at least four qubits")
    return [device.index(q) for q in ("Q0", "Q1", "Q2", "Q3")]


def _freqs(device, values: dict[str, float]) -> tuple[float, ...]:
    f = list(device.idle_frequencies())
    for lab, v in values.items():
        f[device.index(lab)] = v
    return tuple(f)


def split_stages(device, gamma_bar: float, timing=Mz4Timing(), freqs=Mz4Frequencies()) -> list[dm.Stage]:
    w = freqs.working
    s1 = dm.Stage(timing.split, _freqs(device, {"Q0": w, "Q1": w, "Q2": w, "Q3": freqs.decouple_q3}), label="split")
    decoupled = {"Q0": freqs.decouple_q0, "Q1": freqs.waiting, "Q2": w, "Q3": freqs.decouple_q3}
    meas = (dm.Measurement("Q2", gamma_bar),) if gamma_bar > 0 else ()
    s2 = dm.Stage(timing.measure, _freqs(device, decoupled), meas, label="measure")
    return [s1, s2]


def interference_stages(device, delta: float, timing=Mz4Timing(), freqs=Mz4Frequencies()) -> list[dm.Stage]:
    w = freqs.working
    phase = {"Q0": freqs.decouple_q0, "Q1": freqs.waiting + delta, "Q2": w, "Q3": freqs.decouple_q3}
    s3 = dm.Stage(timing.phase, _freqs(device, phase), label="phase")
    s4 = dm.Stage(timing.interfere, _freqs(device, {"Q0": freqs.decouple_q0, "Q1": w, "Q2": w, "Q3": w}), label="interfere")
    return [s3, s4]


def mz4_schedule(device, gamma_bar: float, delta: float, timing=Mz4Timing(), freqs=Mz4Frequencies()) -> dm.Schedule:
    stages = split_stages(device, gamma_bar, timing, freqs) + interference_stages(device, delta, timing, freqs)
    return dm.Schedule(stages, freqs.working)


def tomography_schedule(device, gamma_bar: float, timing=Mz4Timing(), freqs=Mz4Frequencies()) -> dm.Schedule:
    stages = split_stages(device, gamma_bar, timing, freqs)
    wait = replace(stages[1], duration=timing.tomography_wait, measurements=(), label="wait")
    return dm.Schedule(stages + [wait], freqs.working)


def initial_bits(device) -> str:
    bits = ["0"] * device.n_qubits
    bits[device.index("Q0")] = "1"
    return "".join(bits)


def default_basis(device) -> dm.SectorBasis:
    return dm.sector_basis(device.n_qubits, 1)


def run_mz4(
    device: dm.DeviceModel,
    gamma_bar: float,
    delta_grid,
    basis: dm.SectorBasis | None = None,
    options: lb.SolverOptions = lb.SolverOptions(),
    timing: Mz4Timing = Mz4Timing(),
    freqs: Mz4Frequencies = Mz4Frequencies(),
    threads: int | None = None,
) -> FringeScan:
    """Fringe scan at one average dephasing rate ``gamma_bar`` (``/2pi``, Hz).

    Stages 1-2 do not depend on ``delta`` and are evolved once; stages 3-4
    are re-run for each grid point.
    """
    _check_device(device)
    basis = basis or default_basis(device)
    head = dm.Schedule(split_stages(device, gamma_bar, timing, freqs), freqs.working)
    rho = lb.run_schedule(device, head, initial_bits(device), basis, options).final
    q3 = device.index("Q3")

    def point(delta):
        tail = dm.Schedule(interference_stages(device, delta, timing, freqs), freqs.working)
        tr = lb.run_schedule(device, tail, rho, basis, options)
        return tr.populations()[-1, q3]

    pops = pmap(point, list(np.asarray(delta_grid, dtype=float)), threads)
    return FringeScan(np.asarray(delta_grid, dtype=float), timing.phase, np.clip(pops, 0.0, 1.0), gamma_bar)


def run_mz4_tomography(
    device: dm.DeviceModel,
    gamma_bar: float,
    basis: dm.SectorBasis | None = None,
    options: lb.SolverOptions = lb.SolverOptions(),
    timing: Mz4Timing = Mz4Timing(),
    freqs: Mz4Frequencies = Mz4Frequencies(),
) -> np.ndarray:
    """Two-qubit state of (Q1, Q2) after splitting, measurement and a decoupled wait."""
    _check_device(device)
    basis = basis or default_basis(device)
    tr = lb.run_schedule(device, tomography_schedule(device, gamma_bar, timing, freqs), initial_bits(device), basis, options)
    return dm.reduced_state(tr.final.matrix, basis, [device.index("Q1"), device.index("Q2")])


def arm_state(device, gamma_bar: float, **kw) -> SingleExcitationState:
    return project_single_excitation(run_mz4_tomography(device, gamma_bar, **kw))
