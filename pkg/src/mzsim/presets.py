"""Default lattices for the 4-qubit and 12-qubit interferometers.

Only the working frequency (5.82 GHz), the decoupling frequencies of the
4-qubit stage list, the Q0-Q2 hopping rate of the 12-qubit lattice
(3.56 MHz) and the readout linewidth (6.26 MHz) are measured numbers.
Everything else here is a round placeholder: coherence times, anharmonicities,
dispersive shifts and the remaining couplings.
"""

from __future__ import annotations

import math

from .device import Coupling, DeviceModel, QubitSpec
from .readout import ReadoutParams

WORKING_FREQUENCY = 5.82e9
WAITING_FREQUENCY = 5.83e9
MZ4_DECOUPLE_Q0 = 6.165e9
MZ4_DECOUPLE_Q3 = 6.190e9
HOPPING_Q0_Q2 = 3.56e6
READOUT_KAPPA = 6.26e6
READOUT_CHI = -1.0e6  # placeholder

# Stage-1 splitting time (57 ns) and stage-4 merging time (49 ns) fix the
# symmetric couplings: the bright mode of a two-arm star hops at sqrt(2) J.
MZ4_SPLIT_J = 1.0 / (4 * math.sqrt(2) * 57e-9)
MZ4_MERGE_J = 1.0 / (4 * math.sqrt(2) * 49e-9)

PATH_1 = ("Q1", "Q4", "Q5", "Q7", "Q13")
PATH_2 = ("Q2", "Q8", "Q10", "Q11", "Q14")
MZ12_LABELS = ("Q0",) + tuple(x for pair in zip(PATH_1, PATH_2) for x in pair) + ("Q15",)

PLACEHOLDER_T1 = 30e-6
PLACEHOLDER_TPHI = 20e-6


def _qubit(label, freq, coherent, t1=PLACEHOLDER_T1, tphi=PLACEHOLDER_TPHI):
    if coherent:
        return QubitSpec(label, freq, -220e6)
    return QubitSpec(label, freq, -220e6, t1, tphi)


def mz4_device(coherent: bool = True, split_j: float = MZ4_SPLIT_J, merge_j: float = MZ4_MERGE_J) -> DeviceModel:
    """Four qubits on a plaquette: Q0 splits into Q1/Q2, which merge at Q3."""
    idle = {"Q0": MZ4_DECOUPLE_Q0, "Q1": WAITING_FREQUENCY, "Q2": WORKING_FREQUENCY, "Q3": MZ4_DECOUPLE_Q3}
    qubits = [_qubit(lab, f, coherent) for lab, f in idle.items()]
    couplings = [
        Coupling("Q0", "Q1", split_j),
        Coupling("Q0", "Q2", split_j),
        Coupling("Q1", "Q3", merge_j),
        Coupling("Q2", "Q3", merge_j),
    ]
    readout = {"Q2": ReadoutParams(chi=READOUT_CHI, kappa=READOUT_KAPPA)}
    return DeviceModel(qubits, couplings, readout)


def mz12_device(coherent: bool = True, j: float = HOPPING_Q0_Q2) -> DeviceModel:
    """Twelve qubits forming a ring Q0 -> path 1 / path 2 -> Q15.

    Only nearest neighbours along the two arms are coupled; every coupling
    uses the measured Q0-Q2 hopping rate.
    """
    qubits = [_qubit(lab, WORKING_FREQUENCY, coherent) for lab in MZ12_LABELS]
    couplings = []
    for path in (PATH_1, PATH_2):
        chain = ("Q0",) + path + ("Q15",)
        couplings += [Coupling(a, b, j) for a, b in zip(chain, chain[1:])]
    readout = {"Q2": ReadoutParams(chi=READOUT_CHI, kappa=READOUT_KAPPA)}
    return DeviceModel(qubits, couplings, readout)
