"""Four-qubit interferometer: fringe visibility against which-way dephasing.

A photon leaves Q0, splits into the arms Q1 and Q2, and Q2 is dephased at an
average rate Gamma_bar for 200 ns. Sweeping the Q1 detuning during a 100 ns
phase stage gives a fringe in the Q3 population. The fitted visibility
tracks exp(-2 pi Gamma_bar 200 ns) and the arm coherence 2|c'|.

Run: python3 demos/mz4_fringes.py [--out DIR]
"""

import argparse
import math
import os
import warnings

import numpy as np

from mzsim import presets
from mzsim.experiments import fringe, mz4
from mzsim.output import LinePlot, Series, emit_svg

MHZ = 1e6


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="demo_out")
    args = ap.parse_args()

    dev = presets.mz4_device()
    delta = np.arange(0, 31e6, 1e6)
    rates = mz4.REFERENCE_GAMMA_BAR
    series = []
    print(f"{'Gamma_bar/2pi':>14} {'V fit':>8} {'2|c|':>8} {'exp law':>8}")
    for g in rates:
        scan = mz4.run_mz4(dev, g, delta)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")  # the ideal fringe may clip to V = 1
            fit = fringe.fit_fringe(scan)
        c = abs(mz4.arm_state(dev, g).c)
        law = math.exp(-2 * math.pi * g * mz4.MEASUREMENT_WINDOW)
        print(f"{g / MHZ:11.3f} MHz {fit.visibility:8.4f} {2 * c:8.4f} {law:8.4f}")
        series.append(Series(f"{g / MHZ:.3f} MHz", delta / MHZ, scan.populations))

    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "mz4_fringes.svg")
    with open(path, "wb") as fh:
        fh.write(emit_svg(LinePlot("Q3 population against phase detuning", "delta/2pi (MHz)", "P_I", series)))
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
