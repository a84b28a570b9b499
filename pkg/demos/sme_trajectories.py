"""Homodyne trajectories of the monitored ring and their ensemble average.

Each trajectory follows the state conditioned on a continuous record of Q2.
Single records are noisy and single trajectories either keep or lose the
path-2 amplitude, but their average reproduces the Lindblad solution with
the same dephasing rate. The trace distance shrinks like 1/sqrt(n).

Run: python3 demos/sme_trajectories.py [--trajectories N] [--out DIR]
"""

import argparse
import os

import numpy as np

from mzsim import device as dm
from mzsim import lindblad as lb
from mzsim import presets
from mzsim import stochastic as st
from mzsim.experiments import mz12
from mzsim.output import LinePlot, Series, emit_svg
from mzsim.qlinalg import trace_distance

NS = 1e-9


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trajectories", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="demo_out")
    args = ap.parse_args()

    dev = presets.mz12_device()
    basis = dm.sector_basis(dev.n_qubits, 1)
    sched = mz12.mz12_schedule(dev, 5.921e6)
    init = "".join("1" if lab == "Q0" else "0" for lab in dev.labels)
    ref = lb.run_schedule(dev, sched, init, basis)

    for n in (args.trajectories // 4, args.trajectories):
        ens = st.run_trajectories(dev, sched, init, basis, st.SmeConfig(n_trajectories=n, seed=args.seed))
        d = [trace_distance(a, b) for a, b in zip(ens.trace.states, ref.states)]
        print(f"{n:5d} trajectories: max trace distance to Lindblad {max(d):.4f}")

    path2 = sum(ens.trace.observables[f"n_{q}"] for q in mz12.PATH_2)
    one = st.sample_trajectory(dev, sched, init, st.SmeConfig(seed=args.seed, store_states=True), basis)
    single = np.real(sum(one.states[:, basis.index(_bits(dev, q)), basis.index(_bits(dev, q))] for q in mz12.PATH_2))
    t = ref.times / NS
    fig = LinePlot(
        "Path-2 population at Gamma_m/2pi = 5.921 MHz",
        "time (ns)",
        "population",
        [
            Series("one trajectory", t, single),
            Series(f"mean of {args.trajectories}", t, path2),
            Series("Lindblad", t, mz12.path_population(ref, dev, mz12.PATH_2)),
        ],
    )
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "sme_path2.svg")
    with open(path, "wb") as fh:
        fh.write(emit_svg(fig))
    print(f"wrote {path}")


def _bits(dev, label):
    return "".join("1" if lab == label else "0" for lab in dev.labels)


if __name__ == "__main__":
    main()
