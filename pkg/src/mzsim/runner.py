"""Dispatch a validated config to an experiment and collect tables and figures."""

from __future__ import annotations

import json
import math
import os
import warnings
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from . import __version__
from . import device as dm
from . import lindblad as lb
from . import stochastic as st
from .config import ConfigError, ExperimentConfig, build_device
from .experiments import alignment, mz4, mz12
from .experiments.fringe import fit_fringe
from .output import HeatMap, LinePlot, Series, emit_csv, emit_json_table, emit_svg
from .qinfo import complementarity_report, concurrence, project_single_excitation
from .qlinalg import trace_distance

MHZ, NS = 1e6, 1e-9


class EngineError(RuntimeError):
    """Numerical failure inside an experiment, with the experiment named."""


@dataclass
class ExperimentResult:
    manifest: dict
    tables: dict[str, dict] = field(default_factory=dict)
    figures: dict[str, bytes] = field(default_factory=dict)


def _options(cfg: ExperimentConfig) -> lb.SolverOptions:
    s = cfg.data["solver"]
    return lb.SolverOptions(s["output_dt_s"], s["rtol"], s["atol"], s["dt_max_s"])


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def run(cfg: ExperimentConfig, threads: int | None = None) -> ExperimentResult:
    """Execute ``cfg``; tables depend only on the config, never on ``threads``."""
    started = _now()
    handler = _HANDLERS[cfg.experiment]
    try:
        tables, figures = handler(cfg, threads)
    except ConfigError:
        raise
    except (ArithmeticError, RuntimeError, np.linalg.LinAlgError, ValueError) as exc:
        raise EngineError(f"{cfg.experiment}: {exc}") from exc
    manifest = {
        "experiment": cfg.experiment,
        "config_hash": cfg.semantic_hash(),
        "seed": cfg.seed,
        "version": __version__,
        "started_utc": started,
        "finished_utc": _now(),
        "tables": {name: len(next(iter(t.values()), [])) for name, t in tables.items()},
        "figures": sorted(figures),
        "config": cfg.data,
    }
    return ExperimentResult(manifest, tables, {k: emit_svg(v) for k, v in figures.items()})


def write_result(result: ExperimentResult, directory: str, formats) -> list[str]:
    """Write ``manifest.json`` plus the requested formats; returns written paths."""
    os.makedirs(directory, exist_ok=True)
    written = []

    def put(name, data: bytes):
        path = os.path.join(directory, name)
        with open(path, "wb") as fh:
            fh.write(data)
        written.append(path)

    put("manifest.json", (json.dumps(result.manifest, indent=2, sort_keys=True) + "\n").encode())
    if "csv" in formats:
        for name, table in result.tables.items():
            put(f"{name}.csv", emit_csv(table))
    if "json" in formats:
        payload = {name: emit_json_table(t) for name, t in result.tables.items()}
        put("tables.json", (json.dumps(payload, sort_keys=True, indent=1) + "\n").encode())
    if "svg" in formats:
        for name, svg in result.figures.items():
            put(f"{name}.svg", svg)
    return written


# ---- experiments -----------------------------------------------------------


def _run_mz4(cfg, threads):
    dev = build_device(cfg)
    grid = [float(g) for g in cfg.data["sweep"]["gamma_hz"]]
    delta = np.array(cfg.data["sweep"]["delta_hz"], dtype=float)
    timing = mz4.Mz4Timing()
    tables, series, fits = {}, [], []
    for k, g in enumerate(grid):
        scan = mz4.run_mz4(dev, g, delta, options=_options(cfg), threads=threads)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            fit = fit_fringe(scan)
        fits.append((fit, bool(caught)))
        tables[f"fringe_{k:02d}"] = {"delta_hz": delta, "p_i": scan.populations, "fit": fit.model(delta, scan.t_p)}
        series.append(Series(f"{g / MHZ:.3f} MHz", delta / MHZ, scan.populations))
    law = [math.exp(-2 * math.pi * g * timing.measure) for g in grid]
    tables["visibility"] = {
        "gamma_bar_hz": list(grid),
        "visibility": [f.visibility for f, _ in fits],
        "offset": [f.offset for f, _ in fits],
        "amplitude": [f.amplitude for f, _ in fits],
        "phase_rad": [f.phase for f, _ in fits],
        "residual_rms": [f.residual_rms for f, _ in fits],
        "clipped": [c for _, c in fits],
        "attenuation_law": law,
    }
    gm = [g / MHZ for g in grid]
    figures = {
        "fringes": LinePlot("Interference fringes", "delta/2pi (MHz)", "P_I", series),
        "visibility": LinePlot(
            "Visibility against average dephasing",
            "Gamma_m/2pi (MHz)",
            "V",
            [Series("fit", gm, [f.visibility for f, _ in fits]), Series("exp(-2pi Gamma t_m)", gm, law)],
        ),
    }
    return tables, figures


def _run_mz4_tomo(cfg, threads):
    from .parallel import pmap

    dev = build_device(cfg)
    grid = [float(g) for g in cfg.data["sweep"]["gamma_hz"]]
    states = pmap(lambda g: mz4.run_mz4_tomography(dev, g, options=_options(cfg)), grid, threads)
    long = {"gamma_index": [], "gamma_bar_hz": [], "row": [], "col": [], "rho": []}
    metrics = {k: [] for k in ("gamma_bar_hz", "concurrence", "visibility", "purity", "entropy", "gap_purity", "gap_entropy", "imbalance")}
    for k, (g, rho) in enumerate(zip(grid, states)):
        for i in range(4):
            for j in range(4):
                long["gamma_index"].append(k)
                long["gamma_bar_hz"].append(g)
                long["row"].append(i)
                long["col"].append(j)
                long["rho"].append(complex(rho[i, j]))
        rep = complementarity_report(project_single_excitation(rho))
        metrics["gamma_bar_hz"].append(g)
        metrics["concurrence"].append(concurrence(rho))
        metrics["visibility"].append(rep.visibility)
        metrics["purity"].append(rep.purity)
        metrics["entropy"].append(rep.entropy)
        metrics["gap_purity"].append(rep.bound_gap_purity)
        metrics["gap_entropy"].append(rep.bound_gap_entropy)
        metrics["imbalance"].append(rep.imbalance)
    gm = [g / MHZ for g in grid]
    fig = LinePlot(
        "Arm-qubit metrics after the which-way stage",
        "Gamma_m/2pi (MHz)",
        "value",
        [Series(name, gm, metrics[name]) for name in ("concurrence", "visibility", "purity", "entropy")],
    )
    return {"states": long, "metrics": metrics}, {"metrics": fig}


def _population_table(trace, labels):
    pops = trace.populations()
    table = {"time_s": trace.times}
    for i, lab in enumerate(labels):
        table[f"n_{lab}"] = pops[:, i]
    return table


def _heat(trace_pops, times, labels, title):
    return HeatMap(title, "time (ns)", "qubit", np.asarray(times) / NS, labels, np.asarray(trace_pops).T, "<n>")


def _run_mz12(cfg, threads):
    from .parallel import pmap

    dev = build_device(cfg)
    grid = [float(g) for g in cfg.data["sweep"]["gamma_hz"]]
    traces = pmap(lambda g: mz12.run_mz12(dev, g, options=_options(cfg)), grid, threads)
    tables, figures = {}, {}
    summary = {"gamma_m_hz": [], "path1_peak": [], "path2_peak": [], "n15_peak": []}
    for k, (g, tr) in enumerate(zip(grid, traces)):
        tables[f"populations_{k:02d}"] = _population_table(tr, dev.labels)
        figures[f"populations_{k:02d}"] = _heat(tr.populations(), tr.times, dev.labels, f"Populations, Gamma_m/2pi = {g / MHZ:.3f} MHz")
        summary["gamma_m_hz"].append(g)
        summary["path1_peak"].append(float(mz12.path_population(tr, dev, mz12.PATH_1).max()))
        summary["path2_peak"].append(float(mz12.path_population(tr, dev, mz12.PATH_2).max()))
        summary["n15_peak"].append(float(tr.populations()[:, dev.index("Q15")].max()))
    tables["summary"] = summary
    return tables, figures


def _run_zeno(cfg, threads):
    dev = build_device(cfg)
    grid = [float(g) for g in cfg.data["sweep"]["gamma_hz"]]
    res = mz12.zeno_metrics(dev, grid, options=_options(cfg), threads=threads)
    metrics = {
        "gamma_m_hz": res.gamma_grid,
        "concurrence": res.concurrence,
        "purity": res.purity,
        "entropy": res.entropy,
        "gap_purity": [r.bound_gap_purity for r in res.reports],
        "gap_entropy": [r.bound_gap_entropy for r in res.reports],
        "path2_first_pass": res.path2_first_pass,
        "extraction_time_s": [res.extraction_time] * len(res.gamma_grid),
    }
    g_idx, g_val, t_col, q_idx, q_lab, pop = [], [], [], [], [], []
    for k, g in enumerate(res.gamma_grid):
        for ti, t in enumerate(res.times):
            for qi, lab in enumerate(res.labels):
                g_idx.append(k)
                g_val.append(float(g))
                t_col.append(float(t))
                q_idx.append(qi)
                q_lab.append(lab)
                pop.append(float(res.population_traces[k, ti, qi]))
    heat = {"gamma_index": g_idx, "gamma_m_hz": g_val, "time_s": t_col, "qubit_index": q_idx, "qubit": q_lab, "population": pop}
    gm = res.gamma_grid / MHZ
    figures = {
        "metrics": LinePlot(
            f"Q4-Q8 metrics at t = {res.extraction_time / NS:.0f} ns",
            "Gamma_m/2pi (MHz)",
            "value",
            [Series("C_Q4Q8", gm, res.concurrence), Series("P_s", gm, res.purity), Series("S_s (bits)", gm, res.entropy)],
        )
    }
    for k, g in enumerate(res.gamma_grid):
        figures[f"heatmap_{k:02d}"] = _heat(res.population_traces[k], res.times, res.labels, f"Populations, Gamma_m/2pi = {g / MHZ:.3f} MHz")
    return {"metrics": metrics, "heatmap": heat}, figures


def _run_align(cfg, threads):
    a = cfg.data["align"]
    rng = np.random.default_rng(cfg.seed)
    rows = {"cost": [], "qubit": [], "injected_hz": [], "target_offset_hz": [], "recovered_offset_hz": [], "error_hz": []}
    costs = {"cost": [], "initial_cost": [], "final_cost": [], "evaluations": []}
    series = []
    for name in a["costs"]:
        kind = alignment.CostKind(name)
        n = len(alignment.AlignmentProblem(kind).free_qubits)
        problem = alignment.AlignmentProblem(
            kind,
            alignment.random_crosstalk(n, rng, a["max_crosstalk"]),
            rng.uniform(-a["max_shift_hz"], a["max_shift_hz"], n),
            budget=a["budget"],
            options=_options(cfg),
        )
        res = alignment.align_frequencies(problem)
        for q, s, t, r in zip(problem.free_qubits, problem.injected, problem.target_offsets, res.offsets):
            rows["cost"].append(name)
            rows["qubit"].append(q)
            rows["injected_hz"].append(float(s))
            rows["target_offset_hz"].append(float(t))
            rows["recovered_offset_hz"].append(float(r))
            rows["error_hz"].append(float(r - t))
        costs["cost"].append(name)
        costs["initial_cost"].append(res.initial_cost)
        costs["final_cost"].append(res.cost)
        costs["evaluations"].append(res.evaluations)
        best = np.minimum.accumulate([f for _, f in res.optimizer.trace])
        series.append(Series(name, np.arange(1, len(best) + 1), np.log10(np.maximum(best, 1e-300))))
    fig = LinePlot("Alignment convergence", "cost evaluations", "log10 best cost", series)
    return {"alignment": rows, "costs": costs}, {"convergence": fig}


def _run_sme(cfg, threads):
    dev = build_device(cfg)
    s = cfg.data["solver"]
    gamma = cfg.data["sweep"]["gamma_hz"][0]
    basis = dm.sector_basis(dev.n_qubits, 1)
    sched = mz12.mz12_schedule(dev, gamma)
    init = "".join("1" if lab == "Q0" else "0" for lab in dev.labels)
    sme_cfg = st.SmeConfig(dt=s["sme_dt_s"], n_trajectories=s["trajectories"], seed=s["seed"], output_dt=s["output_dt_s"])
    ens = st.run_trajectories(dev, sched, init, basis, sme_cfg, threads, keep_records=False)
    first = st.sample_trajectory(dev, sched, init, sme_cfg, basis, index=0)
    ref = lb.run_schedule(dev, sched, init, basis, _options(cfg))
    mean = ens.trace
    table = {"time_s": mean.times}
    ref_pops = ref.populations()
    for i, lab in enumerate(dev.labels):
        table[f"mean_n_{lab}"] = mean.observables[f"n_{lab}"]
        table[f"stderr_n_{lab}"] = mean.errors[f"n_{lab}"]
        table[f"lindblad_n_{lab}"] = ref_pops[:, i]
    dist = {"time_s": mean.times, "trace_distance": [trace_distance(a, b) for a, b in zip(mean.states, ref.states)]}
    record = {"time_s": first.times, "signal": first.signal[:, 0] if first.signal.size else first.signal.ravel()}
    t_ns = mean.times / NS
    p2_mean = sum(mean.observables[f"n_{q}"] for q in mz12.PATH_2)
    p2_ref = mz12.path_population(ref, dev, mz12.PATH_2)
    figures = {
        "path2": LinePlot(
            f"Path-2 population, {s['trajectories']} trajectories",
            "time (ns)",
            "population",
            [Series("trajectory mean", t_ns, p2_mean), Series("Lindblad", t_ns, p2_ref)],
        ),
        "record": LinePlot("Homodyne record of trajectory 0", "time (ns)", "I (arb.)", [Series("I", first.times / NS, record["signal"])]),
    }
    return {"ensemble": table, "trace_distance": dist, "record_000": record}, figures


_HANDLERS = {
    "mz4": _run_mz4,
    "mz4_tomo": _run_mz4_tomo,
    "mz12": _run_mz12,
    "zeno_sweep": _run_zeno,
    "align": _run_align,
    "sme_demo": _run_sme,
}
