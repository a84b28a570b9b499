"""JSON experiment configuration: schema, defaults, validation and hashing.

Every dimensioned quantity carries its unit in the key (``_hz`` or ``_s``).
Unknown keys are rejected, so a unit-less key such as ``t1`` is an error.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass
from typing import Any

import jsonschema

from . import device as dm
from . import presets
from .ode import MIN_RTOL
from .readout import DEFAULT_PHOTON_GAIN, ReadoutParams

EXPERIMENTS = ("mz4", "mz4_tomo", "mz12", "zeno_sweep", "align", "sme_demo")
FORMATS = ("csv", "json", "svg")
COST_KINDS = ("mz4_stage1", "mz4_stage4", "mz12")


class ConfigError(ValueError):
    """Invalid configuration; ``path`` names the offending JSON location."""

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


def _num(minimum=None, exclusive=None):
    s: dict[str, Any] = {"type": "number"}
    if minimum is not None:
        s["minimum"] = minimum
    if exclusive is not None:
        s["exclusiveMinimum"] = exclusive
    return s


def _obj(props, required=()):
    return {"type": "object", "properties": props, "required": list(required), "additionalProperties": False}


_QUBIT = _obj(
    {
        "label": {"type": "string", "minLength": 1},
        "idle_frequency_hz": {"type": "number", "exclusiveMinimum": 1e9, "exclusiveMaximum": 2e10},
        "anharmonicity_hz": {"type": "number"},
        "t1_s": {"anyOf": [_num(exclusive=0), {"type": "null"}]},
        "tphi_s": {"anyOf": [_num(exclusive=0), {"type": "null"}]},
    },
    ["label", "idle_frequency_hz"],
)
_COUPLING = _obj({"a": {"type": "string"}, "b": {"type": "string"}, "j_hz": {"type": "number"}}, ["a", "b", "j_hz"])
_READOUT = _obj(
    {
        "chi_hz": {"type": "number"},
        "kappa_hz": _num(exclusive=0),
        "g_hz": {"anyOf": [{"type": "number"}, {"type": "null"}]},
        "detuning_hz": {"anyOf": [{"type": "number"}, {"type": "null"}]},
        "photon_gain": _num(exclusive=0),
    },
    ["chi_hz", "kappa_hz"],
)
_GRID = {"type": "array", "items": _num(minimum=0)}

SCHEMA = _obj(
    {
        "experiment": {"enum": list(EXPERIMENTS)},
        "device": _obj(
            {
                "preset": {"enum": ["mz4", "mz12", None]},
                "coherent": {"type": "boolean"},
                "qubits": {"type": "array", "items": _QUBIT, "minItems": 1},
                "couplings": {"type": "array", "items": _COUPLING},
                "readout": {"type": "object", "additionalProperties": _READOUT},
            }
        ),
        "sweep": _obj(
            {
                "gamma_hz": {**_GRID, "minItems": 1},
                "delta_hz": {"type": "array", "items": {"type": "number"}},
            }
        ),
        "solver": _obj(
            {
                "output_dt_s": _num(exclusive=0),
                "rtol": _num(minimum=MIN_RTOL),
                "atol": _num(exclusive=0),
                "dt_max_s": {"anyOf": [_num(exclusive=0), {"type": "null"}]},
                "sme_dt_s": _num(exclusive=0),
                "trajectories": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer", "minimum": 0},
            }
        ),
        "align": _obj(
            {
                "costs": {"type": "array", "items": {"enum": list(COST_KINDS)}, "minItems": 1},
                "budget": {"type": "integer", "minimum": 1},
                "max_crosstalk": {"type": "number", "minimum": 0, "exclusiveMaximum": 0.5},
                "max_shift_hz": _num(minimum=0),
            }
        ),
        "output": _obj(
            {
                "directory": {"type": "string"},
                "formats": {"type": "array", "items": {"enum": list(FORMATS)}, "uniqueItems": True},
            }
        ),
    },
    ["experiment"],
)

_REFERENCE_DELTA = [1e6 * k for k in range(31)]

DEFAULT_SWEEPS = {
    "mz4": {"gamma_hz": [0.0, 0.333e6, 0.748e6, 1.330e6, 2.365e6], "delta_hz": _REFERENCE_DELTA},
    "mz4_tomo": {"gamma_hz": [0.0, 0.333e6, 0.748e6, 1.330e6, 2.365e6, 3.695e6], "delta_hz": []},
    "mz12": {"gamma_hz": [0.0, 5.921e6, 11.195e6, 18.134e6], "delta_hz": []},
    "zeno_sweep": {"gamma_hz": [0.0, 2e6, 4e6, 5.921e6, 8e6, 11.195e6, 14e6, 18.134e6, 20e6], "delta_hz": []},
    "align": {"gamma_hz": [0.0], "delta_hz": []},
    "sme_demo": {"gamma_hz": [5.921e6], "delta_hz": []},
}

DEFAULTS = {
    "device": {"preset": None, "coherent": True},
    "solver": {"output_dt_s": 1e-9, "rtol": 1e-8, "atol": 1e-10, "dt_max_s": None, "sme_dt_s": 1e-10, "trajectories": 200, "seed": 0},
    "align": {"costs": list(COST_KINDS), "budget": 500, "max_crosstalk": 0.05, "max_shift_hz": 1e6},
    "output": {"directory": "out", "formats": ["csv", "json", "svg"]},
}

_PRESET_FOR = {"mz4": "mz4", "mz4_tomo": "mz4", "mz12": "mz12", "zeno_sweep": "mz12", "sme_demo": "mz12", "align": None}
_REQUIRED_LABELS = {
    "mz4": ("Q0", "Q1", "Q2", "Q3"),
    "mz4_tomo": ("Q0", "Q1", "Q2", "Q3"),
    "mz12": ("Q0", "Q15") + presets.PATH_1 + presets.PATH_2,
    "zeno_sweep": ("Q0", "Q15") + presets.PATH_1 + presets.PATH_2,
    "sme_demo": ("Q0", "Q15") + presets.PATH_1 + presets.PATH_2,
}


def _path(parts) -> str:
    out = ""
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out


def _schema_error(err: jsonschema.ValidationError) -> ConfigError:
    path = _path(err.absolute_path)
    if err.validator == "additionalProperties":
        extra = sorted(set(err.instance) - set(err.schema.get("properties", {})))
        hint = ""
        if any(not (k.endswith("_hz") or k.endswith("_s")) for k in extra):
            hint = "; dimensioned values need a unit suffix such as _hz or _s"
        where = _path(list(err.absolute_path) + [extra[0]]) if extra else path
        return ConfigError(f"unknown key {extra[0]!r}{hint}", where)
    return ConfigError(err.message, path)


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated configuration with defaults filled in (``data`` is plain JSON)."""

    data: dict

    @property
    def experiment(self) -> str:
        return self.data["experiment"]

    @property
    def seed(self) -> int:
        return self.data["solver"]["seed"]

    def with_overrides(self, seed: int | None = None, out: str | None = None, formats: list[str] | None = None) -> "ExperimentConfig":
        d = copy.deepcopy(self.data)
        if seed is not None:
            d["solver"]["seed"] = int(seed)
        if out is not None:
            d["output"]["directory"] = out
        if formats is not None:
            d["output"]["formats"] = list(formats)
        return from_dict(d)

    def semantic_hash(self) -> str:
        """SHA-256 of the canonical config without the output section."""
        d = {k: v for k, v in self.data.items() if k != "output"}
        return hashlib.sha256(canonical_json(_as_floats(d)).encode()).hexdigest()


def _as_floats(obj):
    """Map every number to float so that ``1e6`` and ``1000000`` hash alike."""
    if isinstance(obj, dict):
        return {k: _as_floats(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_as_floats(v) for v in obj]
    if isinstance(obj, (int, float)) and not isinstance(obj, bool):
        return float(obj)
    return obj


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def _fill(d: dict) -> dict:
    out = copy.deepcopy(d)
    for section, defaults in DEFAULTS.items():
        merged = copy.deepcopy(defaults)
        merged.update(out.get(section, {}))
        out[section] = merged
    sweep = copy.deepcopy(DEFAULT_SWEEPS[out["experiment"]])
    sweep.update(out.get("sweep", {}))
    out["sweep"] = sweep
    return out


def from_dict(d: dict) -> ExperimentConfig:
    err = jsonschema.exceptions.best_match(jsonschema.Draft202012Validator(SCHEMA).iter_errors(d))
    if err is not None:
        raise _schema_error(err)
    full = _fill(d)
    _check_references(full)
    return ExperimentConfig(full)


def parse_config(text: str | bytes) -> ExperimentConfig:
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON: {exc.msg} (line {exc.lineno})") from exc
    if not isinstance(d, dict):
        raise ConfigError("top level must be an object")
    return from_dict(d)


def serialize(cfg: ExperimentConfig) -> str:
    return json.dumps(cfg.data, sort_keys=True, indent=2) + "\n"


def _check_references(d: dict) -> None:
    dev = d["device"]
    qubits = dev.get("qubits")
    if qubits is None:
        preset = dev["preset"] or _PRESET_FOR[d["experiment"]]
        if preset is None and d["experiment"] != "align":
            raise ConfigError("either a preset or explicit qubits is required", "device")
        labels = None
    else:
        if dev["preset"] is not None:
            raise ConfigError("give either a preset or explicit qubits, not both", "device.preset")
        labels = [q["label"] for q in qubits]
        if len(set(labels)) != len(labels):
            raise ConfigError("duplicate qubit labels", "device.qubits")
        for k, c in enumerate(dev.get("couplings", [])):
            for end in ("a", "b"):
                if c[end] not in labels:
                    raise ConfigError(f"unknown qubit {c[end]!r}", f"device.couplings[{k}].{end}")
            if c["a"] == c["b"]:
                raise ConfigError("self coupling", f"device.couplings[{k}]")
        for lab in dev.get("readout", {}):
            if lab not in labels:
                raise ConfigError(f"unknown qubit {lab!r}", f"device.readout.{lab}")
    if labels is not None and d["experiment"] in _REQUIRED_LABELS:
        missing = [q for q in _REQUIRED_LABELS[d["experiment"]] if q not in labels]
        if missing:
            raise ConfigError(f"experiment {d['experiment']} needs qubits {missing}", "device.qubits")
    if d["experiment"] == "align" and qubits is not None:
        raise ConfigError("alignment runs on the built-in lattices; omit device.qubits", "device.qubits")
    grid = d["sweep"]["gamma_hz"]
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ConfigError("grid must be sorted ascending", "sweep.gamma_hz")
    delta = d["sweep"]["delta_hz"]
    if any(b <= a for a, b in zip(delta, delta[1:])):
        raise ConfigError("grid must be strictly increasing", "sweep.delta_hz")
    s = d["solver"]
    ratio = s["output_dt_s"] / s["sme_dt_s"]
    if abs(ratio - round(ratio)) > 1e-9 * ratio or round(ratio) < 1:
        raise ConfigError("must divide solver.output_dt_s into whole steps", "solver.sme_dt_s")
    if d["experiment"] == "mz4" and len(delta) < 6:
        raise ConfigError("fringe fits need at least 6 points", "sweep.delta_hz")


def build_device(cfg: ExperimentConfig) -> dm.DeviceModel:
    dev = cfg.data["device"]
    if dev.get("qubits") is None:
        preset = dev["preset"] or _PRESET_FOR[cfg.experiment]
        factory = presets.mz4_device if preset == "mz4" else presets.mz12_device
        return factory(coherent=dev["coherent"])
    qubits = [
        dm.QubitSpec(q["label"], q["idle_frequency_hz"], q.get("anharmonicity_hz", -220e6), q.get("t1_s"), q.get("tphi_s"))
        for q in dev["qubits"]
    ]
    couplings = [dm.Coupling(c["a"], c["b"], c["j_hz"]) for c in dev.get("couplings", [])]
    readout = {
        lab: ReadoutParams(r["chi_hz"], r["kappa_hz"], r.get("g_hz"), r.get("detuning_hz"), r.get("photon_gain", DEFAULT_PHOTON_GAIN))
        for lab, r in dev.get("readout", {}).items()
    }
    try:
        return dm.DeviceModel(qubits, couplings, readout)
    except ValueError as exc:
        raise ConfigError(str(exc), "device") from exc
