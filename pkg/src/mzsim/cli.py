"""Command-line front end: ``mzsim validate|run|sweep|align|demo-sme``.

Exit codes are 0 on success, 2 for configuration errors and 3 for engine errors.
"""

from __future__ import annotations

import argparse
import sys

from .config import ConfigError, ExperimentConfig, from_dict, parse_config
from .runner import EngineError, run, write_result

EXIT_OK, EXIT_CONFIG, EXIT_ENGINE = 0, 2, 3
SWEEPS = ("mz4", "mz4_tomo", "mz12", "zeno_sweep")


def _formats(text: str) -> list[str]:
    return [f.strip() for f in text.split(",") if f.strip()]


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mzsim", description="Monitored Mach-Zehnder lattice simulator.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, needs in (("validate", True), ("run", True), ("sweep", True), ("align", False), ("demo-sme", False)):
        s = sub.add_parser(name)
        s.add_argument("--config", required=needs, metavar="PATH")
        if name != "validate":
            s.add_argument("--seed", type=int)
            s.add_argument("--out", metavar="DIR")
            s.add_argument("--threads", type=int)
            s.add_argument("--format", type=_formats, metavar="csv,json,svg")
    return p


def _load(path: str | None, default_experiment: str) -> ExperimentConfig:
    if path is None:
        return from_dict({"experiment": default_experiment})
    try:
        with open(path, "rb") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", path) from exc
    return parse_config(text)


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        default = {"align": "align", "demo-sme": "sme_demo"}.get(args.command, "")
        cfg = _load(args.config, default)
        if args.command == "validate":
            print(f"ok: {cfg.experiment} config, hash {cfg.semantic_hash()}")
            return EXIT_OK
        expected = {"sweep": SWEEPS, "align": ("align",), "demo-sme": ("sme_demo",)}.get(args.command)
        if expected and cfg.experiment not in expected:
            raise ConfigError(f"{args.command} cannot run experiment {cfg.experiment!r}", "experiment")
        cfg = cfg.with_overrides(args.seed, args.out, args.format)
        result = run(cfg, args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except EngineError as exc:
        print(f"engine error: {exc}", file=sys.stderr)
        return EXIT_ENGINE
    out = cfg.data["output"]
    paths = write_result(result, out["directory"], out["formats"])
    print(f"{cfg.experiment}: wrote {len(paths)} files to {out['directory']}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
