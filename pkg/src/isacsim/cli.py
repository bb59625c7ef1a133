"""
Command-line experiment runner.

    isacsim sweep --preset fig6 --seeds 20 --out fig6.csv
    isacsim analytic --preset fig3 --scale paper
    isacsim sweep --config my_run.yaml --seed 7

CSV goes to ``--out`` (or stdout); progress, seeds and the resolved
configuration go to stderr, or next to the CSV as ``<out>.config.json``.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

import yaml

from .experiments import (
    PRESETS,
    ConfigError,
    ExperimentConfig,
    columns_for,
    config_json,
    preset,
    run_analytic,
    run_sweep,
    to_csv,
)
from .waveform import NumerologyConfig

log = logging.getLogger("isacsim")

# yaml key path -> (ExperimentConfig field, expected type)
_FIELDS = {
    "preset": (None, str),
    "name": ("name", str),
    "kind": ("kind", str),
    "scale": ("scale", str),
    "scenario.distances_m": ("distances_m", list),
    "scenario.gamma0_db": ("gamma0_db", (float, type(None))),
    "scenario.speed_mps": ("speed_mps", float),
    "scenario.anchor.distance_m": ("anchor_distance_m", float),
    "scenario.anchor.sinr_db": ("anchor_sinr_db", float),
    "receivers": ("receivers", list),
    "policies": ("policies", list),
    "fixed_n_comp": ("fixed_n_comp", int),
    "sweep.axis": ("sweep_axis", str),
    "sweep.values": ("sweep_values", list),
    "sweep.n_comp_step": ("n_comp_step", int),
    "order": ("order", int),
    "n_seeds": ("n_seeds", int),
    "base_seed": ("base_seed", int),
    "output": ("output", (str, type(None))),
    "jobs": ("jobs", int),
}
_NUMEROLOGY = {f.name: f.type for f in dataclasses.fields(NumerologyConfig)}


def _key_lines(node, prefix="", out=None):
    """Map dotted key paths of a composed YAML mapping to 1-based line numbers."""
    out = {} if out is None else out
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            path = f"{prefix}{k.value}"
            out[path] = k.start_mark.line + 1
            _key_lines(v, path + ".", out)
    return out


def _flatten(d, prefix=""):
    for k, v in d.items():
        path = f"{prefix}{k}"
        if isinstance(v, dict) and path not in ("numerology",):
            yield from _flatten(v, path + ".")
        else:
            yield path, v


def _coerce(path, value, typ, where):
    types = typ if isinstance(typ, tuple) else (typ,)
    if float in types and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    if isinstance(value, bool) or not isinstance(value, types):
        names = " or ".join(t.__name__ for t in types)
        raise ConfigError(f"{where}{path}: expected {names}, got {type(value).__name__}")
    return value


def load_config(path: str | Path, scale: str | None = None) -> ExperimentConfig:
    """Read a YAML experiment file, optionally layered on a preset."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"{path}: cannot read config ({e.strerror})") from None
    try:
        node = yaml.compose(text)
        data = yaml.safe_load(text) or {}
    except yaml.MarkedYAMLError as e:
        mark = e.problem_mark
        line = f":{mark.line + 1}" if mark is not None else ""
        raise ConfigError(f"{path}{line}: {e.problem}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    lines = _key_lines(node)

    def where(p):
        # a missing key is reported at its nearest present parent
        while p and p not in lines:
            p = p.rpartition(".")[0]
        return f"{path}:{lines[p]}: " if p else f"{path}: "

    base = data.get("preset")
    sc = scale or data.get("scale", "small")
    ec = preset(base, sc) if base is not None else ExperimentConfig(scale=sc)
    for p, v in _flatten(data):
        if p == "numerology":
            if not isinstance(v, dict):
                raise ConfigError(f"{where(p)}numerology: expected a mapping")
            for k in v:
                if k not in _NUMEROLOGY:
                    raise ConfigError(f"{where(p + '.' + k)}numerology.{k}: unknown field")
            try:
                ec.numerology = NumerologyConfig(**{**dataclasses.asdict(ec.resolved_numerology()), **v})
            except (TypeError, ValueError) as e:
                raise ConfigError(f"{where(p)}numerology: {e}") from None
            continue
        if p not in _FIELDS:
            raise ConfigError(f"{where(p)}{p}: unknown field")
        attr, typ = _FIELDS[p]
        v = _coerce(p, v, typ, where(p))
        if attr is not None:
            setattr(ec, attr, v)
    if scale is not None:
        ec.scale = scale
    try:
        ec.validate()
    except ConfigError as e:
        field = str(e).split(":", 1)[0]
        raise ConfigError(f"{where(field)}{e}") from None
    return ec


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="isacsim", description=__doc__.split("\n\n")[0].strip())
    sub = ap.add_subparsers(dest="command", required=True)
    for cmd, helptext in (
        ("sweep", "Monte-Carlo simulation sweep"),
        ("analytic", "closed-form curves only, no simulation"),
    ):
        p = sub.add_parser(cmd, help=helptext)
        p.add_argument("--preset", choices=PRESETS)
        p.add_argument("--config", metavar="PATH", help="YAML experiment file")
        p.add_argument("--seed", type=int, help="base seed")
        p.add_argument("--seeds", type=int, help="number of Monte-Carlo seeds per grid point")
        p.add_argument("--scale", choices=("paper", "small"))
        p.add_argument("--out", metavar="PATH", help="CSV output path (default stdout)")
        p.add_argument("--jobs", type=int, help="worker processes")
        p.add_argument("-q", "--quiet", action="store_true")
    return ap


def resolve(args) -> ExperimentConfig:
    if args.config:
        ec = load_config(args.config, scale=args.scale)
        if args.preset:
            raise ConfigError("use either --preset or a 'preset:' key in --config, not both")
    elif args.preset:
        ec = preset(args.preset, args.scale or "small")
    else:
        raise ConfigError("one of --preset or --config is required")
    if args.seed is not None:
        ec.base_seed = args.seed
    if args.seeds is not None:
        ec.n_seeds = args.seeds
    if args.out is not None:
        ec.output = args.out
    if args.jobs is not None:
        ec.jobs = args.jobs
    return ec.validate()


def _setup_logging(quiet: bool) -> None:
    for h in list(log.handlers):
        log.removeHandler(h)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(message)s"))
    log.addHandler(handler)
    log.setLevel(logging.WARNING if quiet else logging.INFO)
    log.propagate = False


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _setup_logging(args.quiet)
    try:
        ec = resolve(args)
        analytic_only = args.command == "analytic"
        rows = run_analytic(ec) if analytic_only else run_sweep(ec)
        text = to_csv(rows, columns_for(ec, analytic_only))
    except ConfigError as e:
        print(f"isacsim: config error: {e}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as e:
        print(f"isacsim: error: {e}", file=sys.stderr)
        return 1

    if ec.output:
        out = Path(ec.output)
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        out.with_name(out.name + ".config.json").write_text(config_json(ec) + "\n", encoding="utf-8")
        log.info("wrote %d rows to %s", len(rows), out)
    else:
        sys.stdout.write(text)
        log.info("resolved config:\n%s", config_json(ec))
    return 0


if __name__ == "__main__":
    sys.exit(main())
