"""Command line entry point: ``ssb-lab <experiment>``, ``ssb-lab figure N``, ``ssb-lab list``.

Exit status is 0 when every check passed, 1 when a check failed or the
experiment reported an error (the report is still written) and 2 for
unusable configuration.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .experiments import (
    EXPERIMENTS,
    FIGURES,
    ConfigError,
    ExperimentConfig,
    catalog,
    emit_figure_data,
    run,
)
from .io import write_csv

EXIT_OK, EXIT_FAILED, EXIT_CONFIG = 0, 1, 2

# argparse dest -> config key, grouped by config section
_MODEL_FLAGS = {
    "alpha": "alpha",
    "a": "a",
    "b": "b",
    "lambda": "lam",
    "mu": "mu",
    "a_sextic": "a_sextic",
    "omega": "omega",
    "omega_plus": "omega_plus",
    "omega_minus": "omega_minus",
    "m": "m",
    "hbar": "hbar",
}
_GRID_FLAGS = {"grid_n": "n", "grid_xmin": "xmin", "grid_xmax": "xmax"}
_TOL_FLAGS = {"tol_degeneracy": "degeneracy", "tol_residual": "residual", "tol_grid": "grid"}
_TOP_FLAGS = ("levels", "trials", "seed", "jobs")


def _add_model_flags(p: argparse.ArgumentParser):
    g = p.add_argument_group("model parameters")
    g.add_argument("--alpha", type=float, help="barrier height of the square double well")
    g.add_argument("--a", type=float, help="outer wall (wells) or separation (figure 3)")
    g.add_argument("--b", type=float, help="barrier half width")
    g.add_argument("--lambda", dest="lambda", type=float, help="quartic coefficient")
    g.add_argument("--mu", type=float, help="quadratic coefficient")
    g.add_argument("--a-sextic", dest="a_sextic", type=float, help="sextic width parameter")
    g.add_argument("--omega", type=float)
    g.add_argument("--omega-plus", dest="omega_plus", type=float)
    g.add_argument("--omega-minus", dest="omega_minus", type=float)
    g.add_argument("--m", type=float, help="mass")
    g.add_argument("--hbar", type=float)


def _add_grid_flags(p: argparse.ArgumentParser):
    g = p.add_argument_group("grid")
    g.add_argument("--grid-n", dest="grid_n", type=int)
    g.add_argument("--grid-xmin", dest="grid_xmin", type=float)
    g.add_argument("--grid-xmax", dest="grid_xmax", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ssb-lab", description="Spontaneous symmetry breaking experiments.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    sub.add_parser("list", help="print the experiment and figure catalogue")

    fig = sub.add_parser("figure", help="write x, V(x) data for one of the potential figures")
    fig.add_argument("number", type=int, choices=sorted(FIGURES))
    fig.add_argument("--out", help="output directory (default: SSB_LAB_OUT or ./ssb-lab-out)")
    fig.add_argument("--points", type=int, help="number of samples")
    _add_grid_flags(fig)
    _add_model_flags(fig)

    for name, text in EXPERIMENTS.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", type=Path, help="JSON config; flags override its values")
        p.add_argument("--out", help="output directory (default: SSB_LAB_OUT or ./ssb-lab-out/<experiment>)")
        _add_grid_flags(p)
        _add_model_flags(p)
        t = p.add_argument_group("tolerances")
        t.add_argument("--tol-degeneracy", dest="tol_degeneracy", type=float)
        t.add_argument("--tol-residual", dest="tol_residual", type=float)
        t.add_argument("--tol-grid", dest="tol_grid", type=float)
        r = p.add_argument_group("run")
        r.add_argument("--levels", type=int, help="number of levels to compute")
        r.add_argument("--sweep", type=str, help="comma separated scan values (a or alpha)")
        r.add_argument("--trials", type=int)
        r.add_argument("--seed", type=int)
        r.add_argument("--jobs", type=int, default=None,
                       help="worker processes for sweeps (default: number of processors)")
    return parser


def _load_config_file(path: Path) -> dict:
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path} must hold a JSON object")
    return data


def _parse_sweep(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"--sweep needs comma separated numbers, got {text!r}") from None


def merge_config(args: argparse.Namespace) -> dict:
    """File values first, then every flag that was given on the command line."""
    raw = _load_config_file(args.config) if args.config else {}
    if raw.get("experiment", args.command) != args.command:
        raise ConfigError(f"config is for {raw['experiment']!r}, not {args.command!r}")
    raw["experiment"] = args.command
    for section, flags in (("model", _MODEL_FLAGS), ("grid", _GRID_FLAGS), ("tolerances", _TOL_FLAGS)):
        for flag, key in flags.items():
            val = getattr(args, flag)
            if val is not None:
                raw.setdefault(section, {})
                if not isinstance(raw[section], dict):
                    raise ConfigError(f"{section} must be an object")
                raw[section][key] = val
    for flag in _TOP_FLAGS:
        val = getattr(args, flag)
        if val is not None:
            raw[flag] = val
    if args.sweep is not None:
        raw["sweep"] = _parse_sweep(args.sweep)
    raw.setdefault("jobs", os.cpu_count() or 1)
    return raw


def _out_dir(args, default: str) -> Path:
    """``--out``, then ``SSB_LAB_OUT``, then the config file's ``output``, then ``default``."""
    if args.out:
        return Path(args.out)
    env = os.environ.get("SSB_LAB_OUT")
    return Path(env) if env else Path(default)


def _cmd_list() -> int:
    print("experiments:")
    width = max(len(n) for n in EXPERIMENTS)
    for name, text in catalog():
        print(f"  {name:<{width}}  {text}")
    print("figures:")
    for num, text in sorted(FIGURES.items()):
        print(f"  {num}  {text}")
    return EXIT_OK


def _cmd_figure(args) -> int:
    overrides = {}
    for flag, key in _MODEL_FLAGS.items():
        val = getattr(args, flag)
        if val is not None:
            overrides[key] = val
    for flag, key in _GRID_FLAGS.items():
        val = getattr(args, flag)
        if val is not None:
            overrides[key] = val
    if args.points is not None:
        overrides["n"] = args.points
    header, rows = emit_figure_data(args.number, overrides)
    out = _out_dir(args, "ssb-lab-out")
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"figure{args.number}.csv"
    write_csv(path, header, rows)
    print(path)
    return EXIT_OK


def _cmd_experiment(args) -> int:
    raw = merge_config(args)
    cfg = ExperimentConfig.from_dict(raw)
    out = _out_dir(args, raw.get("output") or str(Path("ssb-lab-out") / cfg.experiment))
    report = run(cfg, out=out)
    for c in report.checks:
        mark = "PASS" if c.passed else "FAIL"
        print(f"{mark} {c.name}: {c.value} {c.comparison} {c.tolerance}")
    for err in report.errors:
        print(f"ERROR {err}")
    print(f"{'passed' if report.passed else 'failed'}: {out / 'report.json'}")
    return EXIT_OK if report.passed else EXIT_FAILED


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "list":
            return _cmd_list()
        if args.command == "figure":
            return _cmd_figure(args)
        return _cmd_experiment(args)
    except ConfigError as exc:
        print(f"ssb-lab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
