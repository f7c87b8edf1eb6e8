"""Named experiments, their configuration and the report they produce.

Each experiment turns one claim into a list of :class:`Check` records
(measured value, tolerance, comparison, verdict) and writes its tables
as CSV next to ``report.json``. Nothing in a report depends on the clock
or on the machine, so identical configs give byte-identical files.
"""

from __future__ import annotations

import math
import os
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, NamedTuple

import numpy as np

from . import __version__
from .eigen import (
    DEFAULT_DEGENERACY_TOL,
    EigenSolverError,
    cluster_degeneracies,
    eigensolve,
    residual_norm,
    solver_tolerance,
)
from .io import write_csv, write_json
from .lattice import assemble_hamiltonian, build_grid, parity_sector, split_domain
from .models import (
    GridTooCoarse,
    annihilator_residual,
    double_infinite_well,
    double_oscillator,
    model_from_dict,
    quartic_sombrero,
    sextic_factorized,
    square_double_well,
    uinf_eigenfunction,
)
from .quantize import WellGeometry, find_subbarrier_levels, splitting_sweep, squared_condition
from .spinor import (
    analytic_spectrum,
    analytic_spinor_spectrum,
    build_spinor_model,
    ground_pair,
    hamiltonian as spinor_hamiltonian,
    sigma3_commutator_check,
    to_field_form,
)
from .symmetry import (
    SymmetryError,
    build_nonoverlapping_pair,
    detect_ssb,
    involution,
    parity,
    project_right,
    random_involution,
    sigma3,
    symmetric_basis,
)

__all__ = [
    "EXPERIMENTS",
    "FIGURES",
    "Check",
    "ConfigError",
    "ExperimentConfig",
    "Report",
    "catalog",
    "emit_figure_data",
    "run",
]

SCHEMA = 1
_EPS = np.finfo(float).eps


class ConfigError(ValueError):
    pass


class Check(NamedTuple):
    name: str
    value: float | int | bool | None
    tolerance: float | int | bool | None
    comparison: str
    passed: bool

    def to_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "tolerance": self.tolerance,
                "comparison": self.comparison, "passed": self.passed}


_OPS: dict[str, Callable] = {
    "<": lambda v, t: v < t,
    "<=": lambda v, t: v <= t,
    ">": lambda v, t: v > t,
    ">=": lambda v, t: v >= t,
    "==": lambda v, t: v == t,
}


def check(name: str, value, comparison: str, tolerance) -> Check:
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        value = value.item()
    if isinstance(tolerance, (np.floating, np.integer, np.bool_)):
        tolerance = tolerance.item()
    ok = value is not None and not (isinstance(value, float) and math.isnan(value))
    return Check(name, value, tolerance, comparison, bool(ok and _OPS[comparison](value, tolerance)))


# ---------------------------------------------------------------- config

_GRID_KEYS = ("xmin", "xmax", "n")
_TOL_KEYS = ("degeneracy", "residual", "grid")


@dataclass(frozen=True)
class _Defaults:
    model: dict
    n: int
    levels: int = 6
    sweep: tuple = ()
    residual: float = 1e-10
    grid_tol: float = 1e-3
    domain: tuple | None = None
    trials: int = 0


_DEFAULTS = {
    "sombrero-gap": _Defaults({"kind": "QuarticSombrero", "lam": 1.0, "mu": 1.0}, 2001),
    "sextic-ground": _Defaults({"kind": "SexticFactorized", "a_sextic": 1.0}, 2001, domain=(-3.0, 3.0)),
    "double-oscillator-limit": _Defaults({"kind": "DoubleOscillator", "omega": 1.0}, 2001, levels=3,
                                         sweep=(0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0)),
    "ualpha-levels": _Defaults({"kind": "SquareDoubleWell", "a": 2.0, "b": 0.5}, 4001,
                               sweep=(10.0, 20.0, 50.0, 100.0, 200.0, 500.0)),
    "uinf-ssb": _Defaults({"kind": "DoubleInfiniteWell", "a": 2.0, "b": 0.5}, 4001, levels=10),
    "barrier-theorem": _Defaults({"kind": "DoubleInfiniteWell", "a": 2.0, "b": 0.5}, 4001, levels=5),
    "spinor-ssb": _Defaults({"kind": "Spinor", "omega_plus": (1 + math.sqrt(5)) / 2, "omega_minus": 1.0},
                            4001, levels=8, domain=(-8.0, 8.0), grid_tol=1e-3),
    "pair-lemma": _Defaults({"kind": "Involution", "dim_min": 2, "dim_max": 8}, 0, levels=0, trials=1000,
                            residual=1e-12),
}

EXPERIMENTS = {
    "sombrero-gap": "ground level of the quartic sombrero is non-degenerate, so parity is not broken",
    "sextic-ground": "factorized sextic has the exact zero-energy ground state exp(-a x^4)",
    "double-oscillator-limit": "tunneling splitting of V = m w^2 (|x| - a)^2 shrinks as the wells separate",
    "ualpha-levels": "sub-barrier roots of the square double well agree with finite differences",
    "uinf-ssb": "every level of the double infinite well is a parity-breaking doublet",
    "barrier-theorem": "half-space projection of an even state under an infinite barrier is an eigenstate",
    "spinor-ssb": "the doubly degenerate ground level of the two-channel oscillator breaks sigma_3",
    "pair-lemma": "randomised check of the non-overlapping symmetry-breaking pair construction",
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment configuration.

    Omitted fields take the experiment's documented defaults (see
    ``ssb-lab list``). ``grid`` holds ``xmin``, ``xmax`` and ``n``;
    ``tolerances`` holds ``degeneracy`` (level clustering, 1e-8),
    ``residual`` (root or lemma residuals) and ``grid`` (discretisation
    agreement). ``sweep`` lists the scanned parameter (separations ``a`` or
    barrier heights ``alpha``).
    """

    experiment: str
    model: dict
    grid: dict
    tolerances: dict
    levels: int
    sweep: tuple = ()
    trials: int = 0
    seed: int = 0
    jobs: int = 1
    output: str = "ssb-lab-out"

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        raw = dict(raw)
        allowed = {"experiment", "model", "grid", "tolerances", "levels", "sweep", "trials", "seed",
                   "jobs", "output"}
        unknown = sorted(set(raw) - allowed)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        name = raw.get("experiment")
        if name not in _DEFAULTS:
            raise ConfigError(f"unknown experiment {name!r}; expected one of {sorted(_DEFAULTS)}")
        d = _DEFAULTS[name]

        model = dict(d.model)
        given = raw.get("model") or {}
        if not isinstance(given, dict):
            raise ConfigError("model must be an object")
        if "kind" in given and given["kind"] != model["kind"] and name != "sombrero-gap":
            raise ConfigError(f"{name} runs {model['kind']}, not {given['kind']}")
        if given.get("kind", model["kind"]) != model["kind"]:
            model = {"kind": given["kind"]}
        model.update(given)

        grid = dict(raw.get("grid") or {})
        bad = sorted(set(grid) - set(_GRID_KEYS))
        if bad:
            raise ConfigError(f"unknown grid keys: {', '.join(bad)}")
        grid.setdefault("n", d.n)
        if d.domain is not None:
            grid.setdefault("xmin", d.domain[0])
            grid.setdefault("xmax", d.domain[1])

        tols = dict(raw.get("tolerances") or {})
        bad = sorted(set(tols) - set(_TOL_KEYS))
        if bad:
            raise ConfigError(f"unknown tolerance keys: {', '.join(bad)}")
        tols = {"degeneracy": tols.get("degeneracy", DEFAULT_DEGENERACY_TOL),
                "residual": tols.get("residual", d.residual),
                "grid": tols.get("grid", d.grid_tol)}
        for k, v in tols.items():
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ConfigError(f"tolerance {k} must be a positive number, got {v!r}")

        sweep = raw.get("sweep")
        sweep = tuple(float(s) for s in (d.sweep if sweep is None else sweep))
        jobs = raw.get("jobs", 1)
        cfg = cls(name, model, grid, tols,
                  levels=int(raw.get("levels", d.levels)), sweep=sweep,
                  trials=int(raw.get("trials", d.trials)), seed=int(raw.get("seed", 0)),
                  jobs=int(jobs), output=str(raw.get("output", "ssb-lab-out")))
        cfg._validate()
        return cfg

    def _validate(self):
        n = self.grid["n"]
        if self.experiment != "pair-lemma" and (not isinstance(n, int) or n < 5):
            raise ConfigError(f"grid n must be an integer >= 5, got {n!r}")
        if "xmin" in self.grid and "xmax" in self.grid and not self.grid["xmin"] < self.grid["xmax"]:
            raise ConfigError("grid needs xmin < xmax")
        if self.levels < 0 or self.trials < 0 or self.jobs < 1:
            raise ConfigError("levels and trials must be >= 0 and jobs >= 1")
        if self.experiment in ("double-oscillator-limit", "ualpha-levels") and not self.sweep:
            raise ConfigError(f"{self.experiment} needs a non-empty sweep")

    def echo(self) -> dict:
        """Config as recorded in the report; ``jobs`` and ``output`` do not affect results."""
        return {"experiment": self.experiment, "model": self.model, "grid": self.grid,
                "tolerances": self.tolerances, "levels": self.levels, "sweep": list(self.sweep),
                "trials": self.trials, "seed": self.seed}


@dataclass
class Report:
    config: ExperimentConfig
    spectrum: dict | None = None
    degeneracy: dict | None = None
    ssb: dict | None = None
    results: dict = field(default_factory=dict)
    checks: list[Check] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)
    files: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.errors and bool(self.checks) and all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "tool": {"name": "ssb-lab", "version": __version__},
            "experiment": self.config.experiment,
            "config": self.config.echo(),
            "spectrum": self.spectrum,
            "degeneracy": self.degeneracy,
            "ssb": self.ssb,
            "results": self.results,
            "checks": [c.to_dict() for c in self.checks],
            "errors": self.errors,
            "passed": self.passed,
            "files": sorted(self.files),
        }


class _Context:
    def __init__(self, report: Report, out: Path | None):
        self.report = report
        self.out = out

    @property
    def cfg(self) -> ExperimentConfig:
        return self.report.config

    def add(self, *checks: Check):
        self.report.checks.extend(checks)

    def table(self, name: str, header, rows):
        self.report.files.append(name)
        if self.out is not None:
            write_csv(self.out / name, header, rows)


# ---------------------------------------------------------------- helpers

def _model_grid(model, cfg: ExperimentConfig):
    lo, hi = model.domain_hint
    return build_grid(cfg.grid.get("xmin", lo), cfg.grid.get("xmax", hi), cfg.grid["n"], walls=model.walls)


def _spectrum_summary(spec) -> dict:
    return {"levels": [float(e) for e in spec.levels],
            "max_residual": float(np.max(spec.residuals)),
            "residual_tolerance": solver_tolerance(spec.op)}


def _degeneracy_summary(rep) -> dict:
    return {"tol": rep.tol,
            "clusters": [{"energy": c.energy, "multiplicity": c.multiplicity} for c in rep.clusters]}


def _parity_labels(spec):
    h = spec.h
    return ["even" if float(np.dot(v, v[::-1]) * h) > 0 else "odd" for v in spec.vectors]


def _strictly_decreasing(values) -> bool:
    values = list(values)
    return all(b < a for a, b in zip(values, values[1:]))


def _model(cfg: ExperimentConfig):
    try:
        return model_from_dict(cfg.model)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


# ---------------------------------------------------------------- experiments

def _sombrero_gap(ctx: _Context):
    cfg = ctx.cfg
    model = _model(cfg)
    grid = _model_grid(model, cfg)
    k = max(cfg.levels, 2)
    spec = eigensolve(model.hamiltonian(grid), k, grid)
    tol = cfg.tolerances["degeneracy"]
    deg = cluster_degeneracies(spec.levels, tol)
    verdict = detect_ssb(spec, parity(grid), tol)
    gap = float(spec.levels[1] - spec.levels[0])
    labels = _parity_labels(spec)
    rep = ctx.report
    rep.spectrum = _spectrum_summary(spec)
    rep.degeneracy = _degeneracy_summary(deg)
    rep.ssb = verdict.summary()
    rep.results = {"model": model.to_dict(), "gap": gap, "parities": labels}
    ctx.add(
        check("gap_E1_minus_E0", gap, ">", 10.0 * tol),
        check("ground_multiplicity", deg.clusters[0].multiplicity, "==", 1),
        check("parity_broken", verdict.broken, "==", False),
        check("commutator_norm", verdict.commutator_norm, "<=", 1e-12 * max(spec.op.scale(), 1.0)),
        check("parities_alternate", all(labels[i] != labels[i + 1] for i in range(k - 1)), "==", True),
    )
    ctx.table("levels.csv", ["index", "energy", "parity", "residual"],
              [(i, float(e), labels[i], float(r)) for i, (e, r) in enumerate(zip(spec.levels, spec.residuals))])


def _sextic_ground(ctx: _Context):
    cfg = ctx.cfg
    model = _model(cfg)
    a = model.params["a_sextic"]
    grid = _model_grid(model, cfg)
    spec = eigensolve(model.hamiltonian(grid), max(cfg.levels, 2), grid)
    tol = cfg.tolerances["degeneracy"]
    deg = cluster_degeneracies(spec.levels, tol)
    verdict = detect_ssb(spec, parity(grid), tol)
    exact = model.analytic.ground_function(grid.x)
    psi = spec.vectors[0]
    l2 = grid.norm(psi - exact)
    rep = ctx.report
    rep.spectrum = _spectrum_summary(spec)
    rep.degeneracy = _degeneracy_summary(deg)
    rep.ssb = verdict.summary()
    try:
        ann = annihilator_residual(a, grid)
        ann_ok = True
    except GridTooCoarse as exc:
        rep.errors.append(f"annihilator residual: {exc}")
        ann, ann_ok = None, False
    e0 = float(spec.levels[0])
    rep.results = {"model": model.to_dict(), "E0": e0, "l2_error": l2, "annihilator_residual": ann,
                   "exact_norm_on_grid": grid.norm(exact)}
    ctx.add(
        check("abs_E0", abs(e0), "<", 1e-4),
        check("l2_ground_error", l2, "<", 1e-3),
        check("annihilator_residual_within_h2_bound", ann_ok, "==", True),
        check("gap_E1_minus_E0", float(spec.levels[1] - e0), ">", 10.0 * tol),
        check("parity_broken", verdict.broken, "==", False),
    )
    ctx.table("levels.csv", ["index", "energy", "residual"],
              [(i, float(e), float(r)) for i, (e, r) in enumerate(zip(spec.levels, spec.residuals))])
    ctx.table("ground_state.csv", ["x", "psi", "exact"],
              [(float(x), float(p), float(f)) for x, p, f in zip(grid.x, psi, exact)])


def _sector_levels(model, grid, k):
    op = model.hamiltonian(grid)
    out = {}
    for p in ("even", "odd"):
        sec = parity_sector(op, grid, p)
        out[p] = eigensolve(sec, min(k, sec.size), grid).levels
    return out


def _double_oscillator_limit(ctx: _Context):
    cfg = ctx.cfg
    p = {k: v for k, v in cfg.model.items() if k != "kind"}
    omega, m, hbar = p.get("omega", 1.0), p.get("m", 1.0), p.get("hbar", 1.0)
    if "a" in p:
        raise ConfigError("double-oscillator-limit scans a; set it with sweep, not model.a")
    seps = list(cfg.sweep)
    if any(b <= a for a, b in zip(seps, seps[1:])):
        raise ConfigError("separations must be strictly ascending")
    k = max(cfg.levels, 1)
    rows, splits = [], []
    w_eff = math.sqrt(2.0) * omega  # curvature of m w^2 (|x| - a)^2 is 2 m w^2
    for a in seps:
        model = double_oscillator(m=m, omega=omega, a=a, hbar=hbar)
        grid = _model_grid(model, cfg)
        lv = _sector_levels(model, grid, k)
        split = float(lv["odd"][0] - lv["even"][0])
        splits.append(split)
        rows.append((a, float(lv["even"][0]), float(lv["odd"][0]), split, grid.xmin, grid.xmax))
        if a == 0.0:
            merged = np.sort(np.concatenate([lv["even"], lv["odd"]]))[:k]
            exact = np.array([hbar * w_eff * (j + 0.5) for j in range(k)])
            ctx.add(check("a0_levels_match_oscillator_rel", float(np.max(np.abs(merged - exact) / exact)),
                          "<=", cfg.tolerances["grid"]))
    zero_point = 0.5 * hbar * w_eff
    far = rows[-1]
    ctx.report.results = {"omega_effective": w_eff, "separations": seps, "splittings": splits,
                          "single_well_zero_point": zero_point}
    ctx.add(
        check("splitting_strictly_decreasing", _strictly_decreasing(splits), "==", True),
        check("splitting_positive", min(splits), ">", 0.0),
        check("largest_a_even_to_single_well_rel", abs(far[1] - zero_point) / zero_point,
              "<=", cfg.tolerances["grid"]),
    )
    ctx.table("splitting.csv", ["a", "e_even", "e_odd", "splitting", "xmin", "xmax"], rows)


def _ualpha_levels(ctx: _Context):
    cfg = ctx.cfg
    p = {k: v for k, v in cfg.model.items() if k != "kind"}
    if "alpha" in p:
        raise ConfigError("ualpha-levels scans alpha; set it with sweep, not model.alpha")
    alphas = list(cfg.sweep)
    try:
        base = WellGeometry(alphas[0], p.get("a", 2.0), p.get("b", 0.5), p.get("m", 1.0), p.get("hbar", 1.0))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    n = cfg.grid["n"]
    rtol = cfg.tolerances["residual"]
    root_rows = []
    worst_match, worst_res, worst_sq = 0.0, 0.0, 0.0
    counts_ok, order_ok = True, True
    counts = []
    for alpha in alphas:
        g = WellGeometry(alpha, base.a, base.b, base.m, base.hbar)
        reps = {par: find_subbarrier_levels(g, par, fd_n=n) for par in ("even", "odd")}
        for par, r in reps.items():
            counts_ok &= len(r.roots) == r.fd_count
            for i, root in enumerate(r.roots):
                fd = r.fd_levels[i] if i < r.fd_count else math.nan
                match = r.oracle_match[i] if i < len(r.oracle_match) else math.inf
                lhs, rhs = squared_condition(root, g, par)
                sq = abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1.0)
                worst_match = max(worst_match, match)
                worst_res = max(worst_res, abs(r.residuals[i]))
                worst_sq = max(worst_sq, sq)
                root_rows.append((alpha, par, i + 1, root, fd, match, r.residuals[i]))
        ev, od = reps["even"].roots, reps["odd"].roots
        order_ok &= all(o > e for e, o in zip(ev, od))
        counts.append({"alpha": alpha, "even": len(ev), "odd": len(od),
                       "fd_even": reps["even"].fd_count, "fd_odd": reps["odd"].fd_count})
    sweep = splitting_sweep(alphas, base, n=1, jobs=cfg.jobs)
    present = [r for r in sweep if r.present]
    first = present[0].alpha if present else None
    ctx.report.results = {
        "geometry": {"a": base.a, "b": base.b, "m": base.m, "hbar": base.hbar},
        "counts": counts,
        "first_alpha_with_doublet": first,
        "infinite_barrier_limit_E1": base.pole(1),
    }
    ctx.add(
        check("root_count_equals_fd_count", counts_ok, "==", True),
        check("roots_match_fd_rel", worst_match, "<=", 1e-3),
        check("root_residual", worst_res, "<=", rtol),
        check("squared_form_rel_mismatch", worst_sq, "<=", 1e-8),
        check("odd_above_even_in_each_doublet", order_ok, "==", True),
        check("doublet_present_in_sweep", len(present), ">=", 2),
        check("splitting_strictly_decreasing", _strictly_decreasing(r.splitting for r in present), "==", True),
    )
    ctx.table("roots.csv", ["alpha", "parity", "index", "root", "fd", "rel_error", "residual"], root_rows)
    ctx.table("splitting.csv", ["alpha", "e_even", "e_odd", "splitting", "present"],
              [(r.alpha, r.e_even, r.e_odd, r.splitting, int(r.present)) for r in sweep])


def _uinf(cfg):
    model = _model(cfg)
    grid = _model_grid(model, cfg)
    return model, grid, model.hamiltonian(grid)


def _uinf_ssb(ctx: _Context):
    cfg = ctx.cfg
    model, grid, op = _uinf(cfg)
    a, b = model.params["a"], model.params["b"]
    k = max(cfg.levels, 2)
    spec = eigensolve(op, k, grid)
    tol = cfg.tolerances["degeneracy"]
    deg = cluster_degeneracies(spec.levels, tol)
    verdict = detect_ssb(spec, parity(grid), tol)
    rep = ctx.report
    rep.spectrum = _spectrum_summary(spec)
    rep.degeneracy = _degeneracy_summary(deg)
    rep.ssb = verdict.summary()
    full = [c for c in deg.clusters if c.multiplicity == 2 or c.members[-1] < k - 1]
    formula = model.analytic.level_formula
    rel = [abs(c.energy - formula(i + 1)) / formula(i + 1) for i, c in enumerate(full)]

    # the pair against the closed-form left/right functions of level 1
    pair_err = None
    if verdict.pair is not None:
        L, R = verdict.pair
        exact = [uinf_eigenfunction(1, side, a, b, grid) for side in ("L", "R")]

        def dist(v, f):
            return min(grid.norm(v - f), grid.norm(v + f))

        pair_err = min(max(dist(L, exact[0]), dist(R, exact[1])), max(dist(L, exact[1]), dist(R, exact[0])))

    # each isolated well on its own grid carries the same ladder
    left = split_domain(grid, model.barrier).left
    vl = np.zeros(left.n)
    left_levels = eigensolve(assemble_hamiltonian(left, vl, model.m, model.hbar), len(full), left).levels
    split_rel = max(abs(e - c.energy) / c.energy for e, c in zip(left_levels, full))

    rep.results = {"model": model.to_dict(), "E1": full[0].energy if full else None,
                   "formula_E1": formula(1), "level_rel_errors": rel, "pair_vs_closed_form": pair_err,
                   "split_domain_rel": split_rel}
    ctx.add(
        check("levels_match_formula_rel", max(rel) if rel else None, "<=", cfg.tolerances["grid"]),
        check("all_multiplicities_two", all(c.multiplicity == 2 for c in full), "==", True),
        check("pair_overlap", verdict.pair_overlap, "<", 1e-12),
        check("parity_broken", verdict.broken, "==", True),
        check("pair_vs_closed_form_l2", pair_err, "<=", 1e-6),
        check("isolated_well_levels_rel", split_rel, "<=", 1e-9),
    )
    ctx.table("levels.csv", ["index", "energy", "formula", "residual"],
              [(i, float(e), formula(i // 2 + 1), float(r))
               for i, (e, r) in enumerate(zip(spec.levels, spec.residuals))])
    if verdict.pair is not None:
        L, R = verdict.pair
        exact_l = uinf_eigenfunction(1, "L", a, b, grid)
        ctx.table("eigenfunctions.csv", ["x", "psi_L", "psi_R", "exact_L1"],
                  [(float(x), float(p), float(q), float(f)) for x, p, q, f in zip(grid.x, L, R, exact_l)])


def _barrier_theorem(ctx: _Context):
    cfg = ctx.cfg
    model, grid, op = _uinf(cfg)
    k = max(cfg.levels, 1)
    spec = eigensolve(parity_sector(op, grid, "even"), k, grid)
    bound = 10.0 * solver_tolerance(op)
    u = parity(grid)
    rows, worst_res, worst_ov, worst_norm = [], 0.0, 0.0, 0.0
    trivial = False
    for i, (e, v) in enumerate(zip(spec.levels, spec.vectors)):
        proj = project_right(v, grid, model.barrier)
        trivial |= proj.trivial
        res = residual_norm(op, proj.state, float(e))
        ov = abs(grid.inner(proj.state, u(proj.state)))
        nrm = abs(grid.norm(proj.state) - 1.0)
        worst_res, worst_ov, worst_norm = max(worst_res, res), max(worst_ov, ov), max(worst_norm, nrm)
        rows.append((i, float(e), res, bound, ov))
    ctx.report.spectrum = _spectrum_summary(spec)
    ctx.report.results = {"model": model.to_dict(), "sector": "even", "residual_bound": bound,
                          "bound_rule": "10 x solver tolerance of the full operator"}
    ctx.add(
        check("projected_eigen_residual", worst_res, "<", bound),
        check("mirror_overlap", worst_ov, "<", 1e-12),
        check("projection_normalised", worst_norm, "<=", 1e-12),
        check("projection_nontrivial", not trivial, "==", True),
    )
    ctx.table("projections.csv", ["index", "energy", "residual", "bound", "mirror_overlap"], rows)


def _spinor_ssb(ctx: _Context):
    cfg = ctx.cfg
    p = {k: v for k, v in cfg.model.items() if k != "kind"}
    bad = sorted(set(p) - {"omega_plus", "omega_minus", "m", "hbar"})
    if bad:
        raise ConfigError(f"unknown spinor parameters: {', '.join(bad)}")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            model = build_spinor_model(**p)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    for w in caught:
        ctx.report.errors.append(f"warning: {w.message}")
    grid = build_grid(cfg.grid["xmin"], cfg.grid["xmax"], cfg.grid["n"])
    k = max(cfg.levels, 3)
    tol = cfg.tolerances["degeneracy"]
    op = spinor_hamiltonian(model, grid)
    fd = eigensolve(op, k, grid)
    exact = analytic_spinor_spectrum(model, grid, k)
    labels = analytic_spectrum(model, k)[:k]
    # ground energies are zero, so errors are relative to the lower frequency quantum
    unit = model.hbar * min(model.omega_plus, model.omega_minus)
    rel = [abs(f - e) / max(abs(e), unit) for f, e in zip(fd.levels, exact.levels)]
    deg = cluster_degeneracies(exact.levels, tol)
    verdict = detect_ssb(exact, sigma3(grid.n), tol)
    fd_verdict = detect_ssb(fd, sigma3(grid.n), cfg.tolerances["grid"])
    psi_r, psi_l = ground_pair(model, grid)
    overlap = abs(psi_r.inner(psi_l))
    s3 = sigma3(grid.n)
    mirror = float(np.sqrt(np.sum((s3(psi_r.stacked) - psi_l.stacked) ** 2) * grid.h))
    comm = sigma3_commutator_check(model, grid)

    form = to_field_form(model)
    up, down = form.channel_hamiltonians(grid)
    scale = max(op.scale(), 1.0)
    n = grid.n
    diff = max(np.max(np.abs(up.diag - op.diag[:n])), np.max(np.abs(down.diag - op.diag[n:])),
               np.max(np.abs(up.offdiag - op.offdiag[:n - 1])), np.max(np.abs(down.offdiag - op.offdiag[n:])))
    back = form.to_model()
    freq_err = max(abs(back.omega_plus - model.omega_plus), abs(back.omega_minus - model.omega_minus))
    form_levels = form.analytic_levels(k)[:k]
    form_err = max(abs(a - b) for a, b in zip(form_levels, exact.levels))

    rep = ctx.report
    rep.spectrum = {"levels": [float(e) for e in exact.levels], "fd_levels": [float(e) for e in fd.levels],
                    "labels": [f"{lv.channel}{lv.n}" for lv in labels],
                    "max_residual": float(np.max(fd.residuals)), "residual_tolerance": solver_tolerance(op)}
    rep.degeneracy = _degeneracy_summary(deg)
    rep.ssb = verdict.summary()
    rep.results = {
        "model": {"omega_plus": model.omega_plus, "omega_minus": model.omega_minus, "m": model.m,
                  "hbar": model.hbar},
        "field_form": {"omega0": form.omega0, "omega_delta_sq": form.omega_delta_sq,
                       "epsilon0": form.epsilon0, "epsilon_delta": form.epsilon_delta},
        "fd_ssb": fd_verdict.summary(),
        "ground_pair_overlap": overlap,
    }
    ctx.add(
        check("fd_matches_analytic_rel", max(rel), "<=", cfg.tolerances["grid"]),
        check("ground_multiplicity", deg.clusters[0].multiplicity, "==", 2),
        check("excited_multiplicities_one", all(c.multiplicity == 1 for c in deg.clusters[1:]), "==", True),
        check("ground_pair_overlap", overlap, "<", 1e-10),
        check("sigma3_maps_R_to_L", mirror, "<=", 1e-12),
        check("sigma3_broken", verdict.broken, "==", True),
        check("sigma3_broken_fd_at_grid_tol", fd_verdict.broken, "==", True),
        check("sigma3_commutator", comm, "<=", 1e-12 * scale),
        check("field_form_entrywise", float(diff), "<=", 64 * _EPS * scale),
        check("field_form_frequency_roundtrip", freq_err, "<=", 64 * _EPS * max(model.omega_plus, 1.0)),
        check("field_form_levels", form_err, "<=", 64 * _EPS * max(exact.levels[-1], 1.0)),
    )
    ctx.table("spectrum.csv", ["index", "channel", "n", "exact", "fd", "rel_error"],
              [(i, lv.channel, lv.n, lv.energy, float(f), r)
               for i, (lv, f, r) in enumerate(zip(labels, fd.levels, rel))])
    ctx.table("ground_pair.csv", ["x", "R_up", "R_down", "L_up", "L_down"],
              [(float(x), float(a), float(b), float(c), float(d))
               for x, a, b, c, d in zip(grid.x, psi_r.up, psi_r.down, psi_l.up, psi_l.down)])
    ctx.table("field_form.csv", ["x", "b_z", "V_plus", "V_minus"],
              [(float(x), float(bz), float(vp), float(vm)) for x, bz, vp, vm in
               zip(grid.x, form.b_z(grid.x), form.channel_potential(grid.x, "+"),
                   form.channel_potential(grid.x, "-"))])


def _unit(v):
    return v / np.linalg.norm(v)


def lemma_trial(rng: np.random.Generator, dim_min: int = 2, dim_max: int = 8) -> dict:
    """One randomised instance of the pair construction and its error measures."""
    dim = int(rng.integers(dim_min, dim_max + 1))
    complex_ = bool(rng.integers(0, 2))
    u_mat, plus_basis, minus_basis = random_involution(dim, rng, complex_)
    u = involution(u_mat, atol=1e-10)

    def rand_in(basis):
        c = rng.normal(size=basis.shape[1])
        if complex_:
            c = c + 1j * rng.normal(size=basis.shape[1])
        return _unit(basis @ c)

    c = float(rng.uniform(-0.99, 0.99))
    A = np.sqrt((1 + c) / 2) * rand_in(plus_basis) + np.sqrt((1 - c) / 2) * rand_in(minus_basis)
    B = u(A)
    L, R = build_nonoverlapping_pair(A, B, u)
    plus, minus = symmetric_basis(A, B)
    q, _ = np.linalg.qr(np.column_stack([A, B]))
    span_ab = max(np.linalg.norm(v - q @ (q.conj().T @ v)) for v in (L, R))
    p, _ = np.linalg.qr(np.column_stack([L, R]))
    span_lr = max(np.linalg.norm(v - p @ (p.conj().T @ v)) for v in (A, B))
    return {
        "dim": dim,
        "complex": complex_,
        "c": c,
        "measured_c": float(np.real(np.vdot(A, B))),
        "overlap": float(abs(np.vdot(L, R))),
        "mismatch": float(np.linalg.norm(u(L) - R)),
        "norm_error": float(max(abs(np.linalg.norm(L) - 1), abs(np.linalg.norm(R) - 1))),
        "span_error": float(max(span_ab, span_lr)),
        "plus_error": float(np.linalg.norm(u(plus) - plus)),
        "minus_error": float(np.linalg.norm(u(minus) + minus)),
    }


def _pair_lemma(ctx: _Context):
    cfg = ctx.cfg
    p = {k: v for k, v in cfg.model.items() if k != "kind"}
    bad = sorted(set(p) - {"dim_min", "dim_max"})
    if bad:
        raise ConfigError(f"unknown pair-lemma parameters: {', '.join(bad)}")
    lo, hi = int(p.get("dim_min", 2)), int(p.get("dim_max", 8))
    if not 2 <= lo <= hi:
        raise ConfigError("need 2 <= dim_min <= dim_max")
    if cfg.trials < 1:
        raise ConfigError("pair-lemma needs trials >= 1")
    rng = np.random.default_rng(cfg.seed)
    trials = [lemma_trial(rng, lo, hi) for _ in range(cfg.trials)]
    tol = cfg.tolerances["residual"]
    keys = ("overlap", "mismatch", "norm_error", "span_error", "plus_error", "minus_error")
    worst = {k: max(t[k] for t in trials) for k in keys}
    ctx.report.results = {"trials": cfg.trials, "seed": cfg.seed, "dims": [lo, hi],
                          "complex_trials": sum(t["complex"] for t in trials), "worst": worst}
    ctx.add(*(check(f"max_{k}", worst[k], "<=", tol) for k in keys))
    ctx.add(check("target_overlap_realised", max(abs(t["c"] - t["measured_c"]) for t in trials), "<=", 1e-12))
    ctx.table("trials.csv", ["trial", "dim", "complex", "c", *keys],
              [(i, t["dim"], int(t["complex"]), t["c"], *(t[k] for k in keys)) for i, t in enumerate(trials)])


_RUNNERS = {
    "sombrero-gap": _sombrero_gap,
    "sextic-ground": _sextic_ground,
    "double-oscillator-limit": _double_oscillator_limit,
    "ualpha-levels": _ualpha_levels,
    "uinf-ssb": _uinf_ssb,
    "barrier-theorem": _barrier_theorem,
    "spinor-ssb": _spinor_ssb,
    "pair-lemma": _pair_lemma,
}


def run(config: ExperimentConfig, out: str | os.PathLike | None = None, write: bool = True) -> Report:
    """Execute one experiment and (optionally) write its files.

    Experiment-level failures (solver breakdown, a symmetry that does not
    commute, a grid too coarse for an oracle) are recorded in
    ``report.errors``; only configuration errors raise.
    """
    report = Report(config)
    target = Path(out if out is not None else config.output) if write else None
    if target is not None:
        target.mkdir(parents=True, exist_ok=True)
    ctx = _Context(report, target)
    try:
        _RUNNERS[config.experiment](ctx)
    except ConfigError:
        raise
    except (EigenSolverError, SymmetryError, GridTooCoarse, ValueError) as exc:
        report.errors.append(f"{type(exc).__name__}: {exc}")
    report.files.append("report.json")
    if target is not None:
        write_json(target / "report.json", report.to_dict())
    return report


# ---------------------------------------------------------------- figures

FIGURES = {
    1: "quartic sombrero V = x^4 - x^2",
    2: "factorized sextic potential with f(x) = exp(-a x^4)",
    3: "double oscillator V = m w^2 (|x| - a)^2",
    4: "finite square double well U_alpha",
    5: "double infinite square well U_inf",
}

_FIGURE_PARAMS = {
    1: {"lam": 1.0, "mu": 1.0, "xmin": -1.2, "xmax": 1.2, "n": 241},
    2: {"a_sextic": 1.0, "xmin": -1.5, "xmax": 1.5, "n": 301},
    3: {"omega": 1.0, "a": 1.0, "m": 1.0, "xmin": -3.0, "xmax": 3.0, "n": 301},
    4: {"alpha": 10.0, "a": 2.0, "b": 0.5, "xmin": -2.5, "xmax": 2.5, "n": 501},
    5: {"a": 2.0, "b": 0.5, "xmin": -2.5, "xmax": 2.5, "n": 501},
}


def figure_params(figure: int, overrides: dict | None = None) -> dict:
    if figure not in _FIGURE_PARAMS:
        raise ConfigError(f"unknown figure {figure!r}; expected one of {sorted(FIGURES)}")
    params = dict(_FIGURE_PARAMS[figure])
    for k, v in (overrides or {}).items():
        if k not in params:
            raise ConfigError(f"figure {figure} has no parameter {k!r}; known: {sorted(params)}")
        params[k] = v
    if not (params["xmin"] < params["xmax"]) or int(params["n"]) < 2:
        raise ConfigError("figure range needs xmin < xmax and n >= 2")
    return params


def emit_figure_data(figure: int, params: dict | None = None) -> tuple[list[str], list[tuple]]:
    """Header and rows of ``x, V(x)`` (plus ``f(x)`` for figure 2).

    Hard walls are written as ``inf`` so the segments of figures 4 and 5
    can be drawn by clipping.
    """
    p = figure_params(figure, params)
    x = np.linspace(p["xmin"], p["xmax"], int(p["n"]))
    try:
        if figure == 1:
            v = quartic_sombrero(p["lam"], p["mu"])(x)
        elif figure == 2:
            v = sextic_factorized(p["a_sextic"])(x)
            f = np.exp(-p["a_sextic"] * x**4)
            return ["x", "V", "f"], [(float(a), float(b), float(c)) for a, b, c in zip(x, v, f)]
        elif figure == 3:
            v = double_oscillator(p["m"], p["omega"], p["a"])(x)
        elif figure == 4:
            v = square_double_well(p["alpha"], p["a"], p["b"])(x)
        else:
            v = double_infinite_well(p["a"], p["b"])(x)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return ["x", "V"], [(float(a), float(b)) for a, b in zip(x, v)]


def catalog() -> list[tuple[str, str]]:
    return sorted(EXPERIMENTS.items())
