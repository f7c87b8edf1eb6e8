"""Acceptance criteria, one test each, at their stated tolerances.

Each test prints a single ``PASS``/``FAIL`` line. Run as a script for the
summary alone: ``python tests/test_acceptance.py``.
"""

import math
import time

import numpy as np
import pytest

from ssb_lab.eigen import (
    cluster_degeneracies,
    eigensolve,
    jacobi_eigvalsh,
    residual_norm,
    solver_tolerance,
)
from ssb_lab.experiments import lemma_trial
from ssb_lab.lattice import TridiagonalOperator, build_grid, parity_sector
from ssb_lab.models import double_infinite_well, quartic_sombrero, sextic_factorized
from ssb_lab.quantize import WellGeometry, find_subbarrier_levels, splitting_sweep
from ssb_lab.spinor import (
    SpinorModel,
    analytic_spectrum,
    analytic_spinor_spectrum,
    ground_pair,
    hamiltonian as spinor_hamiltonian,
    to_field_form,
)
from ssb_lab.symmetry import detect_ssb, parity, project_right, sigma3

EPS = np.finfo(float).eps


def _report(number, title, ok, detail, printer=print):
    printer(f"{'PASS' if ok else 'FAIL'} criterion {number}: {title} ({detail})")


def criterion_1():
    t0 = time.perf_counter()
    model = sextic_factorized(1.0)
    grid = build_grid(-3.0, 3.0, 2001)
    spec = eigensolve(model.hamiltonian(grid), 1, grid)
    e0 = abs(float(spec.levels[0]))
    l2 = grid.norm(spec.vectors[0] - model.analytic.ground_function(grid.x))
    dt = time.perf_counter() - t0
    ok = e0 < 1e-4 and l2 < 1e-3 and dt < 5.0
    return ok, f"|E0|={e0:.2e}<1e-4, L2={l2:.2e}<1e-3, {dt:.2f}s<5s"


def criterion_2():
    details, ok = [], True
    tol = 1e-8
    for name, model, n in (("sombrero", quartic_sombrero(1.0, 1.0), 2001),
                           ("sextic", sextic_factorized(1.0), 2001)):
        t0 = time.perf_counter()
        grid = model.grid(n)
        spec = eigensolve(model.hamiltonian(grid), 4, grid)
        gap = float(spec.levels[1] - spec.levels[0])
        verdict = detect_ssb(spec, parity(grid), tol)
        dt = time.perf_counter() - t0
        ok &= gap > 10 * tol and not verdict.broken and dt < 5.0
        details.append(f"{name}: gap={gap:.3g}, broken={verdict.broken}, {dt:.2f}s")
    return ok, "; ".join(details)


def criterion_3():
    t0 = time.perf_counter()
    model = double_infinite_well(2.0, 0.5)
    grid = model.grid(4001)
    spec = eigensolve(model.hamiltonian(grid), 10, grid)
    rep = cluster_degeneracies(spec.levels, 1e-8)
    clusters = rep.clusters[:5]
    rel = max(abs(c.energy - math.pi**2 * n**2 / (2 * 1.5**2)) / (math.pi**2 * n**2 / (2 * 1.5**2))
              for n, c in enumerate(clusters, start=1))
    mults = [c.multiplicity for c in clusters]
    verdict = detect_ssb(spec, parity(grid), 1e-8)
    dt = time.perf_counter() - t0
    ok = (len(clusters) == 5 and rel <= 1e-3 and all(m == 2 for m in mults)
          and verdict.pair_overlap < 1e-12 and verdict.broken and dt < 10.0)
    return ok, (f"rel={rel:.2e}<=1e-3, mult={mults}, overlap={verdict.pair_overlap:.1e}<1e-12, "
                f"broken={verdict.broken}, {dt:.2f}s<10s")


def criterion_4():
    t0 = time.perf_counter()
    alphas = [10.0, 20.0, 50.0, 100.0, 200.0, 500.0]
    base = WellGeometry(alphas[0], 2.0, 0.5)
    worst, counts_ok = 0.0, True
    for alpha in alphas:
        g = WellGeometry(alpha, 2.0, 0.5)
        for par in ("even", "odd"):
            r = find_subbarrier_levels(g, par, fd_n=4001)
            counts_ok &= len(r.roots) == r.fd_count
            worst = max([worst, *r.oracle_match])
    rows = splitting_sweep(alphas, base)
    splits = [r.splitting for r in rows]
    decreasing = all(r.present for r in rows) and all(b < a for a, b in zip(splits, splits[1:]))
    dt = time.perf_counter() - t0
    ok = decreasing and worst <= 1e-3 and counts_ok and dt < 60.0
    return ok, (f"splittings {splits[0]:.3g}..{splits[-1]:.3g} decreasing={decreasing}, "
                f"worst rel={worst:.2e}<=1e-3, counts match={counts_ok}, {dt:.2f}s<60s")


def criterion_5():
    model = double_infinite_well(2.0, 0.5)
    grid = model.grid(4001)
    op = model.hamiltonian(grid)
    spec = eigensolve(parity_sector(op, grid, "even"), 5, grid)
    bound = 10 * solver_tolerance(op)
    u = parity(grid)
    worst_res = worst_ov = 0.0
    trivial = False
    for e, v in zip(spec.levels, spec.vectors):
        proj = project_right(v, grid, model.barrier)
        trivial |= proj.trivial
        worst_res = max(worst_res, residual_norm(op, proj.state, float(e)))
        worst_ov = max(worst_ov, abs(grid.inner(proj.state, u(proj.state))))
    ok = worst_res < bound and worst_ov < 1e-12 and not trivial
    return ok, f"residual={worst_res:.2e}<{bound:.2e}, mirror overlap={worst_ov:.1e}<1e-12"


def criterion_6():
    t0 = time.perf_counter()
    rng = np.random.default_rng(20240601)
    trials = [lemma_trial(rng, 2, 8) for _ in range(1000)]
    keys = ("overlap", "mismatch", "span_error", "plus_error", "minus_error")
    worst = {k: max(t[k] for t in trials) for k in keys}
    c_range = (min(t["c"] for t in trials), max(t["c"] for t in trials))
    dt = time.perf_counter() - t0
    ok = all(v <= 1e-12 for v in worst.values()) and -0.99 < c_range[0] and c_range[1] < 0.99 and dt < 5.0
    return ok, ", ".join(f"{k}={v:.1e}" for k, v in worst.items()) + f", {dt:.2f}s<5s"


def criterion_7():
    t0 = time.perf_counter()
    model = SpinorModel()
    grid = build_grid(-8.0, 8.0, 4001)
    op = spinor_hamiltonian(model, grid)
    fd = eigensolve(op, 8, grid).levels
    exact = np.array([lv.energy for lv in analytic_spectrum(model, 8)[:8]])
    # zero ground energies: relative to the lower frequency quantum there
    rel = float(np.max(np.abs(fd - exact) / np.maximum(np.abs(exact), model.hbar * model.omega_minus)))
    mults = cluster_degeneracies(exact, 1e-8).multiplicities
    psi_r, psi_l = ground_pair(model, grid)
    overlap = abs(psi_r.inner(psi_l))
    mapped = np.array_equal(sigma3(grid.n)(psi_r.stacked), psi_l.stacked)
    verdict = detect_ssb(analytic_spinor_spectrum(model, grid, 8), sigma3(grid.n), 1e-8)
    up, down = to_field_form(model).channel_hamiltonians(grid)
    n = grid.n
    parts = ((up.diag, op.diag[:n]), (down.diag, op.diag[n:]),
             (up.offdiag, op.offdiag[:n - 1]), (down.offdiag, op.offdiag[n:]))
    entry = max(float(np.max(np.abs(a - b) / np.abs(b))) for a, b in parts)
    dt = time.perf_counter() - t0
    ok = (rel <= 1e-3 and mults[0] == 2 and all(m == 1 for m in mults[1:]) and overlap < 1e-10
          and mapped and verdict.broken and entry <= 4 * EPS and dt < 10.0)
    return ok, (f"rel={rel:.1e}<=1e-3, mult={mults}, overlap={overlap:.1e}<1e-10, "
                f"sigma3 R=L {mapped}, field-form entry rel={entry:.1e}<=4eps, {dt:.2f}s<10s")


def criterion_8():
    t0 = time.perf_counter()
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(3, 65))  # a Grid needs at least 3 samples
        op = TridiagonalOperator(rng.normal(size=n), rng.normal(size=n - 1))
        ours = eigensolve(op, n, build_grid(0.0, 1.0, n)).levels
        ref = jacobi_eigvalsh(op.to_dense())
        worst = max(worst, float(np.max(np.abs(ours - ref) / np.abs(ref))))
    dt = time.perf_counter() - t0
    return worst <= 1e-10 and dt < 10.0, f"worst rel={worst:.1e}<=1e-10, {dt:.2f}s<10s"


CRITERIA = [
    (1, "sextic zero-energy ground state", criterion_1),
    (2, "sombrero and sextic non-degenerate, unbroken", criterion_2),
    (3, "double infinite well doublets break parity", criterion_3),
    (4, "square double well roots and splitting sweep", criterion_4),
    (5, "infinite-barrier half-space projection", criterion_5),
    (6, "pair construction property suite", criterion_6),
    (7, "spinor model breaks sigma_3", criterion_7),
    (8, "solver agrees with dense Jacobi oracle", criterion_8),
]


@pytest.mark.parametrize("number,title,fn", CRITERIA, ids=[f"criterion_{c[0]}" for c in CRITERIA])
def test_acceptance(number, title, fn, capsys):
    ok, detail = fn()
    with capsys.disabled():
        print()
        _report(number, title, ok, detail)
    assert ok, detail


if __name__ == "__main__":
    results = []
    for number, title, fn in CRITERIA:
        ok, detail = fn()
        _report(number, title, ok, detail)
        results.append(ok)
    raise SystemExit(0 if all(results) else 1)
