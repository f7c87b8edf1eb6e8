import math

import numpy as np
import pytest

from ssb_lab.quantize import (
    WellGeometry,
    even_condition,
    find_subbarrier_levels,
    limit_level,
    odd_condition,
    splitting_sweep,
    squared_condition,
)

G = WellGeometry(50.0, 2.0, 0.5)


def test_conditions_change_sign_at_roots():
    for parity, fn in (("even", even_condition), ("odd", odd_condition)):
        rep = find_subbarrier_levels(G, parity, fd_n=None)
        for r in rep.roots:
            assert fn(r * (1 - 1e-9), G) < 0 < fn(r * (1 + 1e-9), G)


def test_roots_solve_squared_form():
    for parity in ("even", "odd"):
        for r in find_subbarrier_levels(G, parity, fd_n=None).roots:
            lhs, rhs = squared_condition(r, G, parity)
            assert lhs == pytest.approx(rhs, rel=1e-8)


def test_one_root_per_pole_interval():
    rep = find_subbarrier_levels(G, "even", fd_n=None)
    for (lo, hi), r in zip(rep.brackets, rep.roots):
        assert lo < r < hi


def test_roots_match_finite_differences():
    for parity in ("even", "odd"):
        rep = find_subbarrier_levels(G, parity, fd_n=4001)
        assert len(rep.roots) == rep.fd_count
        assert max(rep.oracle_match) < 1e-3


def test_doublets_ordered_and_below_limit():
    ev = find_subbarrier_levels(G, "even", fd_n=None).roots
    od = find_subbarrier_levels(G, "odd", fd_n=None).roots
    for n, (e, o) in enumerate(zip(ev, od), start=1):
        assert e < o < limit_level(G, n)


def test_shallow_barrier_has_no_subbarrier_levels():
    g = WellGeometry(0.1, 2.0, 0.5)
    assert find_subbarrier_levels(g, "even", fd_n=None).roots == []


def test_condition_domain():
    with pytest.raises(ValueError):
        even_condition(60.0, G)
    with pytest.raises(ValueError):
        find_subbarrier_levels(G, "both")


def test_geometry_validation():
    with pytest.raises(ValueError):
        WellGeometry(10.0, 0.5, 2.0)
    with pytest.raises(ValueError):
        WellGeometry(math.inf, 2.0, 0.5)


def test_sweep_splitting_decreases_toward_limit():
    rows = splitting_sweep([10, 20, 50, 100, 200, 500], G)
    splits = [r.splitting for r in rows]
    assert all(r.present for r in rows)
    assert all(b < a for a, b in zip(splits, splits[1:]))
    assert splits[-1] > 0
    assert rows[-1].e_odd == pytest.approx(limit_level(G, 1), rel=0.05)


def test_sweep_parallel_matches_serial():
    alphas = [10.0, 50.0, 200.0]
    assert splitting_sweep(alphas, G, jobs=2) == splitting_sweep(alphas, G, jobs=1)


def test_sweep_flags_missing_doublet_and_checks_order():
    rows = splitting_sweep([0.1, 10.0], G)
    assert not rows[0].present and np.isnan(rows[0].splitting)
    with pytest.raises(ValueError):
        splitting_sweep([10.0, 5.0], G)
