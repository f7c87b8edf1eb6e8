import math

import numpy as np
import pytest

from ssb_lab.eigen import eigensolve, residual_norm
from ssb_lab.lattice import build_grid, parity_sector
from ssb_lab.models import (
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


def test_sombrero_shape():
    v = quartic_sombrero()
    assert v(0.0) == 0.0
    xm = 1 / math.sqrt(2)
    assert v(xm) == pytest.approx(-0.25)
    assert v(xm) < v(xm + 0.01) and v(xm) < v(xm - 0.01)


@pytest.mark.parametrize("kw", [{"lam": 0}, {"mu": -1}, {"lam": np.inf}])
def test_sombrero_rejects_bad_params(kw):
    with pytest.raises(ValueError):
        quartic_sombrero(**kw)


def test_sextic_ground_is_zero_mode():
    model = sextic_factorized(1.0)
    g = build_grid(-3, 3, 2001)
    op = model.hamiltonian(g)
    phi = model.analytic.ground_function(g.x)
    assert g.norm(phi) == pytest.approx(1.0, abs=1e-12)
    # h^2 stencil error of the kinetic term, not a rounding residual
    assert residual_norm(op, phi, 0.0) < 1e-4


def test_sextic_ground_energy_and_state():
    model = sextic_factorized(1.0)
    g = build_grid(-3, 3, 2001)
    spec = eigensolve(model.hamiltonian(g), 2, g)
    assert abs(spec.levels[0]) < 1e-4
    assert g.norm(spec.vectors[0] - model.analytic.ground_function(g.x)) < 1e-3
    assert spec.levels[1] > 1.0


def test_annihilator_residual_second_order():
    r1 = annihilator_residual(1.0, build_grid(-3, 3, 1001))
    r2 = annihilator_residual(1.0, build_grid(-3, 3, 2001))
    assert r1 / r2 == pytest.approx(4.0, rel=1e-2)


def test_annihilator_residual_narrow_grid():
    with pytest.raises(GridTooCoarse):
        annihilator_residual(1.0, build_grid(-1, 1, 201))


def test_double_oscillator_zero_separation_is_oscillator():
    model = double_oscillator(a=0.0)
    g = model.grid(2001)
    spec = eigensolve(model.hamiltonian(g), 3, g)
    w = math.sqrt(2.0)  # V = m w^2 x^2 has curvature 2 m w^2
    np.testing.assert_allclose(spec.levels, [w * (n + 0.5) for n in range(3)], rtol=1e-3)


def test_double_oscillator_splitting_shrinks():
    splits = []
    for a in (1.0, 2.0, 3.0):
        model = double_oscillator(a=a)
        g = model.grid(1601)
        op = model.hamiltonian(g)
        e = eigensolve(parity_sector(op, g, "even"), 1, g).levels[0]
        o = eigensolve(parity_sector(op, g, "odd"), 1, g).levels[0]
        splits.append(o - e)
    assert splits[0] > splits[1] > splits[2] > 0


def test_square_well_cell_average_at_step():
    model = square_double_well(10.0, 2.0, 0.5)
    g = build_grid(-2, 2, 9, walls=True)  # node exactly at x = +-0.5
    v = model.sample(g)
    assert v[3] == pytest.approx(5.0) and v[5] == pytest.approx(5.0)
    assert v[4] == 10.0
    assert math.isinf(v[0])


def test_uinf_levels_doubly_degenerate():
    model = double_infinite_well(2.0, 0.5)
    g = model.grid(2001)
    spec = eigensolve(model.hamiltonian(g), 6, g)
    formula = model.analytic.level_formula
    for n in range(3):
        np.testing.assert_allclose(spec.levels[2 * n:2 * n + 2], formula(n + 1), rtol=1e-4)
        assert spec.levels[2 * n + 1] - spec.levels[2 * n] < 1e-8


def test_uinf_eigenfunction_mirror_and_support():
    g = build_grid(-2, 2, 401, walls=True)
    left = uinf_eigenfunction(1, "L", 2.0, 0.5, g)
    right = uinf_eigenfunction(1, "R", 2.0, 0.5, g)
    np.testing.assert_array_equal(right, left[::-1])
    assert np.all(left[g.x > -0.5] == 0)
    assert g.inner(left, right) == 0.0


def test_uinf_eigenfunction_errors():
    g = build_grid(-2, 2, 401)
    with pytest.raises(ValueError):
        uinf_eigenfunction(0, "L", 2.0, 0.5, g)
    with pytest.raises(ValueError):
        uinf_eigenfunction(1, "up", 2.0, 0.5, g)
    with pytest.raises(ValueError):
        uinf_eigenfunction(1, "L", 3.0, 0.5, g)


@pytest.mark.parametrize("model", [
    quartic_sombrero(2.0, 3.0),
    sextic_factorized(0.5),
    double_oscillator(omega=2.0, a=1.5),
    square_double_well(20.0, 2.0, 0.5),
    double_infinite_well(3.0, 1.0),
])
def test_dict_roundtrip(model):
    back = model_from_dict(model.to_dict())
    assert back.to_dict() == model.to_dict()
    x = np.linspace(-1, 1, 7)
    np.testing.assert_array_equal(back(x), model(x))


def test_model_from_dict_aliases_and_errors():
    assert model_from_dict({"kind": "QuarticSombrero", "lambda": 2.0}).params["lam"] == 2.0
    assert model_from_dict({"kind": "SexticFactorized", "a": 2.0}).params["a_sextic"] == 2.0
    with pytest.raises(ValueError, match="unknown model kind"):
        model_from_dict({"kind": "Nope"})
    with pytest.raises(ValueError, match="bad parameters"):
        model_from_dict({"kind": "QuarticSombrero", "nu": 1.0})


@pytest.mark.parametrize("args", [(10.0, 0.5, 2.0), (10.0, 2.0, 0.0), (-1.0, 2.0, 0.5)])
def test_square_well_validation(args):
    with pytest.raises(ValueError):
        square_double_well(*args)
