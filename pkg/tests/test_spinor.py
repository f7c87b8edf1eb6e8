import math
import warnings

import numpy as np
import pytest

from ssb_lab.eigen import cluster_degeneracies, eigensolve
from ssb_lab.lattice import build_grid
from ssb_lab.spinor import (
    GOLDEN,
    CommensurabilityWarning,
    SpinorModel,
    SpinorState,
    analytic_spectrum,
    analytic_spinor_spectrum,
    build_spinor_model,
    ground_pair,
    hamiltonian,
    hermite_functions,
    sigma3_commutator_check,
    to_field_form,
)
from ssb_lab.symmetry import detect_ssb, sigma3

GRID = build_grid(-8, 8, 1601)


def test_analytic_spectrum_golden():
    levels = [lv.energy for lv in analytic_spectrum(SpinorModel(), 8)[:8]]
    np.testing.assert_allclose(levels, [0, 0, 1, GOLDEN, 2, 3, 2 * GOLDEN, 4], atol=1e-15)


def test_clusters_at_default_tolerance():
    levels = [lv.energy for lv in analytic_spectrum(SpinorModel(), 20)]
    mult = cluster_degeneracies(levels, 1e-8).multiplicities
    assert mult[0] == 2 and all(m == 1 for m in mult[1:])


def test_commensurate_ratio_warns():
    with pytest.warns(CommensurabilityWarning):
        build_spinor_model(2.0, 1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        build_spinor_model()


def test_hermite_functions_orthonormal():
    g = build_grid(-12, 12, 4001)
    f = hermite_functions(10, g.x, 1.0, 1.0, 1.0)
    np.testing.assert_allclose(f @ f.T * g.h, np.eye(11), atol=1e-10)


def test_fd_matches_analytic():
    model = SpinorModel()
    spec = eigensolve(hamiltonian(model, GRID), 8, GRID)
    exact = [lv.energy for lv in analytic_spectrum(model, 8)[:8]]
    np.testing.assert_allclose(spec.levels, exact, atol=1e-3)


def test_ground_pair():
    model = SpinorModel()
    r, l = ground_pair(model, GRID)
    assert abs(r.inner(l)) < 1e-10
    np.testing.assert_allclose(sigma3(GRID.n)(r.stacked), l.stacked)
    assert r.norm() == pytest.approx(1.0, abs=1e-10)


def test_ground_pair_needs_resolved_grid():
    with pytest.raises(ValueError):
        ground_pair(SpinorModel(), build_grid(-1, 1, 101))


def test_sigma3_commutes_only_without_coupling():
    assert sigma3_commutator_check(SpinorModel(), GRID) == 0.0
    assert sigma3_commutator_check(SpinorModel(), GRID, coupling=0.1) == pytest.approx(0.2)


def test_detect_ssb_on_exact_spectrum():
    spec = analytic_spinor_spectrum(SpinorModel(), GRID, 6)
    v = detect_ssb(spec, sigma3(GRID.n))
    assert v.broken and v.ground_multiplicity == 2


def test_field_form_roundtrip_entrywise():
    model = SpinorModel()
    form = to_field_form(model)
    up, down = form.channel_hamiltonians(GRID)
    op = hamiltonian(model, GRID)
    n = GRID.n
    np.testing.assert_allclose(up.diag, op.diag[:n], rtol=4 * np.finfo(float).eps, atol=0)
    np.testing.assert_allclose(down.diag, op.diag[n:], rtol=4 * np.finfo(float).eps, atol=0)
    back = form.to_model()
    assert back.omega_plus == pytest.approx(model.omega_plus, rel=1e-15)
    assert back.omega_minus == pytest.approx(model.omega_minus, rel=1e-15)


def test_field_form_values_and_signed_difference():
    form = to_field_form(SpinorModel())
    assert form.omega0 == pytest.approx(1.344997, abs=1e-6)
    assert form.epsilon0 == pytest.approx(0.6545085, abs=1e-7)
    assert form.epsilon_delta == pytest.approx(0.1545085, abs=1e-7)
    flipped = to_field_form(SpinorModel(1.0, GOLDEN))
    assert flipped.omega_delta_sq < 0
    assert flipped.to_model().omega_plus == pytest.approx(1.0)


def test_field_form_levels():
    form = to_field_form(SpinorModel())
    exact = sorted(lv.energy for lv in analytic_spectrum(SpinorModel(), 5))
    np.testing.assert_allclose(form.analytic_levels(5), exact, atol=1e-14)


def test_spinor_state_helpers():
    psi = np.arange(6.0)
    s = SpinorState.from_stacked(psi, 0.5)
    np.testing.assert_array_equal(s.up, [0, 1, 2])
    np.testing.assert_array_equal(s.stacked, psi)
    assert s.norm() == pytest.approx(math.sqrt(55 * 0.5))


def test_model_validation():
    with pytest.raises(ValueError):
        SpinorModel(omega_plus=-1.0)
