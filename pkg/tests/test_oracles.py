import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from tumourlab.errors import DomainError, NumericalFailure
from tumourlab.grid import Grid, integrate
from tumourlab.model import GrowthModel, GrowthTerm
from tumourlab.oracles import (
    BarenblattSpec,
    barenblatt_cell_averages,
    barenblatt_profile,
    convergence_study,
    run_oracles,
    uniform_ode_reference,
    uniform_pde_deviation,
)


def test_spec_guards():
    for bad in (dict(gamma=1.0), dict(gamma=2.0, mass=0.0), dict(gamma=2.0, t0=0.0)):
        with pytest.raises(DomainError):
            BarenblattSpec(**bad)
    with pytest.raises(DomainError):
        barenblatt_profile(BarenblattSpec(2.0), -0.05, 0.0)


def test_barenblatt_frozen_values():
    s = BarenblattSpec(2.0)
    assert (s.m, s.alpha, s.k) == (3.0, 0.25, 1.0 / 12.0)
    assert s.C == pytest.approx(0.1837762984739307, rel=1e-14)
    assert s.radius(0.0) == pytest.approx(0.6345342361416729, rel=1e-14)
    assert float(barenblatt_profile(s, 0.0, 0.0)) == pytest.approx(1.0032867197814097, rel=1e-14)


@pytest.mark.parametrize("gamma", [1.5, 2.0, 5.0])
@pytest.mark.parametrize("t", [0.0, 0.2, 0.5])
def test_barenblatt_mass(gamma, t):
    s = BarenblattSpec(gamma, mass=0.8)
    r = s.radius(t)
    mass, _ = quad(lambda x: float(barenblatt_profile(s, t, x)), -r, r, limit=200)
    assert mass == pytest.approx(0.8, rel=1e-8)
    g = Grid(3.0, 400)
    assert integrate(barenblatt_cell_averages(s, t, g), g) == pytest.approx(0.8, rel=1e-3)


@given(st.floats(1.1, 20), st.floats(0, 3))
def test_barenblatt_radius_scaling(gamma, t):
    s = BarenblattSpec(gamma)
    ratio = s.radius(t) / s.radius(0.0)
    assert ratio == pytest.approx(((t + s.t0) / s.t0) ** (1 / (s.m + 1)), rel=1e-12)


@given(st.floats(1.1, 20), st.floats(0, 2), st.floats(-2, 2))
def test_barenblatt_symmetric_and_supported(gamma, t, x):
    s = BarenblattSpec(gamma)
    assert barenblatt_profile(s, t, x) == barenblatt_profile(s, t, -x)
    if abs(x) >= s.radius(t) * (1 + 1e-12):
        assert barenblatt_profile(s, t, x) == 0.0


def test_barenblatt_solves_the_pde_away_from_the_edge():
    # n_t = (gamma/m) (n^m)_xx checked with centred differences inside the support
    s = BarenblattSpec(2.0)
    x = np.linspace(-0.3, 0.3, 7)
    t, h, dx = 0.2, 1e-5, 1e-3
    nt = (barenblatt_profile(s, t + h, x) - barenblatt_profile(s, t - h, x)) / (2 * h)
    um = lambda y: barenblatt_profile(s, t, y) ** s.m  # noqa: E731
    lap = (um(x + dx) - 2 * um(x) + um(x - dx)) / dx**2
    np.testing.assert_allclose(nt, s.gamma / s.m * lap, rtol=1e-4)


def test_ode_trivial_cases(host_model):
    tr = uniform_ode_reference(0.3, 0.1, 5.0, GrowthModel(), 1.0, dt=1e-3)
    assert np.all(tr.n1 == 0.3) and np.all(tr.n2 == 0.1)
    tr = uniform_ode_reference(0.0, 0.0, 5.0, host_model, 1.0, dt=1e-3)
    assert np.all(tr.n1 == 0.0) and np.all(tr.n2 == 0.0)
    with pytest.raises(DomainError):
        uniform_ode_reference(-0.1, 0.0, 5.0, host_model, 1.0)


def test_ode_frozen_trajectory(host_model):
    tr = uniform_ode_reference(0.2, 0.2, 5.0, host_model, 1.0, sample_every=0.25)
    np.testing.assert_allclose(tr.t, [0, 0.25, 0.5, 0.75, 1.0], rtol=1e-14)
    np.testing.assert_allclose(tr.n1, [0.2, 0.3248154899982396, 0.47536854223494873,
                                       0.5734890877938335, 0.6580782257803995], rtol=1e-12)
    np.testing.assert_allclose(tr.n2, [0.2, 0.3227642479327444, 0.4488370772966903,
                                       0.4622560078486597, 0.4236355634286685], rtol=1e-12)


def test_ode_self_consistent_under_halving(host_model):
    a = uniform_ode_reference(0.2, 0.2, 5.0, host_model, 1.0)
    b = uniform_ode_reference(0.2, 0.2, 5.0, host_model, 1.0, dt=5e-6)
    assert abs(a.n1[-1] - b.n1[-1]) < 1e-11 and abs(a.n2[-1] - b.n2[-1]) < 1e-11


def test_ode_stays_below_homeostatic_density(host_model):
    tr = uniform_ode_reference(0.1, 0.4, 5.0, host_model, 5.0, dt=1e-4, sample_every=0.01)
    assert np.max(tr.n1 + tr.n2) <= host_model.P_H ** (1 / 5.0) + 1e-9


def test_ode_blow_up_guard():
    # a step far beyond RK4 stability makes the iterates oscillate and explode
    stiff = GrowthModel(F1=GrowthTerm("affine", 50.0, 1.0))
    with pytest.raises(NumericalFailure):
        uniform_ode_reference(0.5, 0.0, 2.0, stiff, 5.0, dt=0.5)


@pytest.mark.slow
def test_explicit_convergence_order():
    res = convergence_study("explicit", BarenblattSpec(2.0))
    assert res.errors[0] > res.errors[1] > res.errors[2]
    assert 0.8 <= res.order <= 1.5


def test_convergence_on_small_grids():
    res = convergence_study("explicit", BarenblattSpec(2.0), Ns=(50, 100), T=0.1)
    assert res.errors[1] < res.errors[0]
    assert len(res.orders) == 1 and math.isfinite(res.order)


def test_uniform_pde_matches_ode():
    assert uniform_pde_deviation(T=0.2) < 1e-4


def test_run_oracles_rejects_unknown_case():
    with pytest.raises(ValueError):
        run_oracles("nope")


def test_run_oracles_uniform_case():
    (row,) = run_oracles("uniform_ode")
    assert row.passed and row.grid_N == 16 and math.isnan(row.observed_order)
