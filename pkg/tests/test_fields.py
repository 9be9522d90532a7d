import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tumourlab.errors import DomainError
from tumourlab.fields import (
    SimState,
    ab_field,
    derive,
    face_velocity,
    fraction_sources,
    fractions,
    pressure_from_density,
    reaction_field,
)
from tumourlab.grid import Grid
from tumourlab.model import GrowthModel, eval_rates


def test_pressure_examples():
    for g in (1.5, 5.0, 80.0):
        assert np.all(pressure_from_density(np.ones(4), g) == 1.0)
    assert np.all(pressure_from_density(np.zeros(4), 5.0) == 0.0)
    assert pressure_from_density(np.array([1.2]), 5.0)[0] == pytest.approx(2.48832, rel=1e-15)


def test_pressure_domain():
    with pytest.raises(DomainError):
        pressure_from_density(np.ones(2), 1.0)
    with pytest.raises(DomainError):
        pressure_from_density(np.array([-1e-10]), 2.0)
    # tiny undershoots are clamped
    assert pressure_from_density(np.array([-1e-14]), 2.0)[0] == 0.0


def test_fraction_examples():
    c1, c2 = fractions(np.array([0.3, 0.0, 0.02]), np.array([0.1, 0.0, 0.0]))
    np.testing.assert_allclose(c1, [0.75, 0.5, 1.0])
    np.testing.assert_allclose(c2, [0.25, 0.5, 0.0])


@given(st.lists(st.tuples(st.floats(0, 1), st.floats(1e-6, 1e3)), min_size=1, max_size=30))
def test_fractions_invert_reconstruction(pairs):
    c = np.array([a for a, _ in pairs])
    n = np.array([b for _, b in pairs])
    c1, c2 = fractions(c * n, (1 - c) * n)
    np.testing.assert_allclose(c1, c, atol=1e-14)
    np.testing.assert_allclose(c2, 1 - c, atol=1e-14)
    assert np.all((0 <= c1) & (c1 <= 1))


@given(st.floats(0, 1))
def test_reaction_field_ignores_vacuum_tie_break(theta):
    m = GrowthModel.tumour_host()
    p = np.zeros(3)
    assert np.all(reaction_field(np.full(3, theta), np.full(3, 1 - theta), p, m) == 2.0)


def test_reaction_field_examples(host_model):
    assert reaction_field(np.array([1.0]), np.array([0.0]), np.array([3.0]), host_model)[0] == 0.0
    assert np.all(reaction_field(np.ones(2), np.zeros(2), np.ones(2), GrowthModel()) == 0)


def test_ab_field(host_model):
    g = Grid(1.0, 20)
    w = ab_field(g.centers**2, np.zeros(20), g)
    np.testing.assert_allclose(w[1:-1], 2.0, rtol=1e-12)
    s = derive(SimState(np.zeros(20), np.zeros(20), 0.0, 5.0), g, host_model)
    assert np.all(s.w == 2.0)
    s = derive(SimState(np.zeros(20), np.zeros(20), 0.0, 5.0), g, GrowthModel())
    assert np.all(s.w == 0.0)


@given(st.floats(-3, 3))
def test_ab_field_linear_in_R(k):
    g = Grid(1.0, 12)
    p = np.cos(g.centers)
    R = np.sin(3 * g.centers)
    base = ab_field(p, np.zeros(12), g)
    np.testing.assert_allclose(ab_field(p, k * R, g), base + k * R, atol=1e-12)


def test_face_velocity_signs():
    g = Grid(1.0, 4)
    assert np.all(face_velocity(np.ones(4), g) == 0)
    u = face_velocity(g.centers, g)
    np.testing.assert_allclose(u[1:-1], -1.0)
    u = face_velocity(np.array([1.0, 1.0, 0.0, 0.0]), g)
    assert u[2] > 0 and u[0] == 0 and u[-1] == 0


def test_fraction_sources_sum_to_zero(host_model, rng):
    c1 = rng.uniform(0, 1, 50)
    p = rng.uniform(0, 4, 50)
    s1, s2 = fraction_sources(c1, 1 - c1, p, host_model)
    np.testing.assert_allclose(s1 + s2, 0.0, atol=1e-13)


def test_fraction_sources_match_species_equations(host_model, rng):
    # d/dt (n1/n) from the species reactions equals s1 when transport is off
    n1 = rng.uniform(0.1, 1, 20)
    n2 = rng.uniform(0.1, 1, 20)
    p = (n1 + n2) ** 2
    r = eval_rates(host_model, p)
    dn1 = n1 * r.F1 + n2 * r.G1
    dn2 = n1 * r.F2 + n2 * r.G2
    n = n1 + n2
    expected = (dn1 * n - n1 * (dn1 + dn2)) / n**2
    s1, _ = fraction_sources(n1 / n, n2 / n, p, host_model)
    np.testing.assert_allclose(s1, expected, atol=1e-12)


def test_derived_invariants(host_model, rng):
    g = Grid(2.0, 64)
    st_ = SimState(rng.uniform(0, 1, 64), rng.uniform(0, 1, 64), 0.0, 3.0)
    d = derive(st_, g, host_model)
    np.testing.assert_allclose(d.p, d.n**3)
    np.testing.assert_allclose(d.c1 + d.c2, 1.0)
    assert d.u.size == 65
