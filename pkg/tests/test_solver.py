import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tumourlab import _kernels
from tumourlab.errors import ConfigError, DomainError, NewtonDivergence, NumericalFailure
from tumourlab.fields import SimState, derive, fraction_sources, fractions
from tumourlab.grid import Grid, integrate, second_difference
from tumourlab.model import GrowthModel, eval_rates
from tumourlab.solver import (
    SchemeConfig,
    dt_limit,
    explicit_step,
    regularise_initial,
    semi_implicit_step,
    solve_pme_implicit,
    stable_dt,
    step,
    transport_fractions,
)


def bump(g, c, w, h):
    r = (g.centers - c) / w
    out = np.zeros(g.N)
    m = np.abs(r) < 1
    out[m] = h * np.exp(1 - 1 / (1 - r[m] ** 2))
    return out


def test_scheme_config_validation():
    with pytest.raises(ConfigError):
        SchemeConfig(scheme="rk4")
    with pytest.raises(ConfigError):
        SchemeConfig(cfl=1.5)
    with pytest.raises(ConfigError):
        SchemeConfig(newton_tol=0)


def test_regularise_initial():
    s = regularise_initial(np.zeros(5), np.zeros(5), 0.01, 5.0)
    assert np.all(s.n1 == 0.01) and np.all(s.n == 0.02) and s.t == 0.0
    a = np.array([0.0, 1.0, 0.5])
    s = regularise_initial(a, a, 0.0, 2.0)
    np.testing.assert_array_equal(s.n1, a)
    with pytest.raises(DomainError):
        regularise_initial(-a, a, 0.0, 2.0)
    with pytest.raises(DomainError):
        regularise_initial(a, a, -0.1, 2.0)


def test_stable_dt_examples(host_model):
    cfg = SchemeConfig(dt_max=1e9, cfl=0.9)
    assert dt_limit(3.0, 0.0, 5.0, 0.01, cfg) == pytest.approx(3e-6, rel=1e-12)
    assert dt_limit(3.0, 0.0, 10.0, 0.01, cfg) == pytest.approx(1.5e-6, rel=1e-12)
    assert dt_limit(0.0, 0.0, 5.0, 0.01, SchemeConfig(dt_max=0.02)) == 0.02
    semi = SchemeConfig("semi_implicit", cfl=0.9, dt_max=1e9)
    assert dt_limit(3.0, 2.0, 5.0, 0.01, semi, r_inf=2.0) == pytest.approx(0.0045)
    assert dt_limit(3.0, 0.0, 5.0, 0.01, semi, r_inf=2.0) == pytest.approx(0.45)
    g = Grid(1.0, 16)
    s = SimState(np.zeros(16), np.zeros(16), 0.0, 5.0)
    assert stable_dt(s, derive(s, g, host_model), g, SchemeConfig(dt_max=0.01)) == 0.01


def test_uniform_state_is_one_euler_step(host_model):
    g = Grid(1.0, 16)
    s = SimState(np.full(16, 0.3), np.full(16, 0.1), 0.0, 5.0)
    new, rep = explicit_step(s, g, host_model, SchemeConfig(), 1e-3)
    p = 0.4**5
    r = eval_rates(host_model, p)
    np.testing.assert_allclose(new.n1, 0.3 + 1e-3 * (0.3 * r.F1 + 0.1 * r.G1), rtol=1e-15)
    np.testing.assert_allclose(new.n2, 0.1 + 1e-3 * (0.3 * r.F2 + 0.1 * r.G2), rtol=1e-15)
    assert new.t == 1e-3 and rep.dt_used == 1e-3


@given(st.integers(0, 2**32 - 1))
def test_zero_model_conserves_mass(seed):
    rng = np.random.default_rng(seed)
    g = Grid(1.0, 40)
    s = SimState(rng.uniform(0, 1, 40), rng.uniform(0, 1, 40), 0.0, 3.0)
    d = derive(s, g, GrowthModel())
    dt = stable_dt(s, d, g, SchemeConfig())
    new, rep = explicit_step(s, g, GrowthModel(), SchemeConfig(), dt)
    assert abs(integrate(new.n, g) - integrate(s.n, g)) <= 1e-14 * max(1.0, integrate(s.n, g)) * 10
    assert new.n1.min() >= 0 and new.n2.min() >= 0


@given(st.integers(0, 2**32 - 1))
def test_mass_identity_with_reactions(seed):
    rng = np.random.default_rng(seed)
    m = GrowthModel.tumour_host()
    g = Grid(2.0, 50)
    s = SimState(rng.uniform(0, 0.6, 50), rng.uniform(0, 0.6, 50), 0.0, 5.0)
    dt = stable_dt(s, derive(s, g, m), g, SchemeConfig())
    new, rep = explicit_step(s, g, m, SchemeConfig(), dt)
    assert rep.clamped_mass == 0.0
    gap = integrate(new.n, g) - integrate(s.n, g) - rep.source_mass
    assert abs(gap) <= 1e-13


def test_explicit_kernel_matches_numpy_reference(host_model, rng):
    g = Grid(1.5, 30)
    n1 = rng.uniform(0, 1, 30)
    n2 = rng.uniform(0, 1, 30)
    dt = 1e-4
    p = (n1 + n2) ** 4
    u = -(p[1:] - p[:-1]) / g.dx
    f1 = np.zeros(31)
    f2 = np.zeros(31)
    f1[1:-1] = np.where(u > 0, u * n1[:-1], u * n1[1:])
    f2[1:-1] = np.where(u > 0, u * n2[:-1], u * n2[1:])
    r = eval_rates(host_model, p)
    exp1 = n1 - dt / g.dx * np.diff(f1) + dt * (n1 * r.F1 + n2 * r.G1)
    exp2 = n2 - dt / g.dx * np.diff(f2) + dt * (n1 * r.F2 + n2 * r.G2)
    codes, amps, thrs = host_model.kernel_params()
    o1, o2, src = _kernels.explicit_update(n1, n2, g.dx, dt, 4.0, codes, amps, thrs)
    np.testing.assert_allclose(o1, exp1, rtol=1e-13)
    np.testing.assert_allclose(o2, exp2, rtol=1e-13)
    assert src == pytest.approx(g.dx * np.sum(n1 * r.F + n2 * r.G), rel=1e-13)


def test_step_integrals_match_diagnostics(host_model, rng):
    from tumourlab.diagnostics import complementarity_residual, estimate_grad_p_sq, estimate_w_pair

    g = Grid(1.5, 30)
    s = SimState(rng.uniform(0, 1, 30), rng.uniform(0, 1, 30), 0.0, 4.0)
    d = derive(s, g, host_model)
    codes, amps, thrs = host_model.kernel_params()
    out = _kernels.step_integrals(s.n1, s.n2, g.dx, 4.0, codes, amps, thrs, 1e-12)
    pw, wm = estimate_w_pair(d, g)
    r = eval_rates(host_model, d.p)
    ref = [d.p.max(), np.abs(d.u).max(), d.n.min(), estimate_grad_p_sq(d, g), pw,
           integrate(d.p * d.w**2, g), complementarity_residual(s, d, host_model, g),
           integrate(s.n1 * r.F + s.n2 * r.G, g), wm]
    np.testing.assert_allclose(out, ref, rtol=1e-12, atol=1e-14)


def test_explicit_step_flags_nan(host_model):
    g = Grid(1.0, 16)
    s = SimState(np.full(16, np.nan), np.zeros(16), 0.0, 2.0)
    with pytest.raises(NumericalFailure):
        explicit_step(s, g, host_model, SchemeConfig(), 1e-3)


def test_explicit_step_flags_large_undershoot():
    g = Grid(1.0, 16)
    n = np.zeros(16)
    n[8] = 1.0
    s = SimState(n, np.zeros(16), 0.0, 2.0)
    # far beyond the stable step: donor cell goes strongly negative
    with pytest.raises(NumericalFailure):
        explicit_step(s, g, GrowthModel(), SchemeConfig(), 10.0)


def test_step_dispatch(host_model):
    g = Grid(1.0, 16)
    s = SimState(np.full(16, 0.2), np.full(16, 0.2), 0.0, 5.0)
    a, _ = step(s, g, host_model, SchemeConfig("explicit"), 1e-3)
    b, _ = step(s, g, host_model, SchemeConfig("semi_implicit"), 1e-3)
    np.testing.assert_allclose(a.n, b.n, rtol=1e-5)
    with pytest.raises(ConfigError):
        step(s, g, host_model, SchemeConfig("lagrangian"), 1e-3)


def test_pme_solve_satisfies_equation(rng):
    g = Grid(2.0, 80)
    n = bump(g, 0.0, 1.0, 1.0) + 0.01
    y, it = solve_pme_implicit(n, n, 5.0, 1e-3, g, tol=1e-12)
    res = y - 1e-3 * 5 / 6 * second_difference(y**6, g) - n
    assert np.max(np.abs(res)) <= 1e-12 and it >= 1
    assert integrate(y, g) == pytest.approx(integrate(n, g), rel=1e-12)


def test_pme_solve_reports_divergence():
    g = Grid(2.0, 80)
    n = bump(g, 0.0, 1.0, 1.0)
    with pytest.raises(NewtonDivergence):
        solve_pme_implicit(n, n, 5.0, 1.0, g, tol=1e-14, max_iter=1)


def test_semi_implicit_uniform_zero_model_fixed_point():
    g = Grid(1.0, 20)
    s = SimState(np.full(20, 0.3), np.full(20, 0.5), 0.0, 5.0, 0.0)
    new, rep = semi_implicit_step(s, g, GrowthModel(), SchemeConfig("semi_implicit"), 0.01)
    np.testing.assert_allclose(new.n1, 0.3, rtol=1e-14)
    np.testing.assert_allclose(new.n2, 0.5, rtol=1e-14)
    assert rep.newton_iters == 0


def _one_step_gap_rate(model, N, dt):
    g = Grid(3.0, N)
    s = SimState(bump(g, -0.4, 1, 0.5) + 0.01, bump(g, 0.4, 1, 0.5) + 0.01, 0.0, 5.0, 0.01)
    a, _ = explicit_step(s, g, model, SchemeConfig(), dt)
    b, _ = semi_implicit_step(s, g, model, SchemeConfig("semi_implicit"), dt)
    return (np.max(np.abs(a.n1 - b.n1)) + np.max(np.abs(a.n2 - b.n2))) / dt


def test_semi_implicit_one_step_gap_is_first_order_in_dx(host_model):
    # upwind versus centred pressure fluxes: the per-step gap is C(dx) * dt
    # with C(dx) = O(dx), so the rate settles as dt -> 0 and halves with dx
    r100 = [_one_step_gap_rate(host_model, 100, dt) for dt in (1e-5, 5e-6)]
    assert r100[0] == pytest.approx(r100[1], rel=0.05)
    r200 = _one_step_gap_rate(host_model, 200, 2.5e-6)
    assert r100[1] / r200 == pytest.approx(2.0, rel=0.2)


def test_semi_implicit_keeps_fractions_consistent(host_model):
    g = Grid(3.0, 100)
    s = SimState(bump(g, -0.4, 1, 0.5) + 0.01, bump(g, 0.4, 1, 0.5) + 0.01, 0.0, 20.0, 0.01)
    new, rep = semi_implicit_step(s, g, host_model, SchemeConfig("semi_implicit"), 1e-3)
    c1, c2 = fractions(new.n1, new.n2)
    assert np.all((c1 >= 0) & (c1 <= 1))
    assert new.n1.min() >= 0 and new.n2.min() >= 0
    assert integrate(new.n, g) - integrate(s.n, g) == pytest.approx(rep.source_mass, abs=1e-10)


@given(st.integers(0, 2**32 - 1), st.floats(1e-4, 1e-2))
def test_transport_fractions_is_convex(seed, dt):
    rng = np.random.default_rng(seed)
    N = 25
    c = rng.uniform(0, 1, N)
    y = rng.uniform(0.01, 2, N)
    u = np.concatenate(([0.0], rng.normal(0, 5, N - 1), [0.0]))
    out = transport_fractions(c, y, u, dt, 0.05)
    lo = np.minimum(np.minimum(c, np.roll(c, 1)), np.roll(c, -1))
    hi = np.maximum(np.maximum(c, np.roll(c, 1)), np.roll(c, -1))
    assert np.all(out >= lo - 1e-14) and np.all(out <= hi + 1e-14)


def test_transport_fractions_constant_is_invariant(rng):
    y = rng.uniform(0.1, 1, 10)
    u = np.concatenate(([0.0], rng.normal(0, 1, 9), [0.0]))
    np.testing.assert_allclose(transport_fractions(np.full(10, 0.3), y, u, 0.01, 0.1), 0.3)


def test_fraction_sources_used_by_semi_implicit_on_uniform_data(host_model):
    g = Grid(1.0, 16)
    s = SimState(np.full(16, 0.3), np.full(16, 0.1), 0.0, 5.0, 0.0)
    dt = 1e-4
    new, _ = semi_implicit_step(s, g, host_model, SchemeConfig("semi_implicit"), dt)
    c1, c2 = fractions(s.n1, s.n2)
    s1, _ = fraction_sources(c1, c2, s.n ** 5, host_model)
    c1_new, _ = fractions(new.n1, new.n2)
    np.testing.assert_allclose(c1_new, c1 + dt * s1, rtol=1e-12)
