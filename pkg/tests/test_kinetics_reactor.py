import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from reactorscale import kinetics_reactor as kr
from reactorscale.fields import ScalarField1D
from reactorscale.verify import unstable_reactor_config


def flow_config(**kw):
    return unstable_reactor_config(boundary="danckwerts").replace(**{"j_over_S": 2e-3, **kw})


def shooting_profile(cfg, T, z):
    """Single-interval shooting on y' = M y for the Danckwerts problem."""
    k1 = float(cfg.kinetics.rate(T, "forward"))
    k2 = float(cfg.kinetics.rate(T, "reverse"))
    u, DX, DY = cfg.velocity, cfg.D_X, cfg.D_Y
    M = np.array([
        [0, 0, 1, 0],
        [0, 0, 0, 1],
        [k1 / DX, -k2 / DX, u / DX, 0],
        [-k1 / DY, k2 / DY, 0, u / DY],
    ])
    P = scipy.linalg.expm(M * cfg.length)
    A = np.zeros((4, 4))
    A[0] = [-u, 0, DX, 0]
    A[1] = [0, -u, 0, DY]
    A[2] = P[2]
    A[3] = P[3]
    y0 = np.linalg.solve(A, [-u * cfg.C_X0, 0, 0, 0])
    return np.array([scipy.linalg.expm(M * zi) @ y0 for zi in z])


# -- kinetics ----------------------------------------------------------------


def test_arrhenius_matches_formula():
    kin = kr.ArrheniusKinetics(2.0e5, 5.0e4, 3.0e3, 2.0e4)
    T = np.array([300.0, 450.0, 800.0])
    np.testing.assert_allclose(kin.rate(T, "forward"), 2.0e5 * np.exp(-5.0e4 / (kr.GAS_CONSTANT * T)), rtol=1e-14)
    assert kr.arrhenius_rate(kin, 400.0, "reverse") == pytest.approx(3.0e3 * math.exp(-2.0e4 / (kr.GAS_CONSTANT * 400.0)))
    assert isinstance(kr.arrhenius_rate(kin, 400.0), float)


def test_rate_derivative_matches_finite_difference():
    kin = kr.ArrheniusKinetics(2.0e5, 5.0e4, 3.0e3, 2.0e4)
    T, h = 420.0, 1e-3
    fd = (kin.rate(T + h, "forward") - kin.rate(T - h, "forward")) / (2 * h)
    assert kin.rate_derivative(T, "forward") == pytest.approx(fd, rel=1e-8)


@pytest.mark.parametrize("bad", [
    dict(k0_forward=-1.0), dict(Ea_reverse=float("nan")), dict(gas_constant=0.0)])
def test_kinetics_validation(bad):
    args = dict(k0_forward=1.0, Ea_forward=1.0, k0_reverse=1.0, Ea_reverse=1.0)
    args.update(bad)
    with pytest.raises(ValueError):
        kr.ArrheniusKinetics(**args).validate()


def test_rate_rejects_bad_branch_and_temperature():
    kin = kr.ArrheniusKinetics(1.0, 1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        kin.rate(300.0, "sideways")
    with pytest.raises(ValueError):
        kin.rate(0.0, "forward")


@pytest.mark.parametrize("bad", [dict(D_X=0.0), dict(length=-1.0), dict(C_X0=-1.0),
                                 dict(boundary="open"), dict(advection_convention="up"), dict(T_wall=-5.0)])
def test_config_validation(bad):
    with pytest.raises(ValueError):
        flow_config(**bad).validate()


def test_printed_convention_flips_velocity():
    cfg = flow_config()
    assert cfg.replace(advection_convention="printed").velocity == -cfg.velocity


# -- steady isothermal profiles -----------------------------------------------


@pytest.mark.parametrize("T", [480.0, 500.0, 530.0])
def test_steady_profile_matches_single_shooting(T):
    cfg = flow_config()
    cx, cy = kr.steady_state_isothermal(cfg, T, n_nodes=41)
    ref = shooting_profile(cfg, T, cx.grid)
    np.testing.assert_allclose(cx.values, ref[:, 0], rtol=1e-8, atol=1e-10 * cfg.C_X0)
    np.testing.assert_allclose(cy.values, ref[:, 1], rtol=1e-8, atol=1e-10 * cfg.C_X0)


def test_steady_profile_conserves_total_with_equal_dispersion():
    cfg = flow_config()
    cx, cy = kr.steady_state_isothermal(cfg, 500.0, n_nodes=81)
    assert isinstance(cx, ScalarField1D) and cx.units == "mol/m^3"
    np.testing.assert_allclose(cx.values[-1] + cy.values[-1], cfg.C_X0, rtol=1e-10)


def test_steady_dirichlet_hits_end_values():
    cfg = flow_config(boundary="dirichlet", dirichlet_right=(10.0, 20.0, 500.0))
    cx, cy = kr.steady_state_isothermal(cfg, 500.0)
    assert cx.values[0] == pytest.approx(cfg.C_X0)
    assert cx.values[-1] == pytest.approx(10.0)
    assert cy.values[-1] == pytest.approx(20.0)


@pytest.mark.parametrize("kind", ["neumann", "periodic"])
def test_steady_gradient_only_ends_are_singular(kind):
    with pytest.raises(kr.SingularBoundaryError):
        kr.steady_state_isothermal(flow_config(), 500.0, boundary=kind)


def test_steady_stagnant_danckwerts_is_singular():
    with pytest.raises(kr.SingularBoundaryError):
        kr.steady_state_isothermal(flow_config(j_over_S=0.0), 500.0)


# -- linear stability ------------------------------------------------------------


def test_source_jacobian_matches_finite_difference():
    cfg = unstable_reactor_config()
    state = np.array([40.0, 60.0, 510.0])
    J = kr.source_jacobian(cfg, *state)
    for j in range(3):
        h = 1e-6 * max(abs(state[j]), 1.0)
        up, dn = state.copy(), state.copy()
        up[j] += h
        dn[j] -= h
        col = (np.array(kr.source_terms(cfg, *up)) - np.array(kr.source_terms(cfg, *dn))) / (2 * h)
        np.testing.assert_allclose(J[:, j], col, rtol=1e-6, atol=1e-9 * np.max(np.abs(J)))


def periodic_operator_eigs(cfg, state, n):
    """Eigenvalues of the linearised central-difference periodic operator."""
    h = cfg.length / n
    shift = np.roll(np.eye(n), 1, axis=1)
    lap = (shift + shift.T - 2 * np.eye(n)) / h ** 2
    grad = (shift - shift.T) / (2 * h)
    J = kr.source_jacobian(cfg, *state)
    D = (cfg.D_X, cfg.D_Y, cfg.chi_bar)
    A = np.zeros((3 * n, 3 * n))
    for a in range(3):
        for b in range(3):
            A[a * n:(a + 1) * n, b * n:(b + 1) * n] = J[a, b] * np.eye(n)
        A[a * n:(a + 1) * n, a * n:(a + 1) * n] += D[a] * lap - cfg.velocity * grad
    return np.linalg.eigvals(A)


def test_dispersion_relation_matches_discrete_operator():
    cfg = unstable_reactor_config()
    state = kr.equilibrium_state(cfg, 100.0)
    disc = periodic_operator_eigs(cfg, state, 128)
    top = np.sort(disc.real)[::-1][0]
    ks = 2 * np.pi * np.arange(1, 20) / cfg.length
    cont = max(r.max_real for r in kr.linear_stability(cfg, state, ks))
    assert top == pytest.approx(cont, rel=5e-3)


def test_stability_results_are_sorted():
    cfg = unstable_reactor_config()
    state = kr.equilibrium_state(cfg, 100.0)
    res = kr.linear_stability(cfg, state, [10.0, 100.0])
    for r in res:
        assert np.all(np.diff(r.growth_rate_real) <= 0)
        assert r.max_real == r.growth_rate_real[0]


def test_linear_stability_rejects_unsteady_state():
    cfg = unstable_reactor_config()
    with pytest.raises(kr.SteadyStateError):
        kr.linear_stability(cfg, (100.0, 0.0, 500.0), [10.0])


def test_min_length_sits_at_band_edge():
    cfg = unstable_reactor_config()
    state = kr.equilibrium_state(cfg, 100.0)
    L = kr.min_reactor_length(cfg, state)
    assert L == pytest.approx(0.023944, rel=1e-4)  # frozen
    k = 2 * np.pi / L
    assert abs(kr.max_growth_rate(cfg, state, k)) < 1e-9
    assert kr.max_growth_rate(cfg, state, 0.99 * k) > 0
    assert kr.max_growth_rate(cfg, state, 1.01 * k) < 0


def test_min_length_without_heat_release():
    cfg = unstable_reactor_config().replace(delta_H=0.0)
    assert kr.min_reactor_length(cfg, kr.equilibrium_state(cfg, 100.0)) == kr.NO_STRUCTURE


@settings(max_examples=40, deadline=None)
@given(T=st.floats(300.0, 900.0), total=st.floats(1e-3, 1e4))
def test_equilibrium_state_balances_rates(T, total):
    cfg = unstable_reactor_config()
    cx, cy, t = kr.equilibrium_state(cfg, total, T)
    k1 = cfg.kinetics.rate(T, "forward")
    k2 = cfg.kinetics.rate(T, "reverse")
    assert cx + cy == pytest.approx(total, rel=1e-12)
    assert k1 * cx == pytest.approx(k2 * cy, rel=1e-10)


# -- transient solver ------------------------------------------------------------


def test_grid_rules():
    cfg = unstable_reactor_config()
    z = kr.reactor_grid(cfg, 32)
    assert z[-1] < cfg.length and z[1] == pytest.approx(cfg.length / 32)
    assert kr.reactor_grid(cfg.replace(boundary="neumann"), 32)[-1] == cfg.length
    with pytest.raises(ValueError):
        kr.reactor_grid(cfg, 8)


def test_uniform_steady_state_stays_put():
    cfg = unstable_reactor_config()
    st_ = kr.equilibrium_state(cfg, 100.0)
    init = tuple(np.full(32, v) for v in st_)
    res = kr.simulate_transient(cfg, init, dt=0.05, t_end=1.0)
    np.testing.assert_allclose(res.T[-1], st_[2], rtol=1e-12)
    assert res.status == "completed" and res.times[-1] == pytest.approx(1.0)


@pytest.mark.parametrize("kind", ["neumann", "periodic"])
def test_closed_reactor_conserves_moles(kind):
    cfg = unstable_reactor_config(boundary=kind).replace(delta_H=0.0)
    n = 48
    z = kr.reactor_grid(cfg, n)
    init = (50 + 20 * np.cos(np.pi * z / cfg.length), np.full(n, 50.0), np.full(n, 500.0))
    m = kr.simulate_transient(cfg, init, dt=0.05, t_end=2.0).total_moles()
    assert np.max(np.abs(m / m[0] - 1)) < 1e-12


def test_steady_profile_is_transient_fixed_point():
    cfg = flow_config(delta_H=0.0, adiabatic=True, T_inlet=500.0)
    n = 129
    z = kr.reactor_grid(cfg, n)
    cx, cy = kr.steady_state_isothermal(cfg, 500.0, grid=z)
    res = kr.simulate_transient(cfg, (cx.values, cy.values, np.full(n, 500.0)), dt=0.05, t_end=20.0,
                                save_every=400)
    assert np.max(np.abs(res.C_X[-1] - cx.values)) < 1e-3 * cfg.C_X0


def test_transient_rows_and_fields():
    cfg = unstable_reactor_config()
    init = tuple(np.full(16, v) for v in kr.equilibrium_state(cfg, 100.0))
    res = kr.simulate_transient(cfg, init, dt=0.1, t_end=0.3)
    assert res.rows().shape == (res.times.size * 16, 5)
    cx, cy, T = res.fields_at(-1)
    assert T.units == "K"


@pytest.mark.parametrize("kw", [dict(dt=0.0, t_end=1.0), dict(dt=0.1, t_end=-1.0),
                                dict(dt=0.1, t_end=1.0, on_bound="ignore")])
def test_transient_argument_errors(kw):
    cfg = unstable_reactor_config()
    init = tuple(np.full(16, v) for v in kr.equilibrium_state(cfg, 100.0))
    with pytest.raises(ValueError):
        kr.simulate_transient(cfg, init, **kw)


def test_transient_shape_mismatch():
    cfg = unstable_reactor_config()
    with pytest.raises(ValueError):
        kr.simulate_transient(cfg, (np.ones(16), np.ones(17), np.ones(16)), dt=0.1, t_end=1.0)


def test_growth_beyond_bound_raises_or_stops():
    cfg = unstable_reactor_config()
    st_ = kr.equilibrium_state(cfg, 100.0)
    z = kr.reactor_grid(cfg, 32)
    init = (st_[0] + 0.5 * np.cos(2 * np.pi * 2 * z / cfg.length), np.full(32, st_[1]), np.full(32, st_[2]))
    with pytest.raises(kr.TimeStepInstabilityError):
        kr.simulate_transient(cfg, init, dt=0.05, t_end=200.0, norm_bound=1.05)
    res = kr.simulate_transient(cfg, init, dt=0.05, t_end=200.0, norm_bound=1.05, on_bound="stop")
    assert res.status == "blowup"
    assert kr.classify_structures(res, min_samples=2) == "destroying"


def test_classification_of_quiet_run():
    cfg = unstable_reactor_config().replace(delta_H=0.0)
    init = tuple(np.full(32, v) for v in kr.equilibrium_state(cfg, 100.0))
    res = kr.simulate_transient(cfg, init, dt=0.1, t_end=2.0)
    assert kr.classify_structures(res) == "stationary"
    with pytest.raises(ValueError):
        kr.classify_structures(res, min_samples=100)
