import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reactorscale.chemisorption import (
    CorrelationRangeError,
    DegenerateMatrixError,
    DiffusionMatrix,
    IllPosedMatrixError,
    PhaseError,
    compute_tstar,
    correlation_hp,
    correlation_liquid_mtc,
    correlation_product_decay,
    correlation_surface_A,
    correlation_tp,
    default_params,
    derive_laplace_coefficients,
    max_product_surface_conc,
    pre_tstar_profiles,
    solve_moving_plane,
    surface_concentrations,
)
from reactorscale.chemisorption.laplace import laplace_image


@pytest.fixture(scope="module")
def base():
    p = default_params()
    c = derive_laplace_coefficients(p)
    return p, c, compute_tstar(p, c)


# -- diffusion matrices ---------------------------------------------------------


@pytest.mark.parametrize("m, err", [
    ((1.0, 2.0, -2.0, 1.0), IllPosedMatrixError),   # complex pair
    ((1.0, 2.0, 2.0, 1.0), IllPosedMatrixError),    # negative eigenvalue
    ((1.0, -1.0, 0.0, 0.0), ValueError),            # zero main coefficient
])
def test_matrix_validation(m, err):
    with pytest.raises(err):
        DiffusionMatrix(*m).validate()


def test_repeated_eigenvalue_needs_diagonal_branch():
    p = default_params().replace(D_BB=1e-9, D_BE=1e-10, D_EB=0.0, D_EE=1e-9)
    with pytest.raises(DegenerateMatrixError):
        derive_laplace_coefficients(p)


def test_replace_edits_matrix_entries():
    p = default_params().replace(D_EB=0.1e-9, alpha=1e-4)
    assert p.D.d21 == 0.1e-9 and p.alpha == 1e-4 and p.D_BB == default_params().D_BB


# -- surface-reaction closed form ------------------------------------------------


def test_tstar_frozen(base):
    assert base[2] == pytest.approx(1.7535760662331954, rel=1e-12)


def test_laplace_image_solves_transformed_problem(base):
    p, c, _ = base
    s = 1.0  # Laplace variable [1/s]
    h = 2e-7
    x = np.array([h, 2 * h, 3e-5, 3e-5 + h, 3e-5 - h])
    b, e = laplace_image(p, c, np.concatenate([[0.0], x]), s)
    u = np.vstack([b, e])
    D = p.D.matrix
    # interior: s U - U(0) = D U''
    d2 = (u[:, 4] - 2 * u[:, 3] + u[:, 5]) / h**2
    lhs = s * u[:, 3] - np.array([p.C_B_inf, 0.0])
    np.testing.assert_allclose(D @ d2, lhs, rtol=2e-4)
    # interface: D U'(0) = q (1, -2) / s, one-sided second-order difference
    du = (-3 * u[:, 0] + 4 * u[:, 1] - u[:, 2]) / (2 * h)
    np.testing.assert_allclose(D @ du, p.surface_flux * np.array([1.0, -2.0]) / s, rtol=1e-4)


def test_surface_values_match_profiles(base):
    p, c, ts = base
    for t in (0.1 * ts, 0.5 * ts, ts):
        b, e = pre_tstar_profiles(p, c, [0.0], t, ts)
        bs, es = surface_concentrations(p, c, t, ts)
        assert b[0] == pytest.approx(bs, rel=1e-12, abs=1e-12)
        assert e[0] == pytest.approx(es, rel=1e-12)


def test_surface_B_vanishes_at_tstar_and_product_peaks(base):
    p, c, ts = base
    bs, es = surface_concentrations(p, c, ts, ts)
    assert abs(bs) < 1e-12 * p.C_B_inf
    assert max_product_surface_conc(p, c) == pytest.approx(es, rel=1e-12)


def test_product_peak_independent_of_gas_side(base):
    p, c, _ = base
    q = p.replace(alpha=1e-4, C_A_inf=0.9)
    assert max_product_surface_conc(q, derive_laplace_coefficients(q)) == pytest.approx(
        max_product_surface_conc(p, c), rel=1e-12)


def test_diagonal_surface_values():
    p = default_params().replace(D_BE=0.0, D_EB=0.0)
    c = derive_laplace_coefficients(p)
    t = 0.5
    q = p.surface_flux
    bs, es = surface_concentrations(p, c, t)
    assert bs == pytest.approx(p.C_B_inf - 2 * q * math.sqrt(t / (math.pi * p.D_BB)), rel=1e-12)
    assert es == pytest.approx(4 * q * math.sqrt(t / (math.pi * p.D_EE)), rel=1e-12)


def test_far_field_untouched(base):
    p, c, ts = base
    b, e = pre_tstar_profiles(p, c, [1e-3], 0.5 * ts, ts)
    assert b[0] == pytest.approx(p.C_B_inf, rel=1e-12)
    assert abs(e[0]) < 1e-12


def test_phase_errors(base):
    p, c, ts = base
    with pytest.raises(PhaseError):
        surface_concentrations(p, c, 1.01 * ts, ts)
    with pytest.raises(PhaseError):
        pre_tstar_profiles(p, c, [0.0], 0.0, ts)
    with pytest.raises(ValueError):
        pre_tstar_profiles(p, c, [-1e-6], 0.5 * ts, ts)


@settings(max_examples=30, deadline=None)
@given(dbb=st.floats(0.1, 5.0), dee=st.floats(0.1, 5.0), alpha=st.floats(1e-5, 1e-3), cb=st.floats(1.0, 50.0))
def test_diagonal_tstar_closed_form(dbb, dee, alpha, cb):
    p = default_params().replace(D_BB=dbb * 1e-9, D_EE=dee * 1e-9, D_BE=0.0, D_EB=0.0, alpha=alpha, C_B_inf=cb)
    ts = compute_tstar(p, derive_laplace_coefficients(p))
    ref = math.pi * p.D_BB * cb**2 / (4 * alpha**2 * p.C_A_inf**2)
    assert ts == pytest.approx(ref, rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(dbe=st.floats(-0.3, 0.5), deb=st.floats(-0.3, 0.5))
def test_cross_diffusive_surface_B_zero_at_tstar(dbe, deb):
    p = default_params().replace(D_BE=dbe * 1e-9, D_EB=deb * 1e-9)
    try:
        c = derive_laplace_coefficients(p)
        ts = compute_tstar(p, c)
    except ValueError:
        return  # ill-posed, degenerate or non-depleting sets are rejected
    bs, _ = surface_concentrations(p, c, ts, ts)
    assert abs(bs) < 1e-9 * p.C_B_inf


# -- correlations ------------------------------------------------------------------


def test_correlation_values():
    tp = correlation_tp(10.0, 100.0, 1e3, 1.5e-9, 1e-9)
    assert tp == pytest.approx(13.6 * 1.018**0.786 * 1.5**-3.44, rel=1e-14)
    assert not tp.extrapolated
    assert correlation_hp(0.4e-9, 1e-9, 1.5e-9) == pytest.approx(7.72e-5 * 1.4**-0.18 * 1.5**0.781, rel=1e-14)
    assert correlation_surface_A(10.0, 100.0, 1e3, 2.0, 4.0) == pytest.approx(1.371**0.802 * 0.5**0.408, rel=1e-14)
    assert correlation_product_decay(0.4e-9, 1.6e-9, 2.0, 4.0) == pytest.approx(
        math.exp(-(0.25**0.45) * 0.5**0.652), rel=1e-14)
    assert correlation_liquid_mtc(3e-4, 1e3, 10.0, 100.0) == pytest.approx(
        3e-4 * (2.451 * 100.0 * 1.371**-0.802 - 100.0), rel=1e-14)


def test_correlation_extrapolation_flag():
    assert correlation_tp(10.0, 100.0, 2e3, 1e-9, 1e-9).extrapolated
    assert correlation_hp(0.0, 1e-8, 1e-9).extrapolated
    assert "extrapolated" in repr(correlation_tp(10.0, 100.0, 2e3, 1e-9, 1e-9))


def test_correlation_range_errors():
    with pytest.raises(CorrelationRangeError):
        correlation_surface_A(30.0, 100.0, 1e3, 1.0, 1.0)
    with pytest.raises(CorrelationRangeError):
        correlation_liquid_mtc(3e-4, 1e3, 10.0, 300.0)
    with pytest.raises(ValueError):
        correlation_tp(10.0, 100.0, 0.0, 1e-9, 1e-9)
    with pytest.raises(ValueError):
        correlation_product_decay(-1.0, 1e-9, 1.0, 1.0)


# -- reaction-plane phase ----------------------------------------------------------


@pytest.fixture(scope="module")
def short_run(base):
    p, c, ts = base
    return solve_moving_plane(p, c, t_end=3 * ts, n_zone1=100, n_zone2=400, snapshot_times=(2 * ts,))


def test_plane_run_frozen(short_run):
    s = short_run
    assert s.t_p == pytest.approx(2.1744343221291604, rel=1e-6)
    assert s.velocity.max() == pytest.approx(7.959358491190085e-06, rel=1e-6)


def test_plane_moves_forward_and_conserves(short_run):
    s = short_run
    assert s.times[0] == pytest.approx(s.t_star)
    assert np.all(np.diff(s.trajectory) > 0)
    assert np.max(s.stoichiometry_residual[0]) < 1e-6
    assert np.max(s.stoichiometry_residual[1]) < 1e-6
    assert max(np.max(a) for a in s.accounting_error) < 5e-3
    assert s.summary_rows().shape == (s.times.size, 6)


def test_plane_start_values(short_run, base):
    p, c, _ = base
    s = short_run
    assert s.C_ES_star == pytest.approx(max_product_surface_conc(p, c), rel=1e-12)
    assert np.all(s.surface_A[1:] > 0) and s.surface_B[-1] == 0.0
    assert len(s.snapshots) == 1


def test_plane_argument_errors(base):
    p, c, ts = base
    with pytest.raises(ValueError):
        solve_moving_plane(p, c, t_end=ts)
    with pytest.raises(ValueError):
        solve_moving_plane(p, c, t_end=2 * ts, n_zone1=2)
