import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reactorscale import micromixing as mm


def triangle(c):
    """Symmetric triangular density on [0, 2c] with mean c."""
    return mm.TabulatedRTD([0.0, c, 2 * c], [0.0, 1.0 / c, 0.0])


def triangle_tail_mp(c, lam, gamma):
    """int_0^inf exp(-gamma a) F(a + lam) da at 30 digits."""
    mpmath.mp.dps = 30
    c, lam, gamma = mpmath.mpf(c), mpmath.mpf(lam), mpmath.mpf(gamma)

    def F(s):
        if s < c:
            return s / c ** 2
        if s < 2 * c:
            return (2 * c - s) / c ** 2
        return mpmath.mpf(0)

    pts = [p - lam for p in (0, c, 2 * c) if p - lam > 0]
    return float(mpmath.quad(lambda a: mpmath.exp(-gamma * a) * F(a + lam), [0] + pts))


# -- RTDs ------------------------------------------------------------------------


def test_exponential_rtd_moments():
    r = mm.ExponentialRTD(2.0)
    assert r.mean() == 2.0
    assert r.survival(2.0) == pytest.approx(math.exp(-1.0))
    assert r.mean_residual_life(5.0) == pytest.approx(2.0)
    assert r.weighted_tail(1.0, 0.5) == pytest.approx(math.exp(-0.5) / (1 + 0.5 * 2.0))


def test_tabulated_rtd_moments():
    r = triangle(1.5)
    assert r.mean() == pytest.approx(1.5, rel=1e-14)
    assert r.survival(1.5) == pytest.approx(0.5, rel=1e-14)
    # mean residual life past the apex of a triangle: c / 3
    assert r.mean_residual_life(1.5) == pytest.approx(0.5, rel=1e-12)
    assert r.support_end == 3.0


@pytest.mark.parametrize("ages, values", [
    ([0.1, 1.0], [1.0, 1.0]),                  # does not start at 0
    ([0.0, 1.0, 0.5], [1.0, 1.0, 1.0]),        # not increasing
    ([0.0, 1.0, 2.0], [-0.1, 1.0, 0.1]),       # negative density
    ([0.0, 1.0], [1.0, 0.5]),                  # integral 0.75
])
def test_tabulated_rtd_validation(ages, values):
    with pytest.raises(ValueError):
        mm.TabulatedRTD(ages, values)


def test_make_rtd():
    assert isinstance(mm.make_rtd("exponential", 1.0), mm.ExponentialRTD)
    assert isinstance(mm.make_rtd([(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)]), mm.TabulatedRTD)
    with pytest.raises(ValueError):
        mm.make_rtd("exponential")
    with pytest.raises(ValueError):
        mm.make_rtd([1.0, 2.0, 3.0])


# -- transfer rate -----------------------------------------------------------------


@pytest.mark.parametrize("method", ["quadrature", "analytic"])
@pytest.mark.parametrize("lam", [0.0, 0.4, 1.5, 2.9, 3.5])
@pytest.mark.parametrize("gamma", [0.0, 0.3, 4.0])
def test_tabulated_rate_against_high_precision(method, lam, gamma):
    m = mm.MixingModel(2.0, 1.5, gamma, rtd=triangle(1.5))
    q = mm.segregation_transfer_rate(m, lam, 0.01, method=method)
    ref = 2.0 * 0.01 / 1.5 * triangle_tail_mp(1.5, lam, gamma)
    assert q == pytest.approx(ref, rel=1e-10, abs=1e-300)


@settings(max_examples=60, deadline=None)
@given(gamma=st.floats(0.0, 50.0), lam=st.floats(0.0, 30.0), t_bar=st.floats(0.1, 10.0))
def test_exponential_routes_agree(gamma, lam, t_bar):
    m = mm.MixingModel(1.0, t_bar, gamma)
    q = mm.segregation_transfer_rate(m, lam, 1e-3)
    a = mm.segregation_transfer_rate(m, lam, 1e-3, method="analytic")
    assert q == pytest.approx(a, rel=1e-8)


def test_rate_decreases_with_gamma_and_wait():
    m0, m1 = mm.MixingModel(1.0, 2.0, 0.1), mm.MixingModel(1.0, 2.0, 1.0)
    assert mm.segregation_transfer_rate(m1, 1.0, 0.1) < mm.segregation_transfer_rate(m0, 1.0, 0.1)
    assert mm.segregation_transfer_rate(m0, 2.0, 0.1) < mm.segregation_transfer_rate(m0, 1.0, 0.1)
    assert mm.segregation_transfer_rate(mm.MixingModel(1.0, 2.0, math.inf), 1.0, 0.1) == 0.0


def test_total_transfer_without_gamma_is_volume():
    # with gamma = 0 every element eventually transfers: sum over lambda gives V
    m = mm.MixingModel(3.0, 2.0, 0.0)
    lam = np.arange(0.0, 80.0, 0.01) + 0.005
    total = sum(mm.segregation_transfer_rate(m, x, 0.01, method="analytic") for x in lam)
    assert total == pytest.approx(3.0, rel=1e-4)


@pytest.mark.parametrize("kw", [dict(volume=0.0), dict(t_bar=-1.0), dict(gamma=-0.1), dict(crucial_age=-1.0)])
def test_model_validation(kw):
    args = dict(volume=1.0, t_bar=1.0)
    args.update(kw)
    with pytest.raises(ValueError):
        mm.MixingModel(**args)


def test_rate_argument_errors():
    m = mm.MixingModel(1.0, 1.0)
    with pytest.raises(ValueError):
        mm.segregation_transfer_rate(m, -1.0, 0.1)
    with pytest.raises(ValueError):
        mm.segregation_transfer_rate(m, 1.0, 0.0)
    with pytest.raises(ValueError):
        mm.segregation_transfer_rate(m, 1.0, 0.1, method="simpson")


def test_quadrature_error_carries_residual():
    err = mm.QuadratureError("no", 1e-3)
    assert err.residual == 1e-3 and isinstance(err, RuntimeError)


# -- cell sequences ------------------------------------------------------------------


@pytest.mark.parametrize("n", [1, 2, 3])
def test_mixed_cells_give_erlang(n):
    tau, dt = 1.0, 0.005
    cells = [mm.Cell("mixed", tau)] * n
    r = mm.cell_sequence_response(cells, [1.0 / dt], dt)
    t = r.times
    ref = t ** (n - 1) * np.exp(-t / tau) / (tau ** n * math.factorial(n - 1))
    sel = (t > 0.5) & (t < 8.0)
    np.testing.assert_allclose(r.response[sel], ref[sel], rtol=2e-3, atol=1e-4)
    assert r.integral() == pytest.approx(1.0, abs=1e-12)
    assert r.mean_time() == pytest.approx(n * tau, rel=1e-12)


def test_segregated_exponential_matches_mixed():
    dt = 0.01
    a = mm.cell_sequence_response([mm.Cell("segregated", 2.0)], [1.0 / dt], dt)
    b = mm.cell_sequence_response([mm.Cell("mixed", 2.0)], [1.0 / dt], dt)
    np.testing.assert_allclose(a.response, b.response, rtol=1e-12, atol=1e-15)


def test_tabulated_cell_preserves_moments():
    dt = 0.01
    r = mm.cell_sequence_response([mm.Cell("segregated", 1.5, rtd=triangle(1.5)), mm.Cell("mixed", 0.5)],
                                  [1.0 / dt], dt)
    assert r.integral() == pytest.approx(1.0, abs=1e-12)
    assert r.mean_time() == pytest.approx(2.0, rel=1e-12)


@pytest.mark.parametrize("age", [0.0, 0.5, 1.5, 2.5])
def test_crucial_age_preserves_moments(age):
    dt = 0.01
    cell = mm.Cell("segregated", 1.5, rtd=triangle(1.5), crucial_age=age)
    r = mm.cell_sequence_response([cell], [1.0 / dt], dt)
    assert r.integral() == pytest.approx(1.0, abs=1e-12)
    assert r.mean_time() == pytest.approx(1.5, rel=1e-10)


def test_crucial_age_past_support_is_ignored():
    cell = mm.Cell("segregated", 1.5, rtd=triangle(1.5), crucial_age=5.0)
    assert isinstance(cell.effective_rtd(), mm.TabulatedRTD)


def test_cell_response_rows():
    r = mm.cell_sequence_response([mm.Cell("mixed", 1.0)], [10.0], 0.1)
    assert r.rows().shape == (r.times.size, 2)


@pytest.mark.parametrize("args", [
    dict(kind="plug", t_bar=1.0), dict(kind="mixed", t_bar=0.0),
    dict(kind="segregated", t_bar=2.0, rtd=[(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)]),   # mean 1 != 2
])
def test_cell_validation(args):
    with pytest.raises(ValueError):
        mm.Cell(**args)


def test_sequence_argument_errors():
    with pytest.raises(ValueError):
        mm.cell_sequence_response([], [1.0], 0.1)
    with pytest.raises(ValueError):
        mm.cell_sequence_response([mm.Cell("mixed", 1.0)], [1.0], 0.0)
    with pytest.raises(ValueError):
        mm.cell_sequence_response([mm.Cell("mixed", 1.0)], [], 0.1)
