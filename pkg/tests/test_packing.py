import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reactorscale import packing as pk


def exact_cell_distribution(geometry, start_node, levels):
    """Deterministic probability evolution of the two-point staggered walk."""
    N, m = geometry.lateral_cells, geometry.substeps
    size = 2 * N + 1
    P = np.zeros((size, size))
    for u in range(size):
        if geometry.wall_rule == "drain" and u in (0, size - 1):
            P[u, u] = 1.0
        elif u == 0:
            P[1, 0] = 1.0
        elif u == size - 1:
            P[size - 2, u] = 1.0
        else:
            P[u - 1, u] = P[u + 1, u] = 0.5
    step = np.linalg.matrix_power(P, m)
    p = np.zeros(size)
    p[start_node] = 1.0
    out = []
    for _ in range(levels + 1):
        cells = p[1::2].copy()
        b = p[0::2]
        cells += 0.5 * (b[:-1] + b[1:])
        cells[0] += 0.5 * b[0]
        cells[-1] += 0.5 * b[-1]
        out.append(cells)
        p = step @ p
    return np.array(out)


@pytest.fixture(scope="module")
def column():
    return pk.PackingGeometry(1.0, 0.05, 0.1, 30)


# -- geometry ------------------------------------------------------------------------


def test_default_lattice_calibration(column):
    assert column.lateral_cells == 40
    assert column.substeps == 16
    assert column.lattice_radius == pytest.approx(column.unit_radius, rel=1e-12)
    assert column.centers[0] == pytest.approx(-0.5 + 0.0125)
    assert column.depths[-1] == pytest.approx(3.0)


def test_three_point_kernel_calibration():
    g = pk.PackingGeometry(1.0, 0.05, 0.1, 5, fan_out=3)
    assert g.lattice_radius == pytest.approx(0.05, rel=0.05)


@pytest.mark.parametrize("kw", [dict(column_diameter=0.05), dict(layer_height=0.0), dict(levels=0),
                                dict(wall_rule="stick"), dict(fan_out=4), dict(lateral_cells=2)])
def test_geometry_validation(kw):
    args = dict(column_diameter=1.0, unit_radius=0.05, layer_height=0.1, levels=5)
    args.update(kw)
    with pytest.raises(ValueError):
        pk.PackingGeometry(**args)


def test_layout_validation(column):
    with pytest.raises(ValueError):
        pk.IrrigationLayout(())
    with pytest.raises(ValueError):
        pk.IrrigationLayout(((0.0, -1.0),))
    with pytest.raises(ValueError):
        pk.IrrigationLayout(((0.7, 1.0),)).validate(column)
    with pytest.raises(ValueError):
        pk.IrrigationLayout(((0.0, 1.0), (0.2, 1.0)), n=4.0).validate(column)
    lay = pk.IrrigationLayout.equally_spaced(column, 4, 2.0)
    lay.validate(column)
    np.testing.assert_allclose(lay.positions, [-0.375, -0.125, 0.125, 0.375])
    assert lay.total_flow == pytest.approx(2.0)
    assert len(pk.IrrigationLayout.every_cell(column).sources) == 40


# -- Monte Carlo ---------------------------------------------------------------------


@pytest.mark.parametrize("rule", ["reflect", "drain"])
def test_walk_matches_exact_probabilities(column, rule):
    g = column.replace(wall_rule=rule)
    W = 200_000
    f = pk.random_walk_simulate(g, pk.IrrigationLayout(((0.3, 1.0),)), W, 7)
    start = int(round((0.3 + 0.5) / (0.5 * g.cell_width)))
    ref = exact_cell_distribution(g, start, g.levels)
    z = (f.counts - W * ref) / np.sqrt(np.maximum(W * ref, 1.0))
    assert np.max(np.abs(z)) < 5.5


def test_counts_and_flow_conserved(column):
    f = pk.random_walk_simulate(column, pk.IrrigationLayout(((0.0, 2e-3), (0.25, 1e-3))), 30_000, 1)
    assert np.all(f.counts.sum(axis=1) == 30_000)
    np.testing.assert_allclose(f.level_flow(), 3e-3, rtol=1e-12)
    assert f.mean_intensity() == pytest.approx(3e-3)


def test_seed_determinism_across_workers(column):
    lay = pk.IrrigationLayout(((0.0, 1.0),))
    a = pk.random_walk_simulate(column, lay, 40_000, 5)
    b = pk.random_walk_simulate(column, lay, 40_000, 5, workers=4)
    c = pk.random_walk_simulate(column, lay, 40_000, 6)
    assert np.array_equal(a.intensity, b.intensity)
    assert not np.array_equal(a.intensity, c.intensity)


def test_walker_and_seed_requirements(column):
    lay = pk.IrrigationLayout(((0.0, 1.0),))
    with pytest.raises(ValueError):
        pk.random_walk_simulate(column, lay, 100, 1)
    with pytest.raises(ValueError):
        pk.random_walk_simulate(column, lay, 20_000, None)


def test_drain_walls_collect_liquid(column):
    f = pk.random_walk_simulate(column.replace(wall_rule="drain", levels=200), pk.IrrigationLayout(((0.0, 1.0),)),
                                20_000, 2)
    last = f.intensity[-1]
    assert np.argmax(last) in (0, last.size - 1)


def test_three_point_kernel_conserves(column):
    g = column.replace(fan_out=3, lateral_cells=None)
    f = pk.random_walk_simulate(g, pk.IrrigationLayout(((0.0, 1.0),)), 20_000, 4)
    assert np.all(f.counts.sum(axis=1) == 20_000)


def test_rows_and_fields(column):
    f = pk.random_walk_simulate(column, pk.IrrigationLayout(((0.0, 1.0),)), 20_000, 4)
    rows = f.rows()
    assert rows.shape == ((column.levels + 1) * column.lateral_cells, 4)
    assert f.level_field(3).units == "m^3/(m^2 s)"


# -- statistics ----------------------------------------------------------------------


def test_unevenness_of_dry_and_uniform_levels(column):
    f = pk.random_walk_simulate(column, pk.IrrigationLayout(((0.0, 1.0),)), 20_000, 4)
    u0 = pk.unevenness_coefficient(f, 0)
    assert u0.dry and math.isinf(u0.k_u)
    uni = pk.random_walk_simulate(column, pk.IrrigationLayout.every_cell(column), 400_000, 4)
    assert pk.unevenness_coefficient(uni, 0).k_u == pytest.approx(1.0, abs=0.05)
    with pytest.raises(ValueError):
        pk.unevenness_coefficient(f, 99)


def test_spreading_zone_height(column):
    g = column.replace(levels=200)
    sz = pk.spreading_zone_height(g, pk.IrrigationLayout(((0.0, 1.0),)), walkers=400_000, seed=3)
    assert sz.reached and sz.k_u <= 1.15
    assert np.all(sz.profile[: sz.level] > 1.15)
    short = pk.spreading_zone_height(column.replace(levels=3), pk.IrrigationLayout(((0.0, 1.0),)),
                                     walkers=20_000, seed=3)
    assert not short.reached and math.isnan(short.height)
    with pytest.raises(ValueError):
        pk.spreading_zone_height(column, pk.IrrigationLayout(((0.0, 1.0),)), k_u_target=0.9)


def test_more_sources_spread_faster(column):
    g = column.replace(levels=200)
    one = pk.spreading_zone_height(g, pk.IrrigationLayout.equally_spaced(g, 1), walkers=200_000, seed=1)
    two = pk.spreading_zone_height(g, pk.IrrigationLayout.equally_spaced(g, 2), walkers=200_000, seed=1)
    assert two.level < one.level


def test_stabilized_radius_near_characteristic():
    g = pk.PackingGeometry(2.0, 0.05, 0.1, 320)
    f = pk.random_walk_simulate(g, pk.IrrigationLayout(((0.0, 1.0),)), 1_000_000, 20240611)
    sr = pk.stabilized_radius_empirical(f)
    assert sr.stabilized and not sr.degenerate
    assert sr.radius == pytest.approx(0.4795, abs=0.01)  # frozen
    assert abs(sr.radius / pk.characteristic_radius(2.0, 0.05) - 1) < 0.1


def test_stabilized_radius_degenerate_for_uniform_feed(column):
    uni = pk.random_walk_simulate(column.replace(lateral_cells=10), pk.IrrigationLayout.every_cell(
        column.replace(lateral_cells=10)), 20_000, 1)
    sr = pk.stabilized_radius_empirical(uni)
    assert not sr.stabilized


# -- closed forms ----------------------------------------------------------------------


def test_analytic_matches_image_superposition(column):
    lay = pk.IrrigationLayout(((0.0, 1.0),))
    x = column.centers
    sup = pk.superpose_sources(lay, column, 1.0, x[x >= 0])
    ana = pk.analytic_intensity(x[x >= 0], 1.0, 1.0, 0.1, 0.05, 1.0)
    np.testing.assert_allclose(sup, ana, rtol=1e-14)


@settings(max_examples=50, deadline=None)
@given(z=st.floats(0.05, 20.0), r=st.floats(0.0, 0.5))
def test_analytic_intensity_formula(z, r):
    I, h, a, D = 2e-3, 0.1, 0.05, 1.0
    c = h / (2 * a * a * z)
    ref = I * 2 * h / (math.pi * z) * sum(math.exp(-c * d * d) for d in (r, D - r, D + r))
    assert pk.analytic_intensity(r, z, I, h, a, D) == pytest.approx(ref, rel=1e-13)


def test_analytic_intensity_errors():
    with pytest.raises(ValueError):
        pk.analytic_intensity(0.1, 0.0, 1.0, 0.1, 0.05, 1.0)
    with pytest.raises(ValueError):
        pk.analytic_intensity(0.6, 1.0, 1.0, 0.1, 0.05, 1.0)


def test_fitted_closed_forms():
    assert pk.spreading_zone_approx(1.0, 0.05, 1) == pytest.approx(400 / 6.4)
    assert pk.spreading_zone_approx(1.0, 0.05, math.inf) == 0.0
    assert pk.characteristic_radius(2.0, 0.05) == pytest.approx(math.sqrt(0.05 * math.log(160 / math.pi)))
    R = pk.characteristic_radius(2.0, 0.05)
    assert pk.mean_intensity(1.0, 0.1, 10.0, 0.05, R) == pytest.approx(
        math.sqrt(0.02) * math.exp(-0.1 * R * R / (2 * 0.0025 * 10.0)))
    assert pk.mean_intensity(1.0, 0.1, math.inf, 0.05, R) == 0.0
    with pytest.raises(ValueError):
        pk.characteristic_radius(0.03, 0.05)
    with pytest.raises(ValueError):
        pk.spreading_zone_approx(1.0, 0.05, -1)


def test_l1_discrepancy_normalises():
    assert pk.l1_discrepancy([1, 2, 3], [2, 4, 6]) == 0.0
    assert pk.l1_discrepancy([1, 0], [0, 1]) == 2.0
