import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import dirichlet_power, naive_array_factor

from coprime_opa.element import ISOTROPIC, element_power
from coprime_opa.farfield import (DB_FLOOR, DirectionGrid, PhaseMap, PowerPattern, aperture_pattern,
                                  array_factor, cross_section, power_pattern, transceiver_pattern)
from coprime_opa.geometry import ArrayGeometry, CoprimeSpec, make_coprime_pair, make_uniform_grid
from coprime_opa.steering import SteerTarget, steering_phases

GRID = DirectionGrid.uniform(121)          # contains u = 0, +-1/6, +-2/3, +-1/2 exactly


def test_grid_validation():
    with pytest.raises(ValueError):
        DirectionGrid([0.0], [0.0, 1.0])
    with pytest.raises(ValueError):
        DirectionGrid([0.0, 0.0, 1.0], [0.0, 1.0])
    with pytest.raises(ValueError):
        DirectionGrid([-1.5, 0.0], [0.0, 1.0])
    g = DirectionGrid.uniform(5)
    assert g.visible[2, 2] and not g.visible[0, 0]


def test_phase_map_reduced():
    pm = PhaseMap([-1e-18, 2 * np.pi, 7.0, -np.pi])
    assert np.all(pm.phases >= 0) and np.all(pm.phases < 2 * np.pi)
    np.testing.assert_allclose(pm.phases, [0.0, 0.0, 7.0 - 2 * np.pi, np.pi])


def test_matches_naive_oracle():
    rng = np.random.default_rng(1)
    geom = ArrayGeometry(rng.uniform(-5, 5, (12, 2)), min_spacing=0.0)
    phases = PhaseMap(rng.uniform(0, 2 * np.pi, 12))
    grid = DirectionGrid(np.linspace(-1, 1, 37), np.linspace(-0.9, 1, 29))
    af = array_factor(geom, phases, grid).values
    ref = naive_array_factor(geom.positions, phases.phases, grid.u, grid.v)
    np.testing.assert_allclose(af, ref, atol=1e-10)


def test_single_element_constant():
    af = array_factor(make_uniform_grid(1, 1, 1.0), PhaseMap.zeros(1), GRID).values
    np.testing.assert_allclose(np.abs(af[GRID.visible]), 1.0)
    assert np.all(af[~GRID.visible] == 0)


def test_coherent_sum_at_broadside():
    g = make_uniform_grid(8, 8, 6.0)
    af = array_factor(g, PhaseMap.zeros(64), GRID)
    iv, iu = GRID.nearest(0, 0)
    assert abs(af.values[iv, iu]) == pytest.approx(64.0)


def test_four_element_line_grating_lobes():
    line = ArrayGeometry([[x, 0.0] for x in (-2.25, -0.75, 0.75, 2.25)])
    grid = DirectionGrid(np.linspace(-1, 1, 301), np.array([-0.5, 0.0, 0.5]))
    mag = np.abs(array_factor(line, PhaseMap.zeros(4), grid).values[1])
    ref = np.sqrt(dirichlet_power(4, 1.5, grid.u)) * 4
    np.testing.assert_allclose(mag, ref, atol=1e-9)
    for u0 in (0.0, 2 / 3, -2 / 3):
        assert mag[np.abs(grid.u - u0).argmin()] == pytest.approx(4.0, abs=1e-9)


def test_length_mismatch():
    with pytest.raises(ValueError):
        array_factor(make_uniform_grid(2, 2, 1.0), PhaseMap.zeros(3), GRID)


def test_power_pattern_isotropic_is_normalised_af():
    g = make_uniform_grid(3, 2, 0.7)
    pm = PhaseMap(np.linspace(0, 3, 6))
    field = array_factor(g, pm, GRID)
    p = power_pattern(field, ISOTROPIC)
    lin = np.abs(field.values) ** 2
    np.testing.assert_allclose(p.linear[GRID.visible], (lin / lin.max())[GRID.visible], atol=1e-12)
    assert p.values_db[GRID.visible].max() == 0.0


def test_power_pattern_single_element_is_element(paper_element):
    grid = DirectionGrid.uniform(201)
    p = power_pattern(array_factor(make_uniform_grid(1, 1, 1.0), PhaseMap.zeros(1), grid), paper_element)
    tx, ty = grid.angles()
    ref = element_power(paper_element, np.nan_to_num(tx), np.nan_to_num(ty))
    vis = grid.visible
    np.testing.assert_allclose(p.linear[vis], (ref / ref[vis].max())[vis], rtol=1e-9, atol=1e-25)


def test_zero_field_rejected():
    g = ArrayGeometry([[0.0, 0.0], [0.5, 0.0]])
    grid = DirectionGrid(np.array([-1.0, 1.0]), np.array([-0.1, 0.1]))   # both samples at AF nulls
    with pytest.raises(ValueError, match="zero"):
        power_pattern(array_factor(g, PhaseMap.zeros(2), grid), ISOTROPIC)


def test_implementation_tx_grating_lobes_full_height():
    g = make_uniform_grid(8, 8, 6.0)
    p = aperture_pattern(g, PhaseMap.zeros(64), GRID)
    for u0 in (1 / 6, -1 / 6):
        iv, iu = GRID.nearest(u0, 0.0)
        assert p.values_db[iv, iu] == pytest.approx(0.0, abs=1e-9)


def test_transceiver_uniform_inputs():
    flat = PowerPattern(GRID, np.zeros(GRID.shape))
    out = transceiver_pattern(flat, flat)
    np.testing.assert_allclose(out.values_db[GRID.visible], 0.0)


def test_transceiver_grid_mismatch():
    a = PowerPattern(GRID, np.zeros(GRID.shape))
    b = PowerPattern(DirectionGrid.uniform(11), np.zeros((11, 11)))
    with pytest.raises(ValueError, match="different grids"):
        transceiver_pattern(a, b)


def _pair_patterns(grid, tx_target=SteerTarget(0, 0), rx_target=SteerTarget(0, 0)):
    tx, rx = make_coprime_pair(CoprimeSpec(3, 4, 0.5))
    return (aperture_pattern(tx, steering_phases(tx, tx_target), grid),
            aperture_pattern(rx, steering_phases(rx, rx_target), grid))


def test_halfwave_pair_transceiver_matches_closed_form():
    grid = DirectionGrid(np.linspace(-1, 1, 2401), np.array([-0.01, 0.0, 0.01]))
    t, r = _pair_patterns(grid)
    prod = transceiver_pattern(t, r)
    ref = dirichlet_power(4, 1.5, grid.u) * dirichlet_power(3, 2.0, grid.u)
    np.testing.assert_allclose(prod.linear[1], ref, atol=1e-12)
    # highest secondary lobe, frozen from the closed form: -7.2172 dB at |u| = 0.58457
    side = prod.values_db[1][np.abs(grid.u) > 0.3].max()
    assert side == pytest.approx(-7.2172, abs=0.01)
    # the grating-lobe directions of either aperture are nulls of the product
    for u0 in (0.5, 2 / 3, 1.0, -0.5, -2 / 3, -1.0):
        assert prod.values_db[1][np.abs(grid.u - u0).argmin()] < -100


def test_misaligned_steering_lowers_product_peak():
    grid = DirectionGrid.uniform(241)
    aligned = transceiver_pattern(*_pair_patterns(grid))
    off = transceiver_pattern(*_pair_patterns(grid, rx_target=SteerTarget(0.25, 0.0)))
    assert off.peak_linear < aligned.peak_linear * 0.75


def test_transceiver_commutes():
    t, r = _pair_patterns(DirectionGrid.uniform(61))
    np.testing.assert_array_equal(transceiver_pattern(t, r).values_db, transceiver_pattern(r, t).values_db)


def test_reflectivity_hook():
    t, r = _pair_patterns(DirectionGrid.uniform(61))
    np.testing.assert_allclose(transceiver_pattern(t, r, reflectivity=3.0).values_db,
                               transceiver_pattern(t, r).values_db)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.01, 100.0))
def test_linearity(c):
    g = make_uniform_grid(3, 3, 1.5)
    pm = PhaseMap(np.arange(9.0))
    base = array_factor(g, pm, GRID)
    scaled = array_factor(g, pm, GRID, amplitudes=np.full(9, c))
    np.testing.assert_allclose(scaled.values, c * base.values, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(power_pattern(scaled, ISOTROPIC).values_db[GRID.visible],
                               power_pattern(base, ISOTROPIC).values_db[GRID.visible], atol=1e-9)


@pytest.mark.parametrize("shift", [(10, 0), (0, -7), (13, 21)])
def test_shift_theorem(shift):
    grid = DirectionGrid.uniform(201)
    g = make_uniform_grid(4, 4, 1.5)
    su, sv = shift
    target = SteerTarget(grid.u[100 + su] - grid.u[100], grid.v[100 + sv] - grid.v[100])
    base = np.abs(array_factor(g, PhaseMap.zeros(16), grid).values)
    moved = np.abs(array_factor(g, steering_phases(g, target), grid).values)
    # moved[iv, iu] == base[iv - sv, iu - su] where both samples are visible
    a = moved[max(sv, 0):201 + min(sv, 0), max(su, 0):201 + min(su, 0)]
    b = base[max(-sv, 0):201 + min(-sv, 0), max(-su, 0):201 + min(-su, 0)]
    both = (a > 0) & (b > 0)
    np.testing.assert_allclose(a[both], b[both], atol=1e-9)


def test_cross_section_symmetric_and_sorted():
    p = aperture_pattern(make_uniform_grid(4, 4, 1.5), PhaseMap.zeros(16), DirectionGrid.uniform(201))
    theta, db = cross_section(p, "u", 0.0)
    assert np.all(np.diff(theta) > 0)
    np.testing.assert_allclose(db, db[::-1], atol=1e-9)
    np.testing.assert_allclose(theta, -theta[::-1], atol=1e-9)


def test_cross_section_tx_lobe_spacing():
    grid = DirectionGrid(np.linspace(-1, 1, 4001), np.linspace(-0.01, 0.01, 3))
    p = aperture_pattern(make_uniform_grid(8, 8, 6.0), PhaseMap.zeros(64), grid)
    theta, db = cross_section(p, "u", 0.0)
    peaks = theta[db > -0.05]
    # cluster neighbouring samples of the same lobe, then look at the spacing near broadside
    centres = [c.mean() for c in np.split(peaks, np.flatnonzero(np.diff(peaks) > 1.0) + 1)]
    near = [c for c in centres if abs(c) < 15]
    np.testing.assert_allclose(np.diff(near), 9.59, atol=0.15)


def test_cross_section_out_of_range():
    p = PowerPattern(GRID, np.zeros(GRID.shape))
    with pytest.raises(ValueError):
        cross_section(p, "v", 1.5)
    with pytest.raises(ValueError):
        cross_section(p, "w", 0.0)


def test_db_floor_outside_visible():
    p = aperture_pattern(make_uniform_grid(2, 2, 1.0), PhaseMap.zeros(4), GRID)
    assert np.all(p.values_db[~GRID.visible] == DB_FLOOR)
