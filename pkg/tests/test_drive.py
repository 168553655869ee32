import warnings
from fractions import Fraction

import numpy as np
import pytest

from coprime_opa.drive import (AveragingWarning, ThermalParams, driver_count, phase_ripple, schedule_from_phases,
                               schedule_from_turns, simulate_thermal)

TWO_PI = 2 * np.pi


@pytest.mark.parametrize("n, expected", [(1, 3), (8, 17), (100, 201)])
def test_driver_count(n, expected):
    assert driver_count(n) == expected


def test_driver_count_rejects_zero():
    with pytest.raises(ValueError):
        driver_count(0)


def test_schedule_zero_phases():
    s = schedule_from_phases(np.zeros((8, 8)), ThermalParams())
    assert np.all(s.amplitudes == 0) and np.all(s.dummy_power == 0)


def test_schedule_amplitude_examples():
    params = ThermalParams()
    phases = np.zeros((8, 8))
    phases[0, 0] = np.pi
    phases[1, 2] = np.nextafter(TWO_PI, 0)
    s = schedule_from_phases(phases, params)
    assert s.amplitudes[0, 0] == pytest.approx(8 * 10.6)
    assert s.amplitudes[1, 2] == pytest.approx(8 * 21.2)
    assert s.average_power()[0, 0] == pytest.approx(10.6)
    assert s.slot_duration == pytest.approx(1 / 4e6 / 8)


def test_schedule_rejects_bad_phases():
    with pytest.raises(ValueError):
        schedule_from_phases(np.full((2, 2), TWO_PI), ThermalParams())
    with pytest.raises(ValueError):
        schedule_from_phases(np.zeros((2, 3)), ThermalParams())


def test_fraction_bookkeeping_exact():
    rng = np.random.default_rng(0)
    turns = np.array([[Fraction(int(x), 97) for x in row] for row in rng.integers(0, 97, (6, 6))], dtype=object)
    params = ThermalParams(p_two_pi_mw=Fraction(53, 2))
    s = schedule_from_turns(turns, params)
    n = 6
    # slot amplitude times the 1/n duty cycle equals the continuous-drive power
    assert np.all(s.amplitudes / n == turns * params.p_two_pi_mw)
    totals = s.slot_totals()
    assert all(t == totals[0] for t in totals)
    assert all(isinstance(t, Fraction) for t in totals)


def test_zero_schedule_zero_trace():
    params = ThermalParams()
    tr = simulate_thermal(schedule_from_phases(np.zeros((4, 4)), params), params, cycles=3)
    assert np.all(tr.phase == 0)


def test_constant_drive_settles():
    params = ThermalParams()
    s = schedule_from_phases(np.array([[np.pi]]), params)       # n = 1: always on
    cycles = int(np.ceil(5 * params.tau / params.cycle_period)) + 1
    tr = simulate_thermal(s, params, cycles)
    assert tr.time[-1] >= 5 * params.tau
    assert tr.phase[-1, 0, 0] == pytest.approx(np.pi, rel=0.01)
    assert np.all(np.diff(tr.phase[:, 0, 0]) >= 0)


def _ripple(phases, params):
    s = schedule_from_phases(phases, params)
    settle = params.settle_cycles()
    tr = simulate_thermal(s, params, settle + 1)
    return phase_ripple(tr, settle), tr


def test_ripple_small_at_4mhz():
    rng = np.random.default_rng(2)
    phases = rng.uniform(0.5, TWO_PI - 0.5, (8, 8))
    stats, tr = _ripple(phases, ThermalParams())
    assert np.max(stats.relative_error(tr.target)) < 0.01
    assert np.max(stats.peak_to_peak) / TWO_PI < 0.05


def test_ripple_scales_inversely_with_rate():
    phases = np.full((8, 8), np.pi)
    fast, _ = _ripple(phases, ThermalParams(cycle_rate_mhz=4.0))
    slow, _ = _ripple(phases, ThermalParams(cycle_rate_mhz=2.0))
    ratio = np.max(slow.peak_to_peak) / np.max(fast.peak_to_peak)
    assert ratio == pytest.approx(2.0, rel=0.05)


def test_error_and_ripple_shrink_with_rate():
    # a linear first-order response has a periodic steady state whose cycle mean equals
    # the input mean, so after 40 tau the mean error is at rounding level for every rate
    phases = np.full((4, 4), np.pi)
    ripple = []
    for rate in (1.0, 2.0, 4.0, 8.0):
        params = ThermalParams(cycle_rate_mhz=rate)
        cycles = int(round(40 * params.tau / params.cycle_period))
        tr = simulate_thermal(schedule_from_phases(phases, params), params, cycles)
        stats = phase_ripple(tr, cycles - 1)
        assert np.max(np.abs(stats.mean_error)) < 1e-12
        ripple.append(np.max(stats.peak_to_peak))
    assert all(a > b for a, b in zip(ripple, ripple[1:]))


def test_crosstalk_raises_neighbour_phase():
    phases = np.zeros((3, 3))
    phases[1, 1] = np.pi
    params = ThermalParams(crosstalk=0.05)
    tr = simulate_thermal(schedule_from_phases(phases, params), params, params.settle_cycles())
    assert tr.phase[-1, 0, 1] > 0 and tr.phase[-1, 0, 0] == 0


def test_slow_cycle_warns():
    with pytest.warns(AveragingWarning):
        ThermalParams(cycle_rate_mhz=0.04)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        ThermalParams()


def test_ripple_needs_settled_cycles():
    params = ThermalParams()
    tr = simulate_thermal(schedule_from_phases(np.zeros((2, 2)), params), params, 3)
    with pytest.raises(ValueError):
        phase_ripple(tr, 3)
    with pytest.raises(ValueError):
        simulate_thermal(schedule_from_phases(np.zeros((2, 2)), params), params, 0)
