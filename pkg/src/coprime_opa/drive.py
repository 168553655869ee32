"""Row-column PAM drive of an n x n thermo-optic phase-shifter grid.

Columns are served one after the other; during column ``c``'s slot each
row driver delivers the power for shifter ``(r, c)``. A shifter is thus on
for 1/n of the cycle at n times its average power, and its first-order
thermal response smooths the pulses into a nearly constant phase.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .farfield import TWO_PI

#: Minimum cycle-rate / thermal-bandwidth ratio for the averaging to hold.
MIN_AVERAGING_RATIO = 10.0


class AveragingWarning(UserWarning):
    """Column cycling is too slow compared with the thermal bandwidth."""


@dataclass(frozen=True)
class ThermalParams:
    p_two_pi_mw: float = 21.2
    f_3db_khz: float = 19.0
    cycle_rate_mhz: float = 4.0
    crosstalk: float = 0.0

    def __post_init__(self):
        if not (self.p_two_pi_mw > 0 and self.f_3db_khz > 0 and self.cycle_rate_mhz > 0):
            raise ValueError("thermal parameters must be positive")
        if not 0.0 <= self.crosstalk < 0.25:
            raise ValueError("crosstalk must lie in [0, 0.25)")
        ratio = self.cycle_rate_mhz * 1e6 / (self.f_3db_khz * 1e3)
        if ratio < MIN_AVERAGING_RATIO:
            warnings.warn(
                f"cycle rate {self.cycle_rate_mhz} MHz is only {ratio:.3g}x the thermal "
                f"bandwidth {self.f_3db_khz} kHz; pulses will not average out",
                AveragingWarning, stacklevel=3)

    @property
    def tau(self) -> float:
        """Thermal time constant in seconds."""
        return 1.0 / (TWO_PI * self.f_3db_khz * 1e3)

    @property
    def cycle_period(self) -> float:
        return 1.0 / (self.cycle_rate_mhz * 1e6)

    def settle_cycles(self, n_tau: float = 8.0) -> int:
        """Cycles spanning ``n_tau`` thermal time constants."""
        return max(1, math.ceil(n_tau * self.tau / self.cycle_period))


@dataclass(frozen=True, eq=False)
class DriveSchedule:
    """Per-slot PAM amplitudes (mW): ``amplitudes[r][c]`` is applied to row
    ``r`` during column ``c``'s slot. ``dummy_power[c]`` is what the shared
    compensation heater receives in that slot."""

    n: int
    slot_duration: float
    amplitudes: np.ndarray
    dummy_power: np.ndarray

    def average_power(self) -> np.ndarray:
        """Cycle-averaged electrical power of every shifter."""
        return self.amplitudes / self.n

    def slot_totals(self) -> np.ndarray:
        """Power delivered in each slot, shifters plus dummy heater."""
        return self.amplitudes.sum(axis=0) + self.dummy_power


def driver_count(n: int) -> int:
    """Row plus column drivers, plus one for the dummy heaters."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return 2 * n + 1


def schedule_from_turns(turns, params: ThermalParams) -> DriveSchedule:
    """Build a schedule from phases given as fractions of a full turn.

    Works on any numeric element type, including ``fractions.Fraction``
    in an object array, so the power bookkeeping can be checked exactly.
    """
    turns = np.asarray(turns)
    if turns.ndim != 2 or turns.shape[0] != turns.shape[1]:
        raise ValueError(f"expected a square phase grid, got shape {turns.shape}")
    if np.any(turns < 0) or np.any(turns >= 1):
        raise ValueError("phases must lie in [0, 2*pi)")
    n = turns.shape[0]
    amplitudes = turns * params.p_two_pi_mw * n
    totals = amplitudes.sum(axis=0)
    dummy = totals.max() - totals
    return DriveSchedule(n, params.cycle_period / n, amplitudes, dummy)


def schedule_from_phases(phases, params: ThermalParams) -> DriveSchedule:
    """Schedule for an n x n phase grid in radians, each in [0, 2pi)."""
    phases = np.asarray(phases, dtype=float)
    if np.any(phases < 0) or np.any(phases >= TWO_PI):
        raise ValueError("phases must lie in [0, 2*pi)")
    return schedule_from_turns(phases / TWO_PI, params)


@dataclass(frozen=True, eq=False)
class ShifterTrace:
    """Sampled phase of every shifter: ``phase[t, r, c]`` at ``time[t]``."""

    time: np.ndarray
    phase: np.ndarray
    target: np.ndarray
    samples_per_cycle: int
    cycle_period: float

    @property
    def cycles(self) -> int:
        return (self.time.size - 1) // self.samples_per_cycle


def _neighbour_sum(a: np.ndarray) -> np.ndarray:
    out = np.zeros_like(a)
    out[1:, :] += a[:-1, :]
    out[:-1, :] += a[1:, :]
    out[:, 1:] += a[:, :-1]
    out[:, :-1] += a[:, 1:]
    return out


def simulate_thermal(schedule: DriveSchedule, params: ThermalParams, cycles: int,
                     samples_per_slot: int = 4) -> ShifterTrace:
    """First-order thermal response to a schedule, from a cold start.

    Inputs are piecewise constant, so each sub-step is advanced exactly:
    ``P <- P_in + (P - P_in) * exp(-dt / tau)``. Phase is
    ``2pi * P / p_two_pi``. With ``params.crosstalk = c`` every shifter also
    sees ``c`` times the input of its four nearest neighbours.
    """
    if cycles < 1:
        raise ValueError("cycles must be >= 1")
    if samples_per_slot < 1:
        raise ValueError("samples_per_slot must be >= 1")
    n = schedule.n
    amps = np.asarray(schedule.amplitudes, dtype=float)
    dt = schedule.slot_duration / samples_per_slot
    decay = math.exp(-dt / params.tau)
    slot_inputs = []
    for c in range(n):
        p_in = np.zeros((n, n))
        p_in[:, c] = amps[:, c]
        if params.crosstalk:
            p_in = p_in + params.crosstalk * _neighbour_sum(p_in)
        slot_inputs.append(p_in)

    spc = n * samples_per_slot
    out = np.empty((cycles * spc + 1, n, n))
    state = np.zeros((n, n))
    out[0] = state
    k = 1
    for _ in range(cycles):
        for c in range(n):
            p_in = slot_inputs[c]
            for _ in range(samples_per_slot):
                state = p_in + (state - p_in) * decay
                out[k] = state
                k += 1
    time = np.arange(out.shape[0]) * dt
    scale = TWO_PI / params.p_two_pi_mw
    target = amps / n * scale
    return ShifterTrace(time, out * scale, target, spc, params.cycle_period)


@dataclass(frozen=True, eq=False)
class RippleStats:
    mean_error: np.ndarray       # cycle-averaged phase minus target, radians
    peak_to_peak: np.ndarray     # radians

    def relative_error(self, target: np.ndarray) -> np.ndarray:
        """``|mean_error| / target``, zero where the target is zero."""
        with np.errstate(divide="ignore", invalid="ignore"):
            rel = np.abs(self.mean_error) / target
        return np.where(target > 0, rel, np.abs(self.mean_error))


def phase_ripple(trace: ShifterTrace, settle_cycles: int) -> RippleStats:
    """Mean error and peak-to-peak ripple over the last full cycle.

    The first ``settle_cycles`` cycles are treated as start-up transient;
    the trace must contain at least one more cycle.
    """
    if trace.cycles <= settle_cycles:
        raise ValueError(f"trace has {trace.cycles} cycles, need more than {settle_cycles}")
    spc = trace.samples_per_cycle
    last = trace.phase[-(spc + 1):]
    t = trace.time[-(spc + 1):]
    mean = trapezoid(last, t, axis=0) / (t[-1] - t[0])
    return RippleStats(mean - trace.target, last.max(axis=0) - last.min(axis=0))
