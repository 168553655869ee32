"""Beam steering: progressive phases, transmitter/receiver co-alignment,
pixel enumeration and a measurement-driven phase optimiser."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .farfield import TWO_PI, PhaseMap
from .geometry import ArrayGeometry


@dataclass(frozen=True)
class SteerTarget:
    """Beam direction as direction cosines (u, v)."""

    u0: float
    v0: float

    def __post_init__(self):
        if self.u0 ** 2 + self.v0 ** 2 > 1.0 + 1e-12:
            raise ValueError(f"target ({self.u0}, {self.v0}) is outside visible space")

    @classmethod
    def from_degrees(cls, theta_x: float, theta_y: float) -> "SteerTarget":
        return cls(math.sin(math.radians(theta_x)), math.sin(math.radians(theta_y)))

    @property
    def theta(self) -> tuple[float, float]:
        return (math.degrees(math.asin(self.u0)), math.degrees(math.asin(self.v0)))


@dataclass(frozen=True)
class OptimizerConfig:
    max_sweeps: int = 10
    phase_steps: int = 16
    noise_sigma: float = 0.0
    seed: int = 0
    memory: float = 0.0

    def __post_init__(self):
        if self.max_sweeps < 1 or self.phase_steps < 1:
            raise ValueError("max_sweeps and phase_steps must be >= 1")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        if not 0.0 <= self.memory < 1.0:
            raise ValueError("memory must lie in [0, 1)")


def steering_phases(geometry: ArrayGeometry, target: SteerTarget) -> PhaseMap:
    """Progressive phase ``-2pi(x u0 + y v0)`` that points the beam at ``target``."""
    return PhaseMap(-TWO_PI * (geometry.x * target.u0 + geometry.y * target.v0))


def co_align(tx: ArrayGeometry, rx: ArrayGeometry, pixel: SteerTarget) -> tuple[PhaseMap, PhaseMap]:
    """Point transmitter and receiver at the same pixel."""
    return steering_phases(tx, pixel), steering_phases(rx, pixel)


def pixel_grid(fov_x: float, fov_y: float, beamwidth: float,
               center: tuple[float, float] = (0.0, 0.0)) -> list[SteerTarget]:
    """Beamwidth-spaced angular lattice covering the field of view.

    ``center`` (degrees) is normally the element-pattern peak. Targets are
    ordered row by row (theta_y outer, theta_x inner).
    """
    if not (fov_x > 0 and fov_y > 0 and beamwidth > 0):
        raise ValueError("field of view and beamwidth must be positive")
    nx = math.floor(fov_x / beamwidth + 1e-9)
    ny = math.floor(fov_y / beamwidth + 1e-9)
    xs = center[0] + (np.arange(nx) - (nx - 1) / 2.0) * beamwidth
    ys = center[1] + (np.arange(ny) - (ny - 1) / 2.0) * beamwidth
    return [SteerTarget.from_degrees(float(tx), float(ty)) for ty in ys for tx in xs]


def optimize_phases(geometry: ArrayGeometry, target: SteerTarget,
                    config: OptimizerConfig = OptimizerConfig()) -> tuple[PhaseMap, np.ndarray]:
    """Coordinate ascent on the detected power in the target direction.

    Starts from seeded random phases and sweeps the elements in row-major
    order. At each element the power in the target direction is "measured"
    (array-factor power times ``1 + noise_sigma * N(0, 1)``) with the
    element set to each of ``phase_steps`` evenly spaced phases.

    Detected power is a sinusoid in any single element's phase, so for
    three or more steps the readings are reduced to that sinusoid's first
    Fourier harmonic and the best of {current phase, trial phases} under
    the fitted curve is kept (the current phase is read too but only
    used by the fallback). With ``memory > 0`` the harmonic estimate of
    an element is averaged with its estimates from earlier sweeps
    (geometric weights), which is what makes noisy measurements usable.
    Noise-free with ``memory = 0`` the fit is exact, so the objective never
    decreases. One or two steps fall back to picking the best raw reading.

    Returns the final phase map and the noise-free on-target power
    ``|AF|^2`` before the first sweep and after every sweep.
    """
    rng = np.random.default_rng(config.seed)
    n_el = len(geometry)
    steer = np.exp(1j * TWO_PI * (geometry.x * target.u0 + geometry.y * target.v0))
    phases = rng.uniform(0.0, TWO_PI, n_el)
    k = config.phase_steps
    levels = TWO_PI * np.arange(k) / k
    trial_phasors = np.exp(1j * levels)
    fit = k >= 3
    mean_acc = np.zeros(n_el)
    harm_acc = np.zeros(n_el, dtype=complex)
    weight = np.zeros(n_el)
    total = np.sum(steer * np.exp(1j * phases))
    history = [abs(total) ** 2]
    for _ in range(config.max_sweeps):
        for n in range(n_el):
            rest = total - steer[n] * np.exp(1j * phases[n])
            candidates = np.concatenate(([phases[n]], levels))
            readings = np.abs(rest + steer[n] * np.exp(1j * candidates)) ** 2
            if config.noise_sigma > 0:
                readings = readings * (1.0 + config.noise_sigma * rng.standard_normal(k + 1))
            if fit:
                trials = readings[1:]
                weight[n] = config.memory * weight[n] + 1.0
                mean_acc[n] = config.memory * mean_acc[n] + trials.mean()
                harm_acc[n] = config.memory * harm_acc[n] + 2.0 * np.mean(trials * trial_phasors)
                offset, harmonic = mean_acc[n] / weight[n], harm_acc[n] / weight[n]
                scores = offset + np.real(harmonic * np.exp(-1j * candidates))
            else:
                scores = readings
            new_phase = candidates[int(np.argmax(scores))]
            if new_phase != phases[n]:
                phases[n] = new_phase
                # recompute rather than update to avoid drift in the running sum
                total = np.sum(steer * np.exp(1j * phases))
        history.append(abs(total) ** 2)
    return PhaseMap(phases), np.array(history)
