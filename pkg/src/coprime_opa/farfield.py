"""Far-field array patterns on a direction-cosine grid.

Patterns live on a (v, u) grid, ``u = sin(theta_x)`` and ``v = sin(theta_y)``;
arrays are indexed ``[iv, iu]``. Only points with ``u**2 + v**2 <= 1`` are
physical, everything outside the visible disk holds zero field.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .element import ElementPattern, element_power
from .geometry import ArrayGeometry

TWO_PI = 2.0 * np.pi
#: dB value stored where the linear power is zero (nulls, invisible space).
DB_FLOOR = -300.0


@dataclass(frozen=True, eq=False)
class DirectionGrid:
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        for name in ("u", "v"):
            a = np.array(getattr(self, name), dtype=float).ravel()
            if a.size < 2:
                raise ValueError(f"{name} needs at least 2 samples")
            if np.any(np.diff(a) <= 0):
                raise ValueError(f"{name} samples must be strictly increasing")
            if a[0] < -1.0 or a[-1] > 1.0:
                raise ValueError(f"{name} samples must lie in [-1, 1]")
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        uu, vv = np.meshgrid(self.u, self.v)
        visible = uu * uu + vv * vv <= 1.0
        visible.setflags(write=False)
        object.__setattr__(self, "visible", visible)

    @classmethod
    def uniform(cls, n: int, lo: float = -1.0, hi: float = 1.0, nv: int | None = None) -> "DirectionGrid":
        """``n`` x ``nv`` samples spanning [lo, hi] on both axes."""
        return cls(np.linspace(lo, hi, n), np.linspace(lo, hi, nv or n))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.v.size, self.u.size)

    @property
    def du(self) -> float:
        return float(np.diff(self.u).max())

    @property
    def dv(self) -> float:
        return float(np.diff(self.v).max())

    def same_as(self, other: "DirectionGrid") -> bool:
        return self is other or (np.array_equal(self.u, other.u) and np.array_equal(self.v, other.v))

    def nearest(self, u: float, v: float) -> tuple[int, int]:
        """Grid index ``(iv, iu)`` closest to a direction."""
        return int(np.abs(self.v - v).argmin()), int(np.abs(self.u - u).argmin())

    def angles(self) -> tuple[np.ndarray, np.ndarray]:
        """theta_x, theta_y in degrees for every grid point (NaN outside [-1, 1])."""
        uu, vv = np.meshgrid(self.u, self.v)
        return np.degrees(np.arcsin(uu)), np.degrees(np.arcsin(vv))


@dataclass(frozen=True, eq=False)
class PhaseMap:
    """Per-element phases (radians), ordered like the geometry's positions."""

    phases: np.ndarray

    def __post_init__(self):
        p = np.mod(np.array(self.phases, dtype=float).ravel(), TWO_PI)
        # mod of a tiny negative number rounds up to exactly 2*pi
        p[p >= TWO_PI] = 0.0
        p.setflags(write=False)
        object.__setattr__(self, "phases", p)

    def __len__(self):
        return self.phases.size

    @classmethod
    def zeros(cls, n: int) -> "PhaseMap":
        return cls(np.zeros(n))

    def as_grid(self, shape: tuple[int, int]) -> np.ndarray:
        """Phases as a (rows, cols) matrix in row-major element order."""
        return self.phases.reshape(shape)


@dataclass(frozen=True, eq=False)
class FieldPattern:
    grid: DirectionGrid
    values: np.ndarray


@dataclass(frozen=True, eq=False)
class PowerPattern:
    """Peak-normalised power in dB over a direction grid.

    ``peak_linear`` keeps the linear power that was mapped to 0 dB so that
    absolute comparisons between patterns remain possible.
    """

    grid: DirectionGrid
    values_db: np.ndarray
    peak_linear: float = 1.0

    @property
    def linear(self) -> np.ndarray:
        out = np.power(10.0, self.values_db / 10.0)
        out[~self.grid.visible] = 0.0
        return out


def array_factor(geometry: ArrayGeometry, phases: PhaseMap, grid: DirectionGrid,
                 amplitudes=None) -> FieldPattern:
    """Complex array factor ``sum_n a_n exp(i[2pi(x_n u + y_n v) + phi_n])``.

    The sum over elements is evaluated directly for every grid point. The
    per-element phasor factorises into an x part and a y part, so it is
    formed as one (nv, N) x (N, nu) product rather than N full-grid
    exponentials.
    """
    n = len(geometry)
    if len(phases) != n:
        raise ValueError(f"phase map has {len(phases)} entries for {n} elements")
    weights = np.exp(1j * phases.phases)
    if amplitudes is not None:
        amplitudes = np.asarray(amplitudes, dtype=complex).ravel()
        if amplitudes.size != n:
            raise ValueError("amplitude count does not match element count")
        weights = weights * amplitudes
    ex = np.exp(1j * TWO_PI * np.outer(geometry.x, grid.u))  # (N, nu)
    ey = np.exp(1j * TWO_PI * np.outer(grid.v, geometry.y))  # (nv, N)
    values = (ey * weights) @ ex
    values[~grid.visible] = 0.0
    return FieldPattern(grid, values)


def to_db(power: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        db = 10.0 * np.log10(power)
    return np.maximum(db, DB_FLOOR)


def _normalised(grid: DirectionGrid, power: np.ndarray) -> PowerPattern:
    power = np.where(grid.visible, power, 0.0)
    peak = float(power.max())
    if not peak > 0:
        raise ValueError("pattern is identically zero and cannot be normalised")
    return PowerPattern(grid, to_db(power / peak), peak)


def element_power_on_grid(element: ElementPattern, grid: DirectionGrid) -> np.ndarray:
    if element.kind == "isotropic":
        return np.ones(grid.shape)
    # separable: evaluate once per axis
    px = element_power(element, np.degrees(np.arcsin(grid.u)), 0.0 * grid.u + element.tilt_y)
    py = element_power(element, 0.0 * grid.v, np.degrees(np.arcsin(grid.v)))
    return np.outer(py, px)


def power_pattern(field: FieldPattern, element: ElementPattern) -> PowerPattern:
    """``|AF * element amplitude|^2`` in dB, 0 dB at the visible peak."""
    power = np.abs(field.values) ** 2 * element_power_on_grid(element, field.grid)
    return _normalised(field.grid, power)


def transceiver_pattern(tx: PowerPattern, rx: PowerPattern, reflectivity=None) -> PowerPattern:
    """Two-way pattern: product of transmit and receive power patterns.

    ``reflectivity`` is an optional per-point linear power map of the
    target; it defaults to 1 everywhere.
    """
    if not tx.grid.same_as(rx.grid):
        raise ValueError("transmitter and receiver patterns are on different grids")
    power = tx.linear * rx.linear
    if reflectivity is not None:
        power = power * np.broadcast_to(np.asarray(reflectivity, dtype=float), power.shape)
    out = _normalised(tx.grid, power)
    return PowerPattern(out.grid, out.values_db, out.peak_linear * tx.peak_linear * rx.peak_linear)


def aperture_pattern(geometry: ArrayGeometry, phases: PhaseMap, grid: DirectionGrid) -> PowerPattern:
    """Shortcut: array factor of ``geometry`` weighted by its own element."""
    return power_pattern(array_factor(geometry, phases, grid), geometry.element)


def cross_section(pattern: PowerPattern, axis: str, at: float) -> tuple[np.ndarray, np.ndarray]:
    """1D cut through a pattern.

    ``axis="u"`` returns the row nearest ``v = at`` as a function of
    theta_x; ``axis="v"`` the column nearest ``u = at`` versus theta_y.
    Only visible samples are returned, as ``(theta_deg, power_db)``.
    """
    grid = pattern.grid
    if axis == "u":
        other, coords = grid.v, grid.u
    elif axis == "v":
        other, coords = grid.u, grid.v
    else:
        raise ValueError(f"axis must be 'u' or 'v', got {axis!r}")
    if not other[0] <= at <= other[-1]:
        raise ValueError(f"slice position {at} outside grid range [{other[0]}, {other[-1]}]")
    idx = int(np.abs(other - at).argmin())
    if axis == "u":
        db, vis = pattern.values_db[idx, :], grid.visible[idx, :]
    else:
        db, vis = pattern.values_db[:, idx], grid.visible[:, idx]
    theta = np.degrees(np.arcsin(coords[vis]))
    return theta, db[vis].copy()
