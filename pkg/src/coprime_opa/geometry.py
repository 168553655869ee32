"""Aperture layouts: uniform grids, co-prime transmitter/receiver pairs and
a simple routing-limited pitch model for planar photonic arrays.

All positions are in units of the wavelength.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.spatial.distance import pdist

from .element import ISOTROPIC, ElementPattern

DEFAULT_MIN_SPACING = 0.5
_SPACING_TOL = 1e-9


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(value).limit_denominator(10**6)
    return Fraction(value)


def validate_coprime(P: int, Q: int) -> bool:
    """True iff ``P`` and ``Q`` share no common factor."""
    if int(P) != P or int(Q) != Q or P < 1 or Q < 1:
        raise ValueError(f"co-prime integers must be positive, got ({P}, {Q})")
    return math.gcd(int(P), int(Q)) == 1


@dataclass(frozen=True)
class CoprimeSpec:
    """Design tuple of a co-prime transceiver.

    The transmitter pitch is ``P*dx`` with ``k1*Q`` elements per axis, the
    receiver pitch is ``Q*dx`` with ``k2*P`` elements per axis. ``dx`` is in
    wavelengths, ``wavelength`` in micrometres. The multipliers are kept as
    exact fractions so that e.g. ``k2 = 8/3`` yields exactly 8 elements.
    """

    P: int
    Q: int
    dx: float = 0.5
    k1: Fraction = Fraction(1)
    k2: Fraction = Fraction(1)
    wavelength: float = 1.55

    def __post_init__(self):
        object.__setattr__(self, "k1", _as_fraction(self.k1))
        object.__setattr__(self, "k2", _as_fraction(self.k2))
        if not validate_coprime(self.P, self.Q):
            raise ValueError(f"P={self.P} and Q={self.Q} are not co-prime")
        if not self.dx > 0:
            raise ValueError("dx must be positive")
        if not self.wavelength > 0:
            raise ValueError("wavelength must be positive")
        for name, k, m in (("k1", self.k1, self.Q), ("k2", self.k2, self.P)):
            count = k * m
            if k <= 0 or count.denominator != 1:
                raise ValueError(f"{name}={k} does not give a positive integer element count ({count})")

    @property
    def tx_pitch(self) -> float:
        return self.P * self.dx

    @property
    def rx_pitch(self) -> float:
        return self.Q * self.dx

    @property
    def n_tx(self) -> int:
        """Transmitter elements per axis."""
        return int(self.k1 * self.Q)

    @property
    def n_rx(self) -> int:
        """Receiver elements per axis."""
        return int(self.k2 * self.P)

    def with_k(self, k1, k2=None) -> "CoprimeSpec":
        return CoprimeSpec(self.P, self.Q, self.dx, k1, k1 if k2 is None else k2, self.wavelength)


@dataclass(frozen=True, eq=False)
class ArrayGeometry:
    """Element positions of one aperture.

    ``positions`` is an (N, 2) array of (x, y) in wavelengths. Grids are
    stored row-major (y outer, x inner) and ``shape`` records ``(ny, nx)``
    so phase maps can be laid out as rows and columns.
    """

    positions: np.ndarray
    role: str = "transmitter"
    element: ElementPattern = ISOTROPIC
    shape: tuple[int, int] | None = None
    min_spacing: float = DEFAULT_MIN_SPACING
    pitch: float | None = field(default=None)

    def __post_init__(self):
        pos = np.array(self.positions, dtype=float).reshape(-1, 2)
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        if self.role not in ("transmitter", "receiver"):
            raise ValueError(f"role must be transmitter or receiver, got {self.role!r}")
        if len(pos) == 0:
            raise ValueError("geometry has no elements")
        if self.shape is not None and self.shape[0] * self.shape[1] != len(pos):
            raise ValueError("shape does not match element count")
        if len(pos) > 1:
            closest = pdist(pos).min()
            if closest < self.min_spacing - _SPACING_TOL:
                raise ValueError(
                    f"elements {closest:.4g} wavelengths apart, minimum is {self.min_spacing}"
                )

    def __len__(self):
        return len(self.positions)

    @property
    def x(self) -> np.ndarray:
        return self.positions[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.positions[:, 1]

    @property
    def extent(self) -> tuple[float, float]:
        """Span (max - min) of the positions along x and y."""
        return tuple(float(v) for v in np.ptp(self.positions, axis=0))

    def with_element(self, element: ElementPattern) -> "ArrayGeometry":
        return ArrayGeometry(self.positions, self.role, element, self.shape, self.min_spacing, self.pitch)


def make_uniform_grid(nx: int, ny: int, pitch: float, role: str = "transmitter",
                      element: ElementPattern = ISOTROPIC,
                      min_spacing: float = DEFAULT_MIN_SPACING) -> ArrayGeometry:
    """Rectangular ``nx`` x ``ny`` lattice centred at the origin."""
    if nx < 1 or ny < 1 or int(nx) != nx or int(ny) != ny:
        raise ValueError(f"grid dimensions must be positive integers, got {nx}x{ny}")
    if not pitch > 0:
        raise ValueError("pitch must be positive")
    xs = (np.arange(nx) - (nx - 1) / 2.0) * pitch
    ys = (np.arange(ny) - (ny - 1) / 2.0) * pitch
    gx, gy = np.meshgrid(xs, ys)
    pos = np.column_stack([gx.ravel(), gy.ravel()])
    return ArrayGeometry(pos, role, element, (int(ny), int(nx)), min_spacing, float(pitch))


def make_coprime_pair(spec: CoprimeSpec, element: ElementPattern = ISOTROPIC,
                      min_spacing: float = DEFAULT_MIN_SPACING) -> tuple[ArrayGeometry, ArrayGeometry]:
    tx = make_uniform_grid(spec.n_tx, spec.n_tx, spec.tx_pitch, "transmitter", element, min_spacing)
    rx = make_uniform_grid(spec.n_rx, spec.n_rx, spec.rx_pitch, "receiver", element, min_spacing)
    return tx, rx


def grating_lobe_spacing(pitch: float) -> float | None:
    """Angular spacing of grating lobes in degrees for a pitch in wavelengths.

    Returns ``None`` when the pitch is below one wavelength, i.e. when no
    grating lobe enters visible space.
    """
    if not pitch > 0:
        raise ValueError("pitch must be positive")
    if pitch < 1.0:
        return None
    return math.degrees(math.asin(1.0 / pitch))


@dataclass(frozen=True)
class RoutingModel:
    """Planar routing constants, micrometres."""

    element_size: float = 2.0
    waveguide_pitch: float = 1.0
    layers: int = 1

    def __post_init__(self):
        if not (self.element_size > 0 and self.waveguide_pitch > 0):
            raise ValueError("element size and waveguide pitch must be positive")
        if int(self.layers) != self.layers or self.layers < 1:
            raise ValueError("layers must be an integer >= 1")


def routing_limited_pitch(n_per_axis: int, model: RoutingModel = RoutingModel()) -> float:
    """Smallest element pitch (um) that leaves room to feed an n x n grid.

    The gap between neighbouring elements carries ``ceil(n / layers)``
    pass-through waveguides. With at least as many layers as elements per
    axis every feed stacks under its element and no gap is needed.
    """
    if n_per_axis < 1:
        raise ValueError("n_per_axis must be >= 1")
    if n_per_axis <= model.layers:
        return model.element_size
    waveguides = math.ceil(n_per_axis / model.layers)
    return waveguides * model.waveguide_pitch + model.element_size


def routing_limited_fov(n_per_axis: int, wavelength_um: float,
                        model: RoutingModel = RoutingModel()) -> float:
    """Grating-lobe-limited field of view (degrees) of a routing-limited grid."""
    spacing = grating_lobe_spacing(routing_limited_pitch(n_per_axis, model) / wavelength_um)
    return 180.0 if spacing is None else spacing
