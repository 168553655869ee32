"""Beam-quality metrics: lobe census, 3 dB beamwidth, side-lobe level,
resolvable spots and the side-lobe level versus array-multiplier sweep."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import ndimage

from .element import ISOTROPIC, ElementPattern
from .farfield import DirectionGrid, PowerPattern, aperture_pattern, transceiver_pattern
from .geometry import CoprimeSpec, make_coprime_pair, make_uniform_grid

HALF_POWER_DB = 10.0 * math.log10(0.5)
#: Returned by :func:`side_lobe_level` when nothing outside the main lobe rises above the floor.
NO_SIDE_LOBES = -math.inf
DEFAULT_LOBE_FLOOR = -100.0


class UnresolvedLobeError(ValueError):
    """The half-power contour of a lobe runs off the sampled region."""


@dataclass(frozen=True)
class Lobe:
    u: float
    v: float
    power_db: float

    @property
    def theta(self) -> tuple[float, float]:
        return (math.degrees(math.asin(self.u)), math.degrees(math.asin(self.v)))


@dataclass
class BeamMetrics:
    peak: tuple[float, float]            # theta_x, theta_y in degrees
    beamwidth_x: float | None
    beamwidth_y: float | None
    sll: float | None
    lobes: list[Lobe] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)


def find_lobes(pattern: PowerPattern, floor: float = DEFAULT_LOBE_FLOOR) -> list[Lobe]:
    """Local maxima of a pattern above ``floor`` dB.

    A maximum is a sample no lower than any of its eight neighbours. Flat
    tops (connected runs of such samples) count once, represented by the
    member closest to their centroid. Sorted by descending power, ties
    by ascending u then v.
    """
    if not floor < 0:
        raise ValueError("floor must be negative")
    grid = pattern.grid
    db = np.where(grid.visible, pattern.values_db, -np.inf)
    local_max = ndimage.maximum_filter(db, size=3, mode="constant", cval=-np.inf)
    cand = (db >= local_max) & grid.visible & (db > floor)
    labels, count = ndimage.label(cand, structure=np.ones((3, 3), dtype=int))
    if count == 0:
        return []
    iv, iu = np.nonzero(labels)
    lab = labels[iv, iu] - 1
    u, v = grid.u[iu], grid.v[iv]
    size = np.bincount(lab, minlength=count)
    cu = np.bincount(lab, u, count) / size
    cv = np.bincount(lab, v, count) / size
    dist = (u - cu[lab]) ** 2 + (v - cv[lab]) ** 2
    # pick the member nearest each centroid: sort by (label, distance), take first per label
    order = np.lexsort((dist, lab))
    first = order[np.r_[0, np.flatnonzero(np.diff(lab[order])) + 1]]
    reps = sorted(zip(-db[iv[first], iu[first]], u[first], v[first]))
    return [Lobe(float(pu), float(pv), float(-neg)) for neg, pu, pv in reps]


def _crossing(coords, db, start, step, level):
    i = start
    while True:
        j = i + step
        if j < 0 or j >= db.size or not np.isfinite(db[j]):
            raise UnresolvedLobeError("unresolved lobe: half-power point lies outside the grid")
        if db[j] <= level:
            # linear interpolation in dB between samples i and j
            t = (db[i] - level) / (db[i] - db[j])
            return coords[i] + t * (coords[j] - coords[i])
        i = j


def half_power_crossings(pattern: PowerPattern, peak: tuple[float, float], axis: str) -> tuple[float, float]:
    """Direction-cosine positions of the two half-power points around ``peak``."""
    grid = pattern.grid
    iv, iu = grid.nearest(*peak)
    db = np.where(grid.visible, pattern.values_db, -np.inf)
    if axis == "u":
        coords, line, start = grid.u, db[iv, :], iu
    elif axis == "v":
        coords, line, start = grid.v, db[:, iu], iv
    else:
        raise ValueError(f"axis must be 'u' or 'v', got {axis!r}")
    level = line[start] + HALF_POWER_DB
    return _crossing(coords, line, start, -1, level), _crossing(coords, line, start, +1, level)


def beamwidth_3db(pattern: PowerPattern, peak: tuple[float, float], axis: str) -> float:
    """Full width at half maximum through ``peak`` (u, v) along ``axis``, degrees."""
    lo, hi = half_power_crossings(pattern, peak, axis)
    return math.degrees(math.asin(min(hi, 1.0)) - math.asin(max(lo, -1.0)))


def side_lobe_level(pattern: PowerPattern, peak: tuple[float, float],
                    floor: float = DEFAULT_LOBE_FLOOR) -> float:
    """Highest lobe outside the main lobe, relative to the main lobe (dB).

    The main lobe is taken as the ellipse around ``peak`` whose semi-axes
    equal the full 3 dB width along u and v, i.e. a zone twice the 3 dB
    width. Returns :data:`NO_SIDE_LOBES` if no other lobe exceeds ``floor``.
    """
    grid = pattern.grid
    iv, iu = grid.nearest(*peak)
    u0, v0 = grid.u[iu], grid.v[iv]
    ulo, uhi = half_power_crossings(pattern, peak, "u")
    vlo, vhi = half_power_crossings(pattern, peak, "v")
    wu, wv = uhi - ulo, vhi - vlo
    main_db = pattern.values_db[iv, iu]
    outside = [lobe for lobe in find_lobes(pattern, floor)
               if ((lobe.u - u0) / wu) ** 2 + ((lobe.v - v0) / wv) ** 2 > 1.0]
    if not outside:
        return NO_SIDE_LOBES
    return max(lobe.power_db for lobe in outside) - float(main_db)


def peak_direction(pattern: PowerPattern) -> tuple[float, float]:
    """(u, v) of the global maximum over visible points."""
    db = np.where(pattern.grid.visible, pattern.values_db, -np.inf)
    iv, iu = np.unravel_index(np.argmax(db), db.shape)
    return float(pattern.grid.u[iu]), float(pattern.grid.v[iv])


def beam_metrics(pattern: PowerPattern, peak: tuple[float, float] | None = None,
                 max_lobes: int = 10) -> BeamMetrics:
    """Collect the standard metrics; failures are recorded, not raised."""
    if peak is None:
        peak = peak_direction(pattern)
    errors = []
    widths = {}
    for axis in ("u", "v"):
        try:
            widths[axis] = beamwidth_3db(pattern, peak, axis)
        except UnresolvedLobeError as exc:
            widths[axis] = None
            errors.append(f"beamwidth_{'x' if axis == 'u' else 'y'}: {exc}")
    try:
        sll = side_lobe_level(pattern, peak)
    except UnresolvedLobeError as exc:
        sll = None
        errors.append(f"sll: {exc}")
    theta = (math.degrees(math.asin(peak[0])), math.degrees(math.asin(peak[1])))
    return BeamMetrics(theta, widths["u"], widths["v"], sll,
                       find_lobes(pattern)[:max_lobes], errors)


def resolvable_spots(fov_x: float, fov_y: float, beamwidth: float) -> int:
    """Number of beamwidth-sized pixels that fit in the field of view."""
    if not (fov_x > 0 and fov_y > 0 and beamwidth > 0):
        raise ValueError("field of view and beamwidth must be positive")
    # tolerance keeps exact ratios like 1.2 / 0.4 from flooring to 2
    return math.floor(fov_x / beamwidth + 1e-9) * math.floor(fov_y / beamwidth + 1e-9)


@dataclass(frozen=True)
class SweepRow:
    k: Fraction
    sll_coprime_db: float
    sll_tx_db: float
    sll_halfwave_db: float


def sll_vs_k(spec: CoprimeSpec, k_values, steer: tuple[float, float] = (0.0, 0.0),
             grid: DirectionGrid | None = None, element: ElementPattern = ISOTROPIC) -> list[SweepRow]:
    """Side-lobe level of the co-prime transceiver for several multipliers.

    For each ``k`` (used as both k1 and k2) three patterns are compared at
    the steering direction ``steer`` = (u, v):

    * the co-prime transceiver product,
    * a uniform transmitter alone with ``P*Q*k`` elements per axis at the
      base pitch ``dx`` (same aperture as the co-prime pair),
    * the transceiver built from two copies of that uniform array.

    With ``dx = 0.5`` the uniform arrays are the half-wavelength references.
    """
    from .steering import SteerTarget, steering_phases

    grid = grid or DirectionGrid.uniform(2048)
    target = SteerTarget(*steer)
    rows = []
    for k in k_values:
        ks = spec.with_k(k)
        tx, rx = make_coprime_pair(ks, element)
        tx_p = aperture_pattern(tx, steering_phases(tx, target), grid)
        rx_p = aperture_pattern(rx, steering_phases(rx, target), grid)
        cop = transceiver_pattern(tx_p, rx_p)
        n_ref = spec.P * spec.Q * ks.k1
        if n_ref.denominator != 1:
            raise ValueError(f"k={k} gives a non-integer reference aperture")
        ref = make_uniform_grid(int(n_ref), int(n_ref), spec.dx, element=element,
                                min_spacing=min(spec.dx, 0.5))
        ref_p = aperture_pattern(ref, steering_phases(ref, target), grid)
        two_way = transceiver_pattern(ref_p, ref_p)
        rows.append(SweepRow(
            ks.k1,
            side_lobe_level(cop, peak_direction(cop)),
            side_lobe_level(ref_p, peak_direction(ref_p)),
            side_lobe_level(two_way, peak_direction(two_way)),
        ))
    return rows
