"""Parametric far-field pattern of a single radiating element."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LN2 = np.log(2.0)


@dataclass(frozen=True)
class ElementPattern:
    """Separable Gaussian (in angle) or isotropic radiator.

    ``theta_x_3db`` and ``theta_y_3db`` are full 3 dB widths in degrees,
    ``tilt_y`` shifts the peak along theta_y. All three are ignored for
    ``kind="isotropic"``.
    """

    kind: str = "isotropic"
    theta_x_3db: float = 0.0
    theta_y_3db: float = 0.0
    tilt_y: float = 0.0

    def __post_init__(self):
        if self.kind not in ("isotropic", "gaussian"):
            raise ValueError(f"unknown element kind {self.kind!r}")
        if self.kind == "gaussian" and not (self.theta_x_3db > 0 and self.theta_y_3db > 0):
            raise ValueError("gaussian element needs positive 3 dB widths")

    @classmethod
    def gaussian(cls, theta_x_3db: float, theta_y_3db: float, tilt_y: float = 0.0) -> "ElementPattern":
        return cls("gaussian", float(theta_x_3db), float(theta_y_3db), float(tilt_y))

    @property
    def peak(self) -> tuple[float, float]:
        """Direction of maximum radiation, degrees."""
        return (0.0, self.tilt_y if self.kind == "gaussian" else 0.0)


ISOTROPIC = ElementPattern()


def element_power(pattern: ElementPattern, theta_x, theta_y):
    """Power pattern (peak 1) at angles given in degrees. Accepts arrays."""
    theta_x = np.asarray(theta_x, dtype=float)
    theta_y = np.asarray(theta_y, dtype=float)
    if np.any(np.abs(theta_x) > 90.0) or np.any(np.abs(theta_y) > 90.0):
        raise ValueError("element angles must lie within [-90, 90] degrees")
    if pattern.kind == "isotropic":
        return np.ones(np.broadcast(theta_x, theta_y).shape)
    ax = 2.0 * theta_x / pattern.theta_x_3db
    ay = 2.0 * (theta_y - pattern.tilt_y) / pattern.theta_y_3db
    return np.exp(-LN2 * (ax * ax + ay * ay))


def element_amplitude(pattern: ElementPattern, theta_x, theta_y):
    """Field amplitude in [0, 1]; the square root of :func:`element_power`."""
    return np.sqrt(element_power(pattern, theta_x, theta_y))
