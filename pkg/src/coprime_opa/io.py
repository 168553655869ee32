"""Plain-text and CSV import/export.

Floats are written with ``repr`` so files round-trip exactly and repeated
runs produce byte-identical output.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .drive import DriveSchedule, ShifterTrace
from .element import ISOTROPIC, ElementPattern
from .farfield import PhaseMap, PowerPattern
from .geometry import DEFAULT_MIN_SPACING, ArrayGeometry


class TableParseError(ValueError):
    def __init__(self, path, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.path = str(path)
        self.line = line


def _rows(path):
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            text = raw.split("#", 1)[0].strip()
            if text:
                yield lineno, [f for f in text.replace(",", " ").split() if f]


def write_geometry(path, geometry: ArrayGeometry) -> None:
    """One ``x y`` pair per line, wavelengths."""
    with open(path, "w") as fh:
        fh.write("# x_wavelengths y_wavelengths\n")
        for x, y in geometry.positions:
            fh.write(f"{float(x)!r} {float(y)!r}\n")


def read_geometry(path, role: str = "transmitter", element: ElementPattern = ISOTROPIC,
                  min_spacing: float = DEFAULT_MIN_SPACING) -> ArrayGeometry:
    pts = []
    for lineno, fields in _rows(path):
        if len(fields) != 2:
            raise TableParseError(path, lineno, f"expected 2 columns, got {len(fields)}")
        try:
            pts.append((float(fields[0]), float(fields[1])))
        except ValueError as exc:
            raise TableParseError(path, lineno, str(exc)) from None
    return ArrayGeometry(np.array(pts), role, element, min_spacing=min_spacing)


def write_phase_map(path, phases: PhaseMap, shape: tuple[int, int]) -> None:
    grid = phases.as_grid(shape)
    with open(path, "w") as fh:
        fh.write("# row col phase_rad\n")
        for r in range(shape[0]):
            for c in range(shape[1]):
                fh.write(f"{r} {c} {float(grid[r, c])!r}\n")


def read_phase_map(path, shape: tuple[int, int]) -> np.ndarray:
    """Read a ``row col phase_rad`` table into a (rows, cols) matrix.

    Every cell must appear exactly once; errors carry the line number.
    """
    out = np.full(shape, np.nan)
    for lineno, fields in _rows(path):
        if len(fields) != 3:
            raise TableParseError(path, lineno, f"expected 3 columns (row col phase_rad), got {len(fields)}")
        try:
            r, c, phi = int(fields[0]), int(fields[1]), float(fields[2])
        except ValueError as exc:
            raise TableParseError(path, lineno, str(exc)) from None
        if not (0 <= r < shape[0] and 0 <= c < shape[1]):
            raise TableParseError(path, lineno, f"cell ({r}, {c}) outside {shape[0]}x{shape[1]} grid")
        if not np.isnan(out[r, c]):
            raise TableParseError(path, lineno, f"cell ({r}, {c}) given twice")
        if not np.isfinite(phi):
            raise TableParseError(path, lineno, "phase is not finite")
        out[r, c] = phi
    if np.isnan(out).any():
        r, c = np.argwhere(np.isnan(out))[0]
        raise TableParseError(path, 0, f"cell ({r}, {c}) missing")
    return out


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])


def write_pattern_csv(path, pattern: PowerPattern) -> None:
    """Visible samples as ``u, v, power_db``."""
    grid = pattern.grid
    iv, iu = np.nonzero(grid.visible)
    with open(path, "w") as fh:
        fh.write("u,v,power_db\n")
        body = np.column_stack([grid.u[iu], grid.v[iv], pattern.values_db[iv, iu]])
        np.savetxt(fh, body, delimiter=",", fmt="%.12g")


def write_cross_section_csv(path, theta, db) -> None:
    write_csv(path, ["theta_deg", "power_db"], zip(theta, db))


def write_history_csv(path, history) -> None:
    db = 10.0 * np.log10(np.maximum(np.asarray(history, dtype=float), 1e-300))
    write_csv(path, ["sweep", "objective_db"], enumerate(db))


def write_schedule_csv(path, schedule: DriveSchedule) -> None:
    rows = [(c, r, float(schedule.amplitudes[r, c]))
            for c in range(schedule.n) for r in range(schedule.n)]
    rows += [(c, "dummy", float(schedule.dummy_power[c])) for c in range(schedule.n)]
    write_csv(path, ["slot", "row", "amplitude_mw"], rows)


def write_trace_csv(path, trace: ShifterTrace, stride: int = 1) -> None:
    n = trace.phase.shape[1]
    rr, cc = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    idx = np.arange(0, trace.time.size, stride)
    with open(path, "w") as fh:
        fh.write("time_s,shifter_row,shifter_col,phase_rad\n")
        for t in idx:
            block = np.column_stack([np.full(n * n, trace.time[t]), rr.ravel(), cc.ravel(),
                                     trace.phase[t].ravel()])
            np.savetxt(fh, block, delimiter=",", fmt=["%.12g", "%d", "%d", "%.12g"])


def ensure_dir(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p
