"""Command-line experiments: ``design``, ``pattern``, ``sweep-k``,
``drive-sim`` and ``scan``.

Every command reads an optional YAML config (defaults reproduce the
fabricated transceiver), writes plot-ready CSV files into ``--out`` and
prints a key-value report on stdout. Failures exit non-zero with a single
``error: {...}`` JSON line on stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

import numpy as np
import yaml

from . import io
from .config import ConfigError, ExperimentConfig, dump_config, load_config
from .drive import (ThermalParams, driver_count, phase_ripple, schedule_from_phases,
                    simulate_thermal)
from .farfield import (TWO_PI, DirectionGrid, PhaseMap, aperture_pattern, cross_section,
                       transceiver_pattern)
from .geometry import grating_lobe_spacing, make_coprime_pair
from .metrics import (NO_SIDE_LOBES, UnresolvedLobeError, beam_metrics, peak_direction,
                      resolvable_spots, side_lobe_level, sll_vs_k)
from .steering import SteerTarget, co_align, optimize_phases, pixel_grid, steering_phases


def _apertures(config: ExperimentConfig):
    return make_coprime_pair(config.coprime, config.element, config.min_spacing)


def _num(x):
    """Plain Python scalar for YAML output."""
    if isinstance(x, Fraction):
        return int(x) if x.denominator == 1 else str(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else ("-inf" if x < 0 else "inf")
    if isinstance(x, np.integer):
        return int(x)
    return x


def complexity_for_pixels(pixels: int) -> dict:
    """Front-end size of a co-prime transceiver resolving ``pixels`` spots.

    Each aperture needs about sqrt(pixels) elements, laid out as a square
    grid; the row-column drive needs one driver per row and per column.
    """
    if pixels < 1:
        raise ValueError("pixels must be >= 1")
    per_aperture = math.isqrt(pixels - 1) + 1 if pixels > 1 else 1
    per_axis = math.isqrt(per_aperture - 1) + 1 if per_aperture > 1 else 1
    return {
        "target_pixels": pixels,
        "elements_per_axis": per_axis,
        "radiators": 2 * per_axis ** 2,
        "phase_shifters": 2 * per_axis ** 2,
        "drivers": 2 * 2 * per_axis,
        "drivers_with_dummy": 2 * driver_count(per_axis),
        "uniform_halfwave_radiators": pixels,
    }


def cmd_design(config: ExperimentConfig, pixels: int | None = None) -> dict:
    spec = config.coprime
    lam = spec.wavelength
    report = {"coprime": {"P": spec.P, "Q": spec.Q, "dx_wavelengths": spec.dx,
                          "k1": _num(spec.k1), "k2": _num(spec.k2), "wavelength_um": lam}}
    total = 0
    drivers = 0
    for key, n, pitch in (("transmitter", spec.n_tx, spec.tx_pitch),
                          ("receiver", spec.n_rx, spec.rx_pitch)):
        gl = grating_lobe_spacing(pitch)
        report[key] = {
            "elements_per_axis": n,
            "elements": n * n,
            "pitch_wavelengths": pitch,
            "pitch_um": pitch * lam,
            "aperture_wavelengths": (n - 1) * pitch,
            "grating_lobe_spacing_deg": _num(gl) if gl is not None else "none",
            "drivers": driver_count(n),
        }
        total += n * n
        drivers += driver_count(n)
    base_gl = grating_lobe_spacing(spec.dx)
    equiv = max(spec.n_tx * spec.P, spec.n_rx * spec.Q)
    halfwave = round(equiv * spec.dx / 0.5)
    report["transceiver"] = {
        "radiators": total,
        "phase_shifters": total,
        "drivers": drivers,
        "usable_fov_deg": _num(base_gl) if base_gl is not None else 180.0,
        "equivalent_uniform_elements_per_axis": equiv,
        "equivalent_uniform_elements": equiv ** 2,
        "halfwave_equivalent_elements_per_axis": halfwave,
        "halfwave_equivalent_elements": halfwave ** 2,
        "radiator_reduction_vs_equivalent": equiv ** 2 / total,
        "driver_reduction_vs_equivalent": equiv ** 2 / drivers,
    }
    if config.element.kind == "gaussian":
        report["element"] = {"fov_x_deg": config.element.theta_x_3db,
                             "fov_y_deg": config.element.theta_y_3db,
                             "peak_theta_y_deg": config.element.tilt_y}
    if pixels is not None:
        report["pixel_target"] = complexity_for_pixels(pixels)
    return report


def _metrics_report(pattern, label) -> dict:
    m = beam_metrics(pattern)
    return {
        "pattern": label,
        "peak_theta_x_deg": m.peak[0],
        "peak_theta_y_deg": m.peak[1],
        "beamwidth_x_deg": _num(m.beamwidth_x) if m.beamwidth_x is not None else "unresolved",
        "beamwidth_y_deg": _num(m.beamwidth_y) if m.beamwidth_y is not None else "unresolved",
        "sll_db": _num(m.sll) if m.sll is not None else "unresolved",
        "lobes": [{"theta_x_deg": lobe.theta[0], "theta_y_deg": lobe.theta[1],
                   "power_db": lobe.power_db} for lobe in m.lobes],
        "errors": m.errors,
    }


def cmd_pattern(config: ExperimentConfig, aperture: str = "transceiver",
                target: tuple[float, float] | None = None, out=None,
                optimize: bool = False, write_2d: bool = True) -> dict:
    """Pattern of one aperture or of the transceiver, steered at ``target`` (degrees)."""
    if aperture not in ("tx", "rx", "transceiver"):
        raise ValueError(f"aperture must be tx, rx or transceiver, got {aperture!r}")
    out = io.ensure_dir(out or config.output_dir)
    target = target or config.targets[0]
    pixel = SteerTarget.from_degrees(*target)
    grid = DirectionGrid.uniform(config.grid)
    tx, rx = _apertures(config)
    patterns = {}
    for name, geom in (("tx", tx), ("rx", rx)):
        if aperture not in (name, "transceiver"):
            continue
        if optimize:
            phases, history = optimize_phases(geom, pixel, config.optimizer)
            io.write_history_csv(out / f"history_{name}.csv", history)
        else:
            phases = steering_phases(geom, pixel)
        io.write_phase_map(out / f"phases_{name}.txt", phases, geom.shape)
        patterns[name] = aperture_pattern(geom, phases, grid)
    if aperture == "transceiver":
        pattern = transceiver_pattern(patterns["tx"], patterns["rx"])
    else:
        pattern = patterns[aperture]
    if write_2d:
        io.write_pattern_csv(out / f"pattern_{aperture}.csv", pattern)
    pu, pv = peak_direction(pattern)
    for axis, at in (("u", pv), ("v", pu)):
        theta, db = cross_section(pattern, axis, at)
        io.write_cross_section_csv(out / f"cut_{aperture}_{'x' if axis == 'u' else 'y'}.csv", theta, db)
    report = _metrics_report(pattern, aperture)
    report["target_theta_deg"] = list(target)
    with open(out / f"metrics_{aperture}.yaml", "w") as fh:
        yaml.safe_dump(report, fh, sort_keys=False)
    return report


def cmd_sweep_k(config: ExperimentConfig, k_values=None, out=None) -> list:
    out = io.ensure_dir(out or config.output_dir)
    k_values = list(k_values or config.sweep_k)
    steer = SteerTarget.from_degrees(*config.targets[0])
    rows = sll_vs_k(config.coprime, k_values, (steer.u0, steer.v0),
                    DirectionGrid.uniform(config.grid), config.element)
    io.write_csv(out / "sweep_k.csv", ["k", "sll_coprime_db", "sll_tx_db", "sll_halfwave_db"],
                 [(str(r.k), r.sll_coprime_db, r.sll_tx_db, r.sll_halfwave_db) for r in rows])
    return rows


def cmd_drive_sim(config: ExperimentConfig, phase_file=None,
                  target: tuple[float, float] | None = None, out=None) -> dict:
    """Row-column drive of one aperture's phase shifters."""
    out = io.ensure_dir(out or config.output_dir)
    tx, rx = _apertures(config)
    geom = tx if config.drive.aperture == "tx" else rx
    if geom.shape[0] != geom.shape[1]:
        raise ValueError("row-column drive needs a square aperture")
    if phase_file is not None:
        phases = io.read_phase_map(phase_file, geom.shape)
        phases = PhaseMap(phases).as_grid(geom.shape)
        source = str(phase_file)
    else:
        target = target or config.targets[0]
        phases = steering_phases(geom, SteerTarget.from_degrees(*target)).as_grid(geom.shape)
        source = f"steer {list(target)}"
    params = config.thermal
    schedule = schedule_from_phases(phases, params)
    cycles = config.drive.cycles or params.settle_cycles()
    trace = simulate_thermal(schedule, params, cycles + 1, config.drive.samples_per_slot)
    stats = phase_ripple(trace, cycles)
    io.write_schedule_csv(out / "schedule.csv", schedule)
    io.write_trace_csv(out / "trace.csv", trace, config.drive.trace_stride)
    rel = stats.relative_error(trace.target)
    summary = {
        "phase_source": source,
        "n": schedule.n,
        "drivers": driver_count(schedule.n),
        "cycles": cycles + 1,
        "tau_s": params.tau,
        "cycle_period_s": params.cycle_period,
        "max_mean_error_rad": float(np.abs(stats.mean_error).max()),
        "max_relative_mean_error": float(rel.max()),
        "max_ripple_rad": float(stats.peak_to_peak.max()),
        "max_ripple_fraction_of_2pi": float(stats.peak_to_peak.max() / TWO_PI),
        "peak_slot_power_mw": float(schedule.slot_totals().max()),
    }
    with open(out / "drive_summary.yaml", "w") as fh:
        yaml.safe_dump(summary, fh, sort_keys=False)
    return summary


# scan workers share these through the pool initializer
_SCAN = {}


def _scan_init(config: ExperimentConfig, pixels):
    tx, rx = _apertures(config)
    _SCAN.update(tx=tx, rx=rx, pixels=pixels, grid=DirectionGrid.uniform(config.scan.grid),
                 norm=float(len(tx) * len(rx)) ** 2)


def _scan_pixel(index: int) -> tuple:
    tx, rx, grid, px = _SCAN["tx"], _SCAN["rx"], _SCAN["grid"], _SCAN["pixels"][index]
    tx_deg, ty_deg = px.theta
    try:
        ptx, prx = co_align(tx, rx, px)
        pattern = transceiver_pattern(aperture_pattern(tx, ptx, grid), aperture_pattern(rx, prx, grid))
        pu, pv = peak_direction(pattern)
        cells = max(abs(pu - px.u0) / grid.du, abs(pv - px.v0) / grid.dv)
        sll = side_lobe_level(pattern, (pu, pv))
        peak_db = 10.0 * math.log10(pattern.peak_linear / _SCAN["norm"])
        return (index, tx_deg, ty_deg, px.u0, px.v0, pu, pv, cells, peak_db, sll, "ok")
    except (UnresolvedLobeError, ValueError) as exc:
        nan = float("nan")
        return (index, tx_deg, ty_deg, px.u0, px.v0, nan, nan, nan, nan, nan, f"error: {exc}")


SCAN_HEADER = ["pixel", "theta_x_deg", "theta_y_deg", "u0", "v0", "peak_u", "peak_v",
               "peak_offset_cells", "peak_power_db", "sll_db", "status"]


def cmd_scan(config: ExperimentConfig, out=None, workers: int | None = None) -> dict:
    """Co-align on every pixel of the field of view and measure the product beam."""
    out = io.ensure_dir(out or config.output_dir)
    s = config.scan
    center = config.element.peak
    pixels = pixel_grid(s.fov_x, s.fov_y, s.beamwidth, center)
    workers = workers if workers is not None else (s.workers or os.cpu_count() or 1)
    if workers <= 1 or len(pixels) < 2:
        _scan_init(config, pixels)
        rows = [_scan_pixel(i) for i in range(len(pixels))]
    else:
        with ProcessPoolExecutor(workers, initializer=_scan_init, initargs=(config, pixels)) as pool:
            rows = list(pool.map(_scan_pixel, range(len(pixels)), chunksize=8))
    io.write_csv(out / "scan.csv", SCAN_HEADER, rows)

    ok = [r for r in rows if r[-1] == "ok"]
    sll = np.array([r[9] for r in ok])
    power = np.array([r[8] for r in ok])
    summary_rows = []
    for name, fn in (("min", np.min), ("median", np.median), ("max", np.max)):
        summary_rows.append((name, fn(power) if ok else float("nan"), fn(sll) if ok else float("nan")))
    io.write_csv(out / "scan_summary.csv", ["statistic", "peak_power_db", "sll_db"], summary_rows)
    return {
        "pixels": len(rows),
        "failed": len(rows) - len(ok),
        "peaks_within_one_cell": int(sum(r[7] <= 1.0 for r in ok)),
        "fraction_sll_le_minus10db": float(np.mean(sll <= -10.0)) if ok else 0.0,
        "no_side_lobe_pixels": int(np.sum(sll == NO_SIDE_LOBES)),
        "sll_db": {name: _num(v) for name, _, v in summary_rows},
        "peak_power_db": {name: _num(v) for name, v, _ in summary_rows},
        "expected_pixels": resolvable_spots(s.fov_x, s.fov_y, s.beamwidth),
    }


def _pair(text: str) -> tuple[float, float]:
    try:
        a, b = (float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected THETA_X,THETA_Y in degrees, got {text!r}") from None
    return a, b


def _k_list(text: str) -> list[Fraction]:
    try:
        return [Fraction(k) for k in text.split(",") if k]
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"bad k list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML experiment config (defaults: fabricated chip)")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int, help="optimizer seed")
    common.add_argument("--grid", type=int, help="samples per axis of the u-v grid")

    ap = argparse.ArgumentParser(prog="coprime-opa", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("design", parents=[common], help="element/driver counts and grating lobes")
    p.add_argument("--pixels", type=int, help="also size a transceiver for this many pixels")
    p.add_argument("--dump-config", action="store_true", help="print the effective config and exit")

    p = sub.add_parser("pattern", parents=[common], help="far-field pattern CSVs and metrics")
    p.add_argument("--aperture", choices=["tx", "rx", "transceiver"], default="transceiver")
    p.add_argument("--target", type=_pair, help="steering direction THETA_X,THETA_Y (deg)")
    p.add_argument("--optimize", action="store_true", help="use the coordinate-ascent optimiser")
    p.add_argument("--no-2d", action="store_true", help="skip the full 2D pattern CSV")

    p = sub.add_parser("sweep-k", parents=[common], help="side-lobe level versus array multiplier")
    p.add_argument("--k", type=_k_list, help="comma-separated multipliers, e.g. 1,2,8/3")

    p = sub.add_parser("drive-sim", parents=[common], help="row-column PAM drive simulation")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--phase-file", help="row col phase_rad table")
    g.add_argument("--target", type=_pair, help="steering direction THETA_X,THETA_Y (deg)")
    p.add_argument("--cycle-rate", type=float, help="column cycling rate, MHz")

    p = sub.add_parser("scan", parents=[common], help="co-aligned beams over the whole FOV")
    p.add_argument("--workers", type=int, help="parallel processes (default: CPUs)")
    return ap


def _apply_overrides(config: ExperimentConfig, args) -> ExperimentConfig:
    import dataclasses

    changes = {}
    if args.out:
        changes["output_dir"] = args.out
    if args.grid is not None:
        if args.grid < 2:
            raise ConfigError("grid", "must be >= 2")
        changes["grid"] = args.grid
        changes["scan"] = dataclasses.replace(config.scan, grid=args.grid)
    if args.seed is not None:
        changes["optimizer"] = dataclasses.replace(config.optimizer, seed=args.seed)
    if getattr(args, "cycle_rate", None) is not None:
        try:
            changes["thermal"] = dataclasses.replace(config.thermal, cycle_rate_mhz=args.cycle_rate)
        except ValueError as exc:
            raise ConfigError("thermal.cycle_rate_mhz", str(exc)) from None
    return config.replace(**changes) if changes else config


def _emit(report) -> None:
    sys.stdout.write(yaml.safe_dump(report, sort_keys=False))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            config = load_config(args.config) if args.config else ExperimentConfig()
            config = _apply_overrides(config, args)
            if args.command == "design":
                if args.dump_config:
                    sys.stdout.write(dump_config(config))
                else:
                    _emit(cmd_design(config, args.pixels))
            elif args.command == "pattern":
                _emit(cmd_pattern(config, args.aperture, args.target, optimize=args.optimize,
                                  write_2d=not args.no_2d))
            elif args.command == "sweep-k":
                rows = cmd_sweep_k(config, args.k)
                _emit([{"k": _num(r.k), "sll_coprime_db": _num(r.sll_coprime_db),
                        "sll_tx_db": _num(r.sll_tx_db), "sll_halfwave_db": _num(r.sll_halfwave_db)}
                       for r in rows])
            elif args.command == "drive-sim":
                _emit(cmd_drive_sim(config, args.phase_file, args.target))
            elif args.command == "scan":
                _emit(cmd_scan(config, workers=args.workers))
        except ConfigError as exc:
            _report_warnings(caught)
            print("error: " + json.dumps({"field": exc.field, "message": exc.message}), file=sys.stderr)
            return 2
        except (ValueError, OSError) as exc:
            _report_warnings(caught)
            print("error: " + json.dumps({"message": str(exc)}), file=sys.stderr)
            return 1
    _report_warnings(caught)
    return 0


def _report_warnings(caught) -> None:
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
