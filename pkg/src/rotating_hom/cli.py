"""Command-line driver.

    rotating-hom simulate-dip        [--config PATH] [--seed N] [--out DIR] [--convention C]
    rotating-hom simulate-rotation   ...
    rotating-hom calibrate-classical ... [--radians]
    rotating-hom satellite           ...

Each command writes CSV tables plus a one-line JSON metadata sidecar into the
output directory. Exit status: 0 success, 2 configuration error, 3 numerical failure.
"""

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, config as cfgmod, pipelines, scenarios
from .errors import ConfigError, DomainError, NumericalError
from .physics import CONVENTIONS

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    return path


def _write_meta(out, command, config, outputs):
    meta = {
        "command": command,
        "config_sha256": cfgmod.config_hash(config),
        "convention": config.convention,
        "outputs": sorted(p.name for p in outputs),
        "seed": config.seed,
        "version": __version__,
    }
    path = out / f"{command}.meta.jsonl"
    path.write_text(json.dumps(meta, sort_keys=True) + "\n", encoding="utf-8")


def cmd_simulate_dip(config, out, args):
    result = pipelines.simulate_dip(config)
    scan_rows = (
        (r.stage_position, r.coincidences, r.singles[0], r.singles[1], r.dwell) for r in result.records
    )
    files = [
        _write_csv(
            out / "dip_scan.csv",
            ["stage_position_m", "coincidences_counts", "singles_a_counts", "singles_b_counts", "dwell_s"],
            scan_rows,
        )
    ]
    fit, model = result.fit, result.model
    std = fit.std
    units = {"center": "m", "width": "m", "visibility": "1", "baseline": "counts/s"}
    rows = [(name, units[name], getattr(fit, name), std[name], getattr(model, name)) for name in units]
    rows.append(("chi2", "1", fit.chi2, 0.0, float(fit.dof)))
    files.append(_write_csv(out / "dip_fit.csv", ["parameter", "unit", "fitted", "std", "model"], rows))
    print(f"dip centre {fit.center:.4g} m, width {fit.width:.4g} m (model {model.width:.4g} m), "
          f"visibility {fit.visibility:.4f}")
    return files


def cmd_simulate_rotation(config, out, args):
    result = pipelines.simulate_rotation(config)
    runs = (
        (abs(r.rotation_rate), r.rotation_rate, r.direction, r.stream[-1], r.stage_position, r.dwell,
         r.coincidences, d, s, st)
        for r, d, s, st in zip(result.records, result.delays, result.delay_stds, result.status)
    )
    files = [
        _write_csv(
            out / "rotation_runs.csv",
            ["magnitude_hz", "rotation_rate_hz", "direction", "run", "stage_position_m", "dwell_s",
             "coincidences_counts", "delay_m", "delay_std_m", "status"],
            runs,
        ),
        _write_csv(
            out / "rotation_shifts.csv",
            ["magnitude_hz", "shift_m", "shift_std_m", "cw_mean_m", "acw_mean_m"],
            ((s.magnitude, s.shift, s.std, s.cw, s.acw) for s in result.shifts),
        ),
    ]
    sl = result.slope
    rows = [
        ("slope", sl.slope, "m/hz"),
        ("slope_std", sl.slope_std, "m/hz"),
        ("intercept", sl.intercept, "m"),
        ("intercept_std", sl.intercept_std, "m"),
        ("chi2", sl.chi2, "1"),
        ("dof", sl.dof, "1"),
        ("model_slope", result.model_slope, "m/hz"),
        ("reference_slope", scenarios.QUOTED_QUANTUM_SLOPE, "m/hz"),
        ("reference_slope_std", scenarios.QUOTED_QUANTUM_SLOPE_STD, "m/hz"),
        ("stage_position", result.stage_position, "m"),
    ]
    files.append(_write_csv(out / "rotation_slope.csv", ["quantity", "value", "unit"], rows))
    print(f"quantum slope {sl.slope * 1e9:.2f} +/- {sl.slope_std * 1e9:.2f} nm/Hz "
          f"(model {result.model_slope * 1e9:.2f}, reference 200 +/- 12)")
    return files


def cmd_calibrate_classical(config, out, args):
    result = pipelines.calibrate_classical(config)
    unit = "rad" if args.radians else "deg"
    k = 1.0 if args.radians else 180.0 / np.pi
    files = [
        _write_csv(
            out / "classical_phases.csv",
            ["rotation_rate_hz", "direction", "run", f"phase_shift_{unit}"],
            ((r.rotation_rate, r.direction, r.stream[-1], k * r.phase_shift) for r in result.records),
        ),
        _write_csv(
            out / "classical_shifts.csv",
            ["magnitude_hz", f"shift_{unit}", f"shift_std_{unit}", f"cw_mean_{unit}", f"acw_mean_{unit}"],
            ((s.magnitude, k * s.shift, k * s.std, k * s.cw, k * s.acw) for s in result.shifts),
        ),
    ]
    sl = result.slope
    rows = [
        ("slope", k * sl.slope, f"{unit}/hz"),
        ("slope_std", k * sl.slope_std, f"{unit}/hz"),
        ("intercept", k * sl.intercept, unit),
        ("chi2", sl.chi2, "1"),
        ("dof", sl.dof, "1"),
        ("model_slope", k * result.model_slope, f"{unit}/hz"),
        ("reference_slope", k * np.radians(scenarios.QUOTED_CLASSICAL_SLOPE_DEG), f"{unit}/hz"),
        ("reference_slope_std", k * np.radians(scenarios.QUOTED_CLASSICAL_SLOPE_STD_DEG), f"{unit}/hz"),
    ]
    files.append(_write_csv(out / "classical_slope.csv", ["quantity", "value", "unit"], rows))
    print(f"classical slope {k * sl.slope:.3f} +/- {k * sl.slope_std:.3f} {unit}/Hz "
          f"(model {k * result.model_slope:.3f})")
    return files


def cmd_satellite(config, out, args):
    rep = pipelines.satellite_report(config)
    rows = [
        ("delay_per_revolution", rep.per_revolution, "s"),
        ("revolutions", rep.revolutions, "1"),
        ("delay_total", rep.total, "s"),
        ("quoted_order_of_magnitude", rep.quoted_delay, "s"),
        ("quoted_over_formula", rep.quoted_over_formula, "1"),
        ("revolutions_for_quoted", rep.revolutions_for_quoted, "1"),
        ("revolutions_for_100nm", rep.revolutions_for_100nm, "1"),
    ]
    files = [_write_csv(out / "satellite_report.csv", ["quantity", "value", "unit"], rows)]
    print(f"gravitomagnetic delay G J / (R c^4): {rep.per_revolution:.3g} s per revolution "
          f"({rep.total:.3g} s over {rep.revolutions})")
    print(f"quoted order of magnitude: ~{rep.quoted_delay:.0e} s, {rep.quoted_over_formula:.1f}x the bare formula; "
          "the unit prefactor of the estimate is not pinned down, so both numbers are reported")
    print(f"revolutions to reach the quoted delay: {rep.revolutions_for_quoted}; "
          f"to reach 100 nm / c: {rep.revolutions_for_100nm}")
    return files


COMMANDS = {
    "simulate-dip": cmd_simulate_dip,
    "simulate-rotation": cmd_simulate_rotation,
    "calibrate-classical": cmd_calibrate_classical,
    "satellite": cmd_satellite,
}

HELP = {
    "simulate-dip": "scan the stage through the dip and fit it",
    "simulate-rotation": "CW/ACW rotation sweep parked on the dip flank",
    "calibrate-classical": "laser fringe-shift sweep in the same loop",
    "satellite": "gravitomagnetic clock delay for an orbiting loop",
}


def build_parser():
    parser = argparse.ArgumentParser(prog="rotating-hom", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=HELP[name])
        p.add_argument("--config", type=Path, help="TOML configuration (defaults to the lab preset)")
        p.add_argument("--preset", choices=sorted(scenarios.PRESETS), default="lab",
                       help="built-in configuration used when --config is absent")
        p.add_argument("--seed", type=int, help="master seed for every random stream")
        p.add_argument("--out", type=Path, help="output directory")
        p.add_argument("--convention", choices=CONVENTIONS, help="how a rotation rate maps to angular velocity")
        p.add_argument("--format", choices=["csv"], default="csv", help="table format")
        if name == "calibrate-classical":
            p.add_argument("--radians", action="store_true", help="emit angles in radians instead of degrees")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = cfgmod.load(args.config) if args.config else scenarios.PRESETS[args.preset]()
        config = config.with_overrides(
            seed=args.seed,
            convention=args.convention,
            output_dir=str(args.out) if args.out else None,
        )
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        files = COMMANDS[args.command](config, out, args)
    except NumericalError as exc:
        print(f"numerical failure: {exc} {exc.diagnostics}", file=sys.stderr)
        return EXIT_NUMERICAL
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    _write_meta(out, args.command, config, files)
    return 0


if __name__ == "__main__":
    sys.exit(main())
