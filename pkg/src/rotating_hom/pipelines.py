"""End-to-end runs: dip scan, rotation sweep, laser calibration, satellite estimate."""

from dataclasses import dataclass

import numpy as np

from . import estimation, instrument, physics, scenarios


@dataclass
class DipScanResult:
    records: list
    fit: estimation.DipFitResult
    model: estimation.DipFitResult


def simulate_dip(config):
    apparatus = config.apparatus()
    records = instrument.run_dip_scan(config.plan, apparatus, config.seed)
    return DipScanResult(records, estimation.fit_dip(records), estimation.model_dip(apparatus))


@dataclass
class RotationResult:
    scan: DipScanResult
    stage_position: float
    records: list
    delays: np.ndarray
    delay_stds: np.ndarray
    status: np.ndarray
    means: list
    shifts: list
    slope: estimation.SlopeFit
    model_slope: float


def simulate_rotation(config):
    """Quantum pipeline: scan, park on the steep flank, rotate, invert, reduce, fit."""
    apparatus = config.apparatus()
    plan = config.plan
    scan = simulate_dip(config)
    x = plan.stage_position
    if x is None:
        x = estimation.steepest_point(scan.fit, plan.steepest_side)
    records = instrument.run_rotation_protocol(plan, apparatus, x, config.seed)
    counts = np.array([r.coincidences for r in records], dtype=float)
    dwell = np.array([r.dwell for r in records], dtype=float)
    side = plan.steepest_side if x == scan.fit.center else None
    delays, stds, status = estimation.mle_delays(counts, dwell, x, scan.fit, side=side)
    means = estimation.average_runs(records, delays, stds)
    shifts = estimation.cw_acw_reduce(means, config.reduction)
    slope = estimation.fit_linear(
        [s.magnitude for s in shifts], [s.shift for s in shifts], [s.std for s in shifts]
    )
    return RotationResult(scan, float(x), records, delays, stds, status, means, shifts, slope,
                          float(apparatus.stage_shift(1.0)))


@dataclass
class ClassicalResult:
    records: list
    means: list
    shifts: list
    slope: estimation.SlopeFit
    model_slope: float


def calibrate_classical(config):
    """Laser pipeline; phases and slopes in radians."""
    apparatus = config.apparatus()
    cl = config.classical
    records = instrument.run_classical_protocol(
        config.plan,
        apparatus,
        cl.wavelength,
        phase_noise=cl.phase_noise,
        even_phase_coefficient=cl.even_phase_coefficient,
        master_seed=config.seed,
    )
    means = estimation.average_runs(records, [r.phase_shift for r in records])
    shifts = estimation.cw_acw_reduce(means, config.reduction)
    y_std = [s.std for s in shifts]
    if min(y_std) <= 0:
        y_std = None
    slope = estimation.fit_linear([s.magnitude for s in shifts], [s.shift for s in shifts], y_std)
    model = physics.classical_phase_shift(apparatus.sagnac_delay(1.0), cl.wavelength)
    return ClassicalResult(records, means, shifts, slope, float(model))


@dataclass
class SatelliteReport:
    per_revolution: float
    total: float
    revolutions: int
    quoted_delay: float
    quoted_over_formula: float
    revolutions_for_quoted: int
    revolutions_for_100nm: int


def satellite_report(config):
    sc = config.satellite
    one = scenarios.SatelliteScenario(sc.angular_momentum, sc.orbital_radius, sc.gravitational_constant, 1)
    per_rev = scenarios.gravitomagnetic_delay(one)
    return SatelliteReport(
        per_revolution=per_rev,
        total=scenarios.gravitomagnetic_delay(sc),
        revolutions=sc.revolutions,
        quoted_delay=scenarios.QUOTED_ORBITAL_DELAY,
        quoted_over_formula=scenarios.QUOTED_ORBITAL_DELAY / per_rev,
        revolutions_for_quoted=scenarios.revolutions_needed(one, scenarios.QUOTED_ORBITAL_DELAY),
        revolutions_for_100nm=scenarios.revolutions_needed(one, 100e-9 / physics.SPEED_OF_LIGHT),
    )
