"""Monte Carlo model of the photon-counting experiment.

Every record draws from its own counter-based random stream keyed by
``(master_seed, namespace, setting, direction, run)``, so the full record set
is independent of evaluation order.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT

from . import physics
from .errors import DomainError

SCAN_STREAM = 1
ROTATION_STREAM = 2
DRIFT_STREAM = 3
CLASSICAL_STREAM = 4

CW = "CW"
ACW = "ACW"
SCAN = "scan"
DIRECTIONS = (CW, ACW)


def _pair(value):
    return tuple(float(v) for v in np.broadcast_to(value, (2,)))


@dataclass(frozen=True)
class SourceModel:
    """Pair source. ``spectral_width`` is the std (rad/s) of each photon's intensity spectrum."""

    pair_rate: float = 1e5
    arm_transmission: tuple = (0.1, 0.1)
    photon_center_wavelength: float = 710e-9
    spectral_width: float = 1.5e14
    mode_overlap_visibility: float = 0.9
    pump_wavelength: float = 355e-9

    def __post_init__(self):
        object.__setattr__(self, "arm_transmission", _pair(self.arm_transmission))
        if self.pair_rate < 0:
            raise DomainError("pair_rate must be >= 0")
        if not all(0.0 <= t <= 1.0 for t in self.arm_transmission):
            raise DomainError("arm transmissions must lie in [0, 1]")
        if not 0.0 <= self.mode_overlap_visibility <= 1.0:
            raise DomainError("mode_overlap_visibility must lie in [0, 1]")
        if not self.photon_center_wavelength > 0 or not self.pump_wavelength > 0:
            raise DomainError("wavelengths must be positive")

    @property
    def center_frequency(self):
        return 2.0 * np.pi * SPEED_OF_LIGHT / self.photon_center_wavelength

    def joint_amplitude(self):
        return physics.SeparableGaussian(self.center_frequency, self.spectral_width)


@dataclass(frozen=True)
class DetectorModel:
    efficiency: tuple = (0.5, 0.5)
    dark_rate: tuple = (100.0, 100.0)
    coincidence_window: float = 3e-9

    def __post_init__(self):
        object.__setattr__(self, "efficiency", _pair(self.efficiency))
        object.__setattr__(self, "dark_rate", _pair(self.dark_rate))
        if not all(0.0 <= e <= 1.0 for e in self.efficiency):
            raise DomainError("detector efficiencies must lie in [0, 1]")
        if any(d < 0 for d in self.dark_rate):
            raise DomainError("dark rates must be >= 0")
        if not self.coincidence_window > 0:
            raise DomainError("coincidence_window must be positive")


@dataclass(frozen=True)
class RunPlan:
    """What to measure and for how long.

    ``even_coefficient`` is a stage-equivalent delay (m) per unit rate squared
    applied identically to both senses of rotation (centrifugal deformation).
    ``drift_std`` is the random-walk step of the common path in m per sqrt(s).
    ``stage_position`` of ``None`` means "use the steepest point of the fitted dip".
    """

    rotation_magnitudes: tuple = (0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0)
    runs_per_setting: int = 50
    dwell_time: float = 1.0
    scan_dwell_time: float = 100.0
    scan_positions: tuple = None
    stage_position: float = None
    steepest_side: int = -1
    even_coefficient: float = 0.0
    drift_std: float = 0.0
    sagnac: bool = True
    noiseless: bool = False

    def __post_init__(self):
        object.__setattr__(self, "rotation_magnitudes", tuple(float(m) for m in self.rotation_magnitudes))
        if self.scan_positions is not None:
            object.__setattr__(self, "scan_positions", tuple(float(x) for x in self.scan_positions))
        if self.runs_per_setting < 1:
            raise DomainError("runs_per_setting must be >= 1")
        if not self.dwell_time > 0 or not self.scan_dwell_time > 0:
            raise DomainError("dwell times must be positive")
        if any(m < 0 for m in self.rotation_magnitudes):
            raise DomainError("rotation magnitudes are unsigned; directions supply the sign")
        if self.steepest_side not in (-1, 1):
            raise DomainError("steepest_side must be -1 or +1")
        if self.drift_std < 0:
            raise DomainError("drift_std must be >= 0")


@dataclass(frozen=True)
class Apparatus:
    """Everything the count model needs: geometry, source, detectors, rate convention."""

    geometry: physics.PlatformGeometry
    source: SourceModel = field(default_factory=SourceModel)
    detector: DetectorModel = field(default_factory=DetectorModel)
    convention: str = physics.PAPER_F

    @property
    def dip_width(self):
        """Gaussian std of the dip in stage metres."""
        return physics.dip_width_stage(self.source.spectral_width, self.geometry.group_index)

    def sagnac_delay(self, rate):
        return physics.sagnac_delay(self.geometry.enclosed_area, rate, self.convention)

    def stage_shift(self, rate):
        """Stage-equivalent delay (m) produced by rotation at ``rate``."""
        return physics.dip_shift_stage(self.sagnac_delay(rate), self.geometry.group_index)

    def probability(self, stage_position, rate=0.0, sagnac=True):
        delay = physics.stage_to_delay(stage_position, self.geometry.group_index)
        if sagnac:
            delay = delay + self.sagnac_delay(rate)
        return physics.gaussian_dip(delay, self.source.spectral_width)

    def default_scan_positions(self, points=61, span=5.0):
        s = self.dip_width
        return tuple(np.linspace(-span * s, span * s, points))


@dataclass(frozen=True)
class CountsRecord:
    stage_position: float
    rotation_rate: float
    direction: str
    dwell: float
    coincidences: float
    singles: tuple
    stream: tuple

    def __post_init__(self):
        if self.coincidences < 0 or any(s < 0 for s in self.singles):
            raise DomainError("counts must be >= 0")


def expected_rates(p, source, detector):
    """Coincidence rate and the two singles rates for dip probability ``p``.

    The ideal probability is diluted by imperfect mode overlap,
    ``p_eff = (1 - V (1 - 2p)) / 2``, and accidentals ``S_A S_B window`` are added.
    """
    p = np.asarray(p, dtype=float)
    t1, t2 = source.arm_transmission
    e1, e2 = detector.efficiency
    pair_detect = source.pair_rate * t1 * t2 * e1 * e2
    p_eff = 0.5 * (1.0 - source.mode_overlap_visibility * (1.0 - 2.0 * p))
    singles = tuple(
        source.pair_rate * 0.5 * (t1 + t2) * eff + dark for eff, dark in zip(detector.efficiency, detector.dark_rate)
    )
    accidentals = singles[0] * singles[1] * detector.coincidence_window
    coincidence = pair_detect * p_eff + accidentals
    if coincidence.ndim == 0:
        coincidence = float(coincidence)
    return coincidence, singles


def stream_rng(master_seed, *key):
    """Philox generator for one record; ``key`` is a tuple of non-negative ints."""
    seq = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(seq))


def sample_counts(
    rates,
    dwell,
    stream,
    *,
    master_seed=0,
    stage_position=0.0,
    rotation_rate=0.0,
    direction=SCAN,
    noiseless=False,
):
    """Poisson-sample one dwell. ``rates`` is the ``(coincidence, singles)`` pair
    from :func:`expected_rates`; ``stream`` is the record's key tuple.

    With ``noiseless=True`` the expected (non-integer) counts are stored instead.
    """
    if not dwell > 0:
        raise DomainError("dwell must be positive")
    coincidence, singles = rates
    means = np.array([coincidence, singles[0], singles[1]], dtype=float) * dwell
    if noiseless:
        counts = means
    else:
        counts = stream_rng(master_seed, *stream).poisson(means)
    coinc, s_a, s_b = (c.item() for c in counts)
    return CountsRecord(
        stage_position=float(stage_position),
        rotation_rate=float(rotation_rate),
        direction=direction,
        dwell=float(dwell),
        coincidences=coinc,
        singles=(s_a, s_b),
        stream=tuple(stream),
    )


def run_dip_scan(plan, apparatus, master_seed=0, rotation_rate=0.0):
    """One record per scan position, at a fixed rotation rate (default at rest)."""
    positions = plan.scan_positions or apparatus.default_scan_positions()
    records = []
    for i, x in enumerate(positions):
        p = apparatus.probability(x, rotation_rate, sagnac=plan.sagnac)
        rates = expected_rates(p, apparatus.source, apparatus.detector)
        records.append(
            sample_counts(
                rates,
                plan.scan_dwell_time,
                (SCAN_STREAM, i),
                master_seed=master_seed,
                stage_position=x,
                rotation_rate=rotation_rate,
                direction=SCAN,
                noiseless=plan.noiseless,
            )
        )
    return records


def drift_offsets(plan, master_seed, setting):
    """Common-path random walk (m) for each run of one rotation magnitude.

    One step per CW/ACW pair; both senses of run ``j`` see the same offset.
    """
    if plan.noiseless or plan.drift_std == 0.0:
        return np.zeros(plan.runs_per_setting)
    step = plan.drift_std * np.sqrt(2.0 * plan.dwell_time)
    rng = stream_rng(master_seed, DRIFT_STREAM, setting)
    return np.cumsum(rng.normal(0.0, step, plan.runs_per_setting))


def run_rotation_protocol(plan, apparatus, stage_position, master_seed=0):
    """CW and ACW runs at a fixed stage position for every rotation magnitude.

    Records come back in (magnitude, run, direction) order. The stage delay of
    each record is ``stage_position + even_coefficient * m**2 + drift``; the
    Sagnac delay (if enabled) carries the sign of the direction.
    """
    records = []
    for i, magnitude in enumerate(plan.rotation_magnitudes):
        systematic = plan.even_coefficient * magnitude**2
        drift = drift_offsets(plan, master_seed, i)
        for j in range(plan.runs_per_setting):
            for k, direction in enumerate(DIRECTIONS):
                rate = magnitude if direction == CW else -magnitude
                x = stage_position + systematic + drift[j]
                p = apparatus.probability(x, rate, sagnac=plan.sagnac)
                rates = expected_rates(p, apparatus.source, apparatus.detector)
                records.append(
                    sample_counts(
                        rates,
                        plan.dwell_time,
                        (ROTATION_STREAM, i, k, j),
                        master_seed=master_seed,
                        stage_position=stage_position,
                        rotation_rate=rate,
                        direction=direction,
                        noiseless=plan.noiseless,
                    )
                )
    return records


@dataclass(frozen=True)
class PhaseRecord:
    """One camera measurement of the fringe phase shift (rad)."""

    rotation_rate: float
    direction: str
    phase_shift: float
    stream: tuple


def run_classical_protocol(
    plan,
    apparatus,
    wavelength,
    *,
    phase_noise=0.0,
    even_phase_coefficient=0.0,
    master_seed=0,
):
    """Laser Sagnac calibration: fringe shift per CW/ACW run for every magnitude.

    The phase uses the vacuum wavelength; the fibre index does not enter.
    ``even_phase_coefficient`` is rad per unit rate squared, common to both senses.
    """
    records = []
    for i, magnitude in enumerate(plan.rotation_magnitudes):
        for j in range(plan.runs_per_setting):
            for k, direction in enumerate(DIRECTIONS):
                rate = magnitude if direction == CW else -magnitude
                phi = even_phase_coefficient * magnitude**2
                if plan.sagnac:
                    phi += physics.classical_phase_shift(apparatus.sagnac_delay(rate), wavelength)
                stream = (CLASSICAL_STREAM, i, k, j)
                if not plan.noiseless and phase_noise > 0:
                    phi += stream_rng(master_seed, *stream).normal(0.0, phase_noise)
                records.append(PhaseRecord(float(rate), direction, float(phi), stream))
    return records
