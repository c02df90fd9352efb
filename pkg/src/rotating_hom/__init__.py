"""Hong-Ou-Mandel interference on a rotating platform: physics, simulation, estimation."""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    DomainError,
    FitError,
    GroupingError,
    NumericalError,
    ResourceError,
)
from .physics import (
    PAPER_F,
    PHYSICAL_HZ,
    SPEED_OF_LIGHT,
    PathDelays,
    PlatformGeometry,
    RotationRate,
    SeparableGaussian,
    Tabulated,
    accumulated_phase,
    classical_phase_shift,
    coincidence_probability,
    coincidence_probability_discrete_oracle,
    coincidence_probability_gaussian,
    dip_shift_stage,
    enclosed_area,
    flight_times,
    sagnac_delay,
)
from .instrument import (
    Apparatus,
    CountsRecord,
    DetectorModel,
    RunPlan,
    SourceModel,
    expected_rates,
    run_dip_scan,
    run_rotation_protocol,
    sample_counts,
)
from .estimation import (
    DelayEstimate,
    DipFitResult,
    SlopeFit,
    cw_acw_reduce,
    fit_dip,
    fit_linear,
    mle_delay,
    ratio_analysis,
    steepest_point,
)
from .scenarios import SatelliteScenario, gravitomagnetic_delay, lab_preset, revolutions_needed
from .config import ClassicalSettings, ExperimentConfig
