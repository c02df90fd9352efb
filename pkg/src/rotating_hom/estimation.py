"""From coincidence counts to delay-versus-rotation slopes.

The chain is: fit the static dip, park the stage on its steepest flank, invert
each dwell's count through the fitted dip (Poisson maximum likelihood), combine
clockwise and anticlockwise runs, and fit a straight line against rotation rate.
"""

import warnings
from collections import defaultdict
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import DomainError, FitError, GroupingError
from .instrument import ACW, CW, expected_rates

PARAMS = ("center", "width", "visibility", "baseline")
HALF_DIFFERENCE = "half-difference"
ABS_MEAN = "abs-mean"
# clip for counts at or above the baseline: four widths out on the flank
_Q_FLOOR = np.exp(-8.0)


class ClippedEstimateWarning(UserWarning):
    pass


@dataclass(frozen=True)
class DipFitResult:
    """Gaussian dip ``rate(x) = baseline * (1 - visibility * exp(-(x - center)**2 / (2 width**2)))``.

    ``baseline`` is in counts/s; ``covariance`` is ordered as :data:`PARAMS`.
    """

    center: float
    width: float
    visibility: float
    baseline: float
    covariance: np.ndarray = None
    chi2: float = 0.0
    dof: int = 0
    iterations: int = 0

    def __post_init__(self):
        if not self.width > 0:
            raise DomainError("dip width must be positive")
        if not 0.0 <= self.visibility <= 1.0:
            raise DomainError("visibility must lie in [0, 1]")

    def rate(self, x):
        u = (np.asarray(x) - self.center) / self.width
        return self.baseline * (1.0 - self.visibility * np.exp(-0.5 * u**2))

    def slope(self, x):
        u = (np.asarray(x) - self.center) / self.width
        return self.baseline * self.visibility * np.exp(-0.5 * u**2) * u / self.width

    @property
    def std(self):
        if self.covariance is None:
            return dict.fromkeys(PARAMS, 0.0)
        return dict(zip(PARAMS, np.sqrt(np.diag(self.covariance))))


def model_dip(apparatus):
    """The exact dip the simulator produces, expressed as a :class:`DipFitResult`."""
    base, _ = expected_rates(0.5, apparatus.source, apparatus.detector)
    bottom, _ = expected_rates(0.0, apparatus.source, apparatus.detector)
    return DipFitResult(
        center=0.0,
        width=float(apparatus.dip_width),
        visibility=(base - bottom) / base,
        baseline=base,
    )


def _dip_model(theta, x):
    center, width, vis, base = theta
    g = np.exp(-0.5 * ((x - center) / width) ** 2)
    return base * (1.0 - vis * g)


def _dip_jacobian(theta, x):
    center, width, vis, base = theta
    u = (x - center) / width
    g = np.exp(-0.5 * u**2)
    return np.column_stack(
        [
            -base * vis * g * u / width,
            -base * vis * g * u**2 / width,
            -base * g,
            1.0 - vis * g,
        ]
    )


def _initial_guess(x, rate):
    order = np.argsort(x)
    x, rate = x[order], rate[order]
    edge = max(1, min(3, x.size // 4))
    base = 0.5 * (rate[:edge].mean() + rate[-edge:].mean())
    i_min = int(np.argmin(rate))
    depth = base - rate[i_min]
    if not (base > 0 and depth > 0):
        raise FitError("scan shows no dip", {"baseline": base, "depth": depth})
    below = np.flatnonzero(rate < base - 0.5 * depth)
    hwhm = 0.5 * (x[below[-1]] - x[below[0]]) if below.size > 1 else np.diff(x).min()
    width = max(hwhm, 0.5 * np.diff(x).min()) / np.sqrt(2.0 * np.log(2.0))
    return np.array([x[i_min], width, min(depth / base, 1.0), base])


def fit_dip(records, *, max_iter=50, rtol=1e-12):
    """Weighted least-squares fit of the Gaussian dip to a stage scan.

    Weights are Poisson variances of the *modelled* counts, re-evaluated after
    each solve until the parameters stop moving (this converges to the Poisson
    maximum-likelihood point). The covariance is the inverse Fisher matrix.
    """
    x = np.array([r.stage_position for r in records], dtype=float)
    k = np.array([r.coincidences for r in records], dtype=float)
    dwell = np.array([r.dwell for r in records], dtype=float)
    if x.size < 8:
        raise DomainError("fit_dip needs at least 8 scan points")

    theta = _initial_guess(x, k / dwell)
    # scale to O(1) so the solver's tolerances mean the same thing for metres and counts
    scale = np.array([theta[1], theta[1], 1.0, theta[3]])
    shift = np.array([theta[0], 0.0, 0.0, 0.0])
    lower = np.array([-np.inf, 1e-6, 0.0, 0.0])
    upper = np.array([np.inf, np.inf, 1.0, np.inf])

    def to_phys(z):
        return shift + scale * z

    z = (theta - shift) / scale
    for iteration in range(1, max_iter + 1):
        mu_w = np.maximum(dwell * _dip_model(to_phys(z), x), 1.0)
        sw = 1.0 / np.sqrt(mu_w)

        def resid(z):
            return (k - dwell * _dip_model(to_phys(z), x)) * sw

        def jac(z):
            return -(dwell * sw)[:, None] * _dip_jacobian(to_phys(z), x) * scale

        sol = optimize.least_squares(
            resid, np.clip(z, lower, upper), jac=jac, bounds=(lower, upper), xtol=1e-15, ftol=1e-15, gtol=1e-15
        )
        if sol.status <= 0:
            raise FitError("dip fit failed", {"iteration": iteration, "message": sol.message})
        step = np.max(np.abs(sol.x - z) / np.maximum(np.abs(sol.x), 1.0))
        z = sol.x
        if step < rtol:
            break
    else:
        raise FitError("dip fit weights did not settle", {"iterations": max_iter, "last_step": step})

    theta = to_phys(z)
    mu = dwell * _dip_model(theta, x)
    J = dwell[:, None] * _dip_jacobian(theta, x)
    fisher = J.T @ (J / np.maximum(mu, 1.0)[:, None])
    try:
        cov = np.linalg.inv(fisher)
    except np.linalg.LinAlgError as exc:
        raise FitError("singular Fisher matrix", {"theta": theta}) from exc
    span = x.max() - x.min()
    if span < 3.0 * theta[1]:
        raise FitError("scan spans fewer than 3 dip widths", {"span": span, "width": theta[1]})
    spacing = float(np.median(np.diff(np.unique(x))))
    if theta[1] < spacing:
        raise FitError("dip narrower than the scan spacing", {"spacing": spacing, "width": theta[1]})
    vis_std = float(np.sqrt(max(cov[2, 2], 0.0)))
    if theta[2] < 3.0 * vis_std:
        raise FitError("no dip detected above noise", {"visibility": theta[2], "visibility_std": vis_std})
    chi2 = float(np.sum((k - mu) ** 2 / np.maximum(mu, 1.0)))
    return DipFitResult(
        center=float(theta[0]),
        width=float(theta[1]),
        visibility=float(theta[2]),
        baseline=float(theta[3]),
        covariance=cov,
        chi2=chi2,
        dof=int(x.size - 4),
        iterations=iteration,
    )


def steepest_point(fit, side=-1):
    """Stage position of maximum ``|d rate / dx|``: one width either side of the centre."""
    if side not in (-1, 1):
        raise DomainError("side must be -1 or +1")
    return fit.center + side * fit.width


@dataclass(frozen=True)
class DelayEstimate:
    """Stage-equivalent delay (m) inferred from one dwell; ``status`` is
    ``"ok"``, ``"below-dip"`` or ``"above-baseline"`` (the latter two are clipped)."""

    delay: float
    std: float
    count: float
    status: str = "ok"


def mle_delays(counts, dwell, stage_position, fit, side=None):
    """Vectorised Poisson-ML inversion of counts through the fitted dip.

    Returns ``(delay, std, status)`` arrays. The branch is the monotonic flank on
    which ``stage_position`` sits (``side`` overrides it when the stage is
    exactly at the centre). A delay ``d`` means the observed rate equals the
    static dip evaluated at ``stage_position + d``.
    """
    counts = np.asarray(counts, dtype=float)
    dwell = np.broadcast_to(np.asarray(dwell, dtype=float), counts.shape)
    if side is None:
        side = np.sign(stage_position - fit.center) or -1.0
    q = (1.0 - counts / (dwell * fit.baseline)) / fit.visibility
    status = np.full(counts.shape, "ok", dtype=object)
    status[q >= 1.0] = "below-dip"
    status[q <= _Q_FLOOR] = "above-baseline"
    q = np.clip(q, _Q_FLOOR, 1.0)
    u = fit.center + side * fit.width * np.sqrt(-2.0 * np.log(q))
    lam = dwell * fit.rate(u)
    dlam = np.abs(dwell * fit.slope(u))
    with np.errstate(divide="ignore"):
        std = np.where(dlam > 0, np.sqrt(lam) / dlam, np.inf)
    return u - stage_position, std, status


def mle_delay(record, fit, side=None):
    """Maximum-likelihood delay for a single :class:`CountsRecord`."""
    d, std, status = mle_delays(record.coincidences, record.dwell, record.stage_position, fit, side)
    status = str(status)
    if status != "ok":
        warnings.warn(f"count {record.coincidences} outside the invertible range ({status})", ClippedEstimateWarning)
    return DelayEstimate(float(d), float(std), record.coincidences, status)


@dataclass(frozen=True)
class SettingMean:
    magnitude: float
    direction: str
    mean: float
    std: float
    runs: int


def average_runs(records, values, stds=None):
    """Mean per (|rate|, direction) over runs.

    With ``stds`` the uncertainty of the mean is propagated from the per-run
    stds; without them it is the sample std over sqrt(runs) (zero for one run).
    """
    groups = defaultdict(list)
    for i, rec in enumerate(records):
        groups[(abs(rec.rotation_rate), rec.direction)].append(i)
    values = np.asarray(values, dtype=float)
    out = []
    for (magnitude, direction), idx in sorted(groups.items()):
        v = values[idx]
        if stds is not None:
            err = np.sqrt(np.sum(np.asarray(stds, dtype=float)[idx] ** 2)) / len(idx)
        else:
            err = v.std(ddof=1) / np.sqrt(len(idx)) if len(idx) > 1 else 0.0
        out.append(SettingMean(magnitude, direction, float(v.mean()), float(err), len(idx)))
    return out


@dataclass(frozen=True)
class ShiftEstimate:
    magnitude: float
    shift: float
    std: float
    cw: float
    acw: float


def cw_acw_reduce(means, mode=HALF_DIFFERENCE):
    """Combine clockwise and anticlockwise means at each rotation magnitude.

    ``half-difference`` returns ``(CW - ACW)/2`` and removes anything even in the
    rate; ``abs-mean`` returns ``(|CW| + |ACW|)/2``.
    """
    by_mag = defaultdict(dict)
    for m in means:
        if m.direction in by_mag[m.magnitude]:
            raise GroupingError(f"duplicate {m.direction} entry at magnitude {m.magnitude}")
        by_mag[m.magnitude][m.direction] = m
    out = []
    for magnitude in sorted(by_mag):
        pair = by_mag[magnitude]
        if CW not in pair or ACW not in pair:
            raise GroupingError(f"magnitude {magnitude} lacks a CW/ACW pair (have {sorted(pair)})")
        cw, acw = pair[CW], pair[ACW]
        if mode == HALF_DIFFERENCE:
            shift = 0.5 * (cw.mean - acw.mean)
        elif mode == ABS_MEAN:
            shift = 0.5 * (abs(cw.mean) + abs(acw.mean))
        else:
            raise DomainError(f"unknown reduction {mode!r}")
        std = 0.5 * np.hypot(cw.std, acw.std)
        out.append(ShiftEstimate(magnitude, shift, float(std), cw.mean, acw.mean))
    return out


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    slope_std: float
    intercept_std: float
    chi2: float
    dof: int
    covariance: np.ndarray


def fit_linear(x, y, y_std=None):
    """Straight line by (weighted) least squares.

    With ``y_std`` the covariance is the inverse normal matrix; without it the
    covariance is scaled by the residual variance.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.size < 2:
        raise DomainError("fit_linear needs matching x, y with at least 2 points")
    if np.ptp(x) == 0:
        raise FitError("all x values are equal", {"x": x[0]})
    if y_std is None:
        w = np.ones_like(x)
    else:
        y_std = np.asarray(y_std, dtype=float)
        if np.any(~(y_std > 0)):
            raise DomainError("y_std must be positive")
        w = 1.0 / y_std**2
    A = np.column_stack([np.ones_like(x), x])
    normal = A.T @ (w[:, None] * A)
    cov = np.linalg.inv(normal)
    intercept, slope = cov @ (A.T @ (w * y))
    resid = y - (intercept + slope * x)
    chi2 = float(np.sum(w * resid**2))
    dof = x.size - 2
    if y_std is None:
        cov = cov * (chi2 / dof if dof > 0 else 0.0)
    return SlopeFit(
        slope=float(slope),
        intercept=float(intercept),
        slope_std=float(np.sqrt(cov[1, 1])),
        intercept_std=float(np.sqrt(cov[0, 0])),
        chi2=chi2,
        dof=dof,
        covariance=cov,
    )


def ratio_analysis(quantum_slope, classical_slope, wavelength):
    """``(lambda / 2 pi) / (quantum / classical)``: the factor separating the
    measured path/phase ratio from its vacuum value. ``classical_slope`` in rad per unit rate."""
    if classical_slope == 0:
        raise DomainError("classical slope must be non-zero")
    if quantum_slope == 0:
        raise DomainError("quantum slope must be non-zero")
    return (wavelength / (2.0 * np.pi)) / (quantum_slope / classical_slope)
