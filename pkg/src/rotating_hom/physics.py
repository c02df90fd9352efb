"""Sagnac delays and Hong-Ou-Mandel coincidence probabilities on a rotating loop.

All functions are pure. Times are in seconds, angular frequencies in rad/s,
lengths in metres.

Two rotation-rate conventions are supported (see :class:`RotationRate`):

``"paper-f"``
    the number supplied is used directly as the angular rate in the
    Sagnac formula ``dt = 4 A Omega / c**2``. This reproduces the measured
    slopes of the rotating-fibre experiment (170 deg/Hz, ~200 nm/Hz).
``"physical-hz"``
    the number is a revolution frequency in Hz and ``Omega = 2 pi f``, so
    ``dt = 8 pi A f / c**2``.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT

from .errors import DomainError, NumericalError, ResourceError
from .quadrature import adaptive_integrate_2d

PAPER_F = "paper-f"
PHYSICAL_HZ = "physical-hz"
CONVENTIONS = (PAPER_F, PHYSICAL_HZ)

NORM_TOL = 1e-9
ORACLE_MAX_BINS = 128


def _check_convention(convention):
    if convention not in CONVENTIONS:
        raise DomainError(f"unknown rotation convention {convention!r}; expected one of {CONVENTIONS}")


@dataclass(frozen=True)
class PlatformGeometry:
    """Fibre loop wound ``turns`` times around a circle of ``loop_diameter``.

    ``free_space_path`` is the extra optical path (m, vacuum) between source,
    couplers and beamsplitter; it only enters the common time of flight.
    """

    loop_diameter: float
    turns: int
    fiber_length: float
    phase_index: float = 1.45
    group_index: float = 1.45
    free_space_path: float = 0.0

    def __post_init__(self):
        if not self.loop_diameter > 0:
            raise DomainError("loop_diameter must be positive")
        if not self.fiber_length > 0:
            raise DomainError("fiber_length must be positive")
        if int(self.turns) != self.turns or self.turns < 0:
            raise DomainError("turns must be a non-negative integer")
        if self.phase_index < 1 or self.group_index < 1:
            raise DomainError("refractive indices must be >= 1")
        if self.free_space_path < 0:
            raise DomainError("free_space_path must be >= 0")

    @property
    def enclosed_area(self):
        return enclosed_area(self.turns, self.loop_diameter)

    @classmethod
    def from_area(cls, area, turns, fiber_length, **kwargs):
        """Geometry whose loop diameter gives exactly ``area`` for ``turns`` windings."""
        if turns < 1 or not area > 0:
            raise DomainError("from_area needs turns >= 1 and area > 0")
        diameter = 2.0 * np.sqrt(area / (turns * np.pi))
        return cls(loop_diameter=float(diameter), turns=turns, fiber_length=fiber_length, **kwargs)


@dataclass(frozen=True)
class RotationRate:
    value: float
    convention: str = PAPER_F

    def __post_init__(self):
        _check_convention(self.convention)

    @property
    def angular_rate(self):
        """Effective angular rate in rad/s that enters the Sagnac formula."""
        if self.convention == PAPER_F:
            return self.value
        return 2.0 * np.pi * self.value


def angular_rate(rate, convention=PAPER_F):
    """Angular rate for a :class:`RotationRate` or a bare number (or array)."""
    if isinstance(rate, RotationRate):
        return rate.angular_rate
    _check_convention(convention)
    rate = np.asarray(rate, dtype=float) if np.ndim(rate) else float(rate)
    return rate if convention == PAPER_F else 2.0 * np.pi * rate


@dataclass(frozen=True)
class PathDelays:
    """Source-to-beamsplitter flight times for the two senses of the loop."""

    t_plus: float
    t_minus: float
    stage_delay: float = 0.0

    @property
    def sagnac_delta(self):
        return self.t_plus - self.t_minus

    @property
    def total_delay(self):
        return self.sagnac_delta + self.stage_delay


def enclosed_area(turns, loop_diameter):
    """Effective area ``N pi r**2`` of a multi-turn loop."""
    if not loop_diameter > 0:
        raise DomainError("loop_diameter must be positive")
    if turns < 0:
        raise DomainError("turns must be >= 0")
    return turns * np.pi * (loop_diameter / 2.0) ** 2


def sagnac_delay(area, rate, convention=PAPER_F):
    """Arrival-time difference ``4 A Omega / c**2`` between the two senses.

    ``rate`` is a :class:`RotationRate` or a number/array interpreted with
    ``convention``. Antisymmetric and linear in the rate.
    """
    if np.any(np.asarray(area) < 0):
        raise DomainError("area must be >= 0")
    return 4.0 * area * angular_rate(rate, convention) / SPEED_OF_LIGHT**2


def classical_phase_shift(delta_t, wavelength):
    """Fringe phase shift (rad) of a laser Sagnac interferometer, ``(2 pi c / lambda) dt``."""
    if not wavelength > 0:
        raise DomainError("wavelength must be positive")
    return 2.0 * np.pi * SPEED_OF_LIGHT / wavelength * delta_t


def flight_times(geometry, rate, stage_delay=0.0, convention=PAPER_F):
    t0 = (geometry.fiber_length * geometry.group_index + geometry.free_space_path) / SPEED_OF_LIGHT
    dt = sagnac_delay(geometry.enclosed_area, rate, convention)
    return PathDelays(t_plus=t0 + 0.5 * dt, t_minus=t0 - 0.5 * dt, stage_delay=stage_delay)


def accumulated_phase(omega1, omega2, delays):
    """Phase picked up by the mode pair: ``w1 (t+ + dt_p) + w2 t-``."""
    return omega1 * (delays.t_plus + delays.stage_delay) + omega2 * delays.t_minus


def dip_shift_stage(delta_t, group_index):
    """Stage displacement ``c dt / n_g`` that moves the dip by a delay ``delta_t``."""
    if group_index < 1:
        raise DomainError("group_index must be >= 1")
    return SPEED_OF_LIGHT * delta_t / group_index


def stage_to_delay(position, group_index):
    """Inverse of :func:`dip_shift_stage`: stage metres to seconds of delay."""
    return np.asarray(position) * group_index / SPEED_OF_LIGHT


def dip_width_stage(width, group_index):
    """Gaussian std (m) of the coincidence dip in stage units for spectral width ``width``."""
    return SPEED_OF_LIGHT / (np.sqrt(2.0) * width * group_index)


# --- joint spectral amplitudes ---------------------------------------------


@dataclass(frozen=True)
class SeparableGaussian:
    """``psi(w1, w2) = g(w1) g(w2)`` with ``|g|**2`` a Gaussian of std ``width``."""

    center: float
    width: float

    def __post_init__(self):
        if not self.width > 0:
            raise DomainError("spectral width must be positive")
        if self.center < 10.0 * self.width:
            raise DomainError("narrowband condition violated: need center >= 10 * width")

    def marginal(self, omega):
        s2 = self.width**2
        return (2.0 * np.pi * s2) ** -0.25 * np.exp(-((omega - self.center) ** 2) / (4.0 * s2))

    def __call__(self, omega1, omega2):
        return self.marginal(omega1) * self.marginal(omega2)

    def support(self, n_sigma=8.0):
        lo = max(0.0, self.center - n_sigma * self.width)
        return lo, self.center + n_sigma * self.width

    def tabulate(self, bins=128, n_sigma=8.0):
        """Sample on a uniform midpoint grid over the support and renormalise."""
        lo, hi = self.support(n_sigma)
        edges = np.linspace(lo, hi, bins + 1)
        grid = 0.5 * (edges[1:] + edges[:-1])
        return Tabulated.from_function(self, grid, weights=np.diff(edges), normalize=True)


@dataclass(frozen=True, eq=False)
class Tabulated:
    """Joint amplitude sampled on ``frequencies x frequencies``.

    ``amplitudes[j, k]`` is ``psi(frequencies[j], frequencies[k])``; ``weights``
    are the per-axis quadrature weights (bin widths for a midpoint grid).
    """

    frequencies: np.ndarray
    amplitudes: np.ndarray
    weights: np.ndarray = field(default=None)

    def __post_init__(self):
        freqs = np.asarray(self.frequencies, dtype=float)
        amps = np.asarray(self.amplitudes, dtype=complex)
        if freqs.ndim != 1 or amps.shape != (freqs.size, freqs.size):
            raise DomainError("amplitudes must be a square array matching the frequency grid")
        if self.weights is None:
            weights = np.gradient(freqs) if freqs.size > 1 else np.ones(1)
        else:
            weights = np.asarray(self.weights, dtype=float)
        if weights.shape != freqs.shape or np.any(weights <= 0):
            raise DomainError("weights must be positive and match the grid")
        object.__setattr__(self, "frequencies", freqs)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "weights", weights)
        norm = self.norm()
        if abs(norm - 1.0) > NORM_TOL:
            raise DomainError(f"joint amplitude is not normalised (norm = {norm!r})")

    def norm(self):
        w = self.weights
        return float(np.einsum("j,jk,k->", w, np.abs(self.amplitudes) ** 2, w))

    @classmethod
    def from_function(cls, fn, frequencies, weights=None, normalize=True):
        freqs = np.asarray(frequencies, dtype=float)
        W1, W2 = np.meshgrid(freqs, freqs, indexing="ij")
        amps = np.asarray(fn(W1, W2), dtype=complex)
        if normalize:
            w = np.gradient(freqs) if weights is None else np.asarray(weights, dtype=float)
            amps = amps / np.sqrt(np.einsum("j,jk,k->", w, np.abs(amps) ** 2, w))
        return cls(freqs, amps, weights)

    def is_symmetric(self, tol=1e-12):
        return np.allclose(self.amplitudes, self.amplitudes.T, rtol=0, atol=tol)


def two_color_pair(center_a, center_b, width, antisymmetric=False, bins=128):
    """Exchange-(anti)symmetrised pair ``g_a(w1) g_b(w2) +/- g_b(w1) g_a(w2)``.

    Tabulated on a uniform grid covering both colours; useful for the fermionic
    (anti-bunching) limit.
    """
    ga = SeparableGaussian(center_a, width)
    gb = SeparableGaussian(center_b, width)
    lo = max(0.0, min(center_a, center_b) - 8.0 * width)
    hi = max(center_a, center_b) + 8.0 * width
    edges = np.linspace(lo, hi, bins + 1)
    grid = 0.5 * (edges[1:] + edges[:-1])
    sign = -1.0 if antisymmetric else 1.0

    def psi(w1, w2):
        return ga.marginal(w1) * gb.marginal(w2) + sign * gb.marginal(w1) * ga.marginal(w2)

    return Tabulated.from_function(psi, grid, weights=np.diff(edges))


# --- coincidence probability -------------------------------------------------


def _overlap_integrand(psi, T):
    def f(W1, W2):
        amp = psi(W1, W2)
        swapped = psi(W2, W1)
        overlap = np.conj(swapped) * amp * np.exp(1j * (W2 - W1) * T)
        return np.stack([overlap, np.abs(amp) ** 2 + 0j])

    return f


def exchange_overlap(psi, total_delay, *, atol=1e-8, max_order=1024):
    """Normalised overlap ``int int psi*(w2, w1) psi(w1, w2) exp(i (w2 - w1) T)``.

    Returns ``(overlap, diagnostics)``. For a :class:`Tabulated` amplitude the
    grid's own weights are used; for a :class:`SeparableGaussian` a
    tensor-product Gauss-Legendre rule over +/- 8 widths is refined until the
    change is below ``atol`` (absolute, relative to the unit norm).
    """
    T = float(total_delay)
    if isinstance(psi, Tabulated):
        w = psi.weights
        omega = psi.frequencies
        phase = np.exp(1j * (omega[None, :] - omega[:, None]) * T)
        A = psi.amplitudes
        overlap = np.einsum("j,kj,jk,jk,k->", w, np.conj(A), A, phase, w)
        norm = psi.norm()
        return overlap / norm, {"order": omega.size, "error": 0.0}

    if not isinstance(psi, SeparableGaussian):
        raise DomainError(f"unsupported joint amplitude type {type(psi).__name__}")
    lo, hi = psi.support()
    (overlap, norm), err, order = adaptive_integrate_2d(
        _overlap_integrand(psi, T), (lo, hi, lo, hi), atol=atol, n_max=max_order
    )
    diagnostics = {"order": order, "error": err, "norm": norm.real}
    if err >= atol:
        raise NumericalError(
            f"quadrature did not reach {atol:g} at order {order} (|T| width = {abs(T) * psi.width:.3g})",
            diagnostics,
        )
    if abs(norm.real - 1.0) > NORM_TOL:
        raise DomainError(f"joint amplitude is not normalised (norm = {norm.real!r})")
    return overlap / norm.real, diagnostics


def coincidence_probability(psi, total_delay, *, atol=1e-8, max_order=1024):
    """Coincidence probability ``1/2 - 1/2 Re(overlap)`` at total delay ``T``."""
    overlap, diagnostics = exchange_overlap(psi, total_delay, atol=atol, max_order=max_order)
    # the overlap is real by exchange symmetry of the integrand; a residue means a bad rule
    if abs(overlap.imag) > 1e-9:
        raise NumericalError("imaginary residue in exchange overlap", {**diagnostics, "imag": overlap.imag})
    return 0.5 - 0.5 * overlap.real


def gaussian_dip(total_delay, width):
    """Closed-form dip ``1/2 (1 - exp(-width**2 T**2))`` for a separable Gaussian source."""
    if not width > 0:
        raise DomainError("spectral width must be positive")
    T = np.asarray(total_delay, dtype=float)
    return 0.5 * (1.0 - np.exp(-(width**2) * T**2))


def coincidence_probability_gaussian(stage_delay, rate, area, width, convention=PAPER_F):
    """Dip for a separable Gaussian source with the Sagnac delay of ``rate`` folded in."""
    return gaussian_dip(sagnac_delay(area, rate, convention) + np.asarray(stage_delay), width)


def beamsplitter_matrix(modes):
    """Single-photon transfer matrix on ``a_0..a_{M-1}, b_0..b_{M-1}``.

    Column ``p`` holds the image of ``e_p^dagger``:
    ``a^dagger -> (i a^dagger + b^dagger)/sqrt2``, ``b^dagger -> (a^dagger + i b^dagger)/sqrt2``.
    """
    r = 1.0 / np.sqrt(2.0)
    U = np.zeros((2 * modes, 2 * modes), dtype=complex)
    idx = np.arange(modes)
    U[idx, idx] = 1j * r
    U[modes + idx, idx] = r
    U[idx, modes + idx] = r
    U[modes + idx, modes + idx] = 1j * r
    return U


def coincidence_probability_discrete_oracle(psi, delays):
    """Brute-force coincidence probability in a finite set of frequency modes.

    Each grid bin becomes one mode per path. The two-photon state is held as a
    coefficient matrix ``S`` over single-photon modes (``sum S_pq e_p^+ e_q^+ |0>``),
    dressed with the flight-time phases, pushed through the beamsplitter as
    ``U S U^T``, and projected on one photon in each output port. ``delays`` is a
    :class:`PathDelays` or a bare total delay in seconds.
    """
    if not isinstance(psi, Tabulated):
        raise DomainError("the discrete oracle needs a Tabulated amplitude")
    M = psi.frequencies.size
    if M > ORACLE_MAX_BINS:
        raise ResourceError(f"{M} bins per axis exceeds the oracle limit of {ORACLE_MAX_BINS}")
    if not isinstance(delays, PathDelays):
        delays = PathDelays(t_plus=float(delays), t_minus=0.0)

    omega = psi.frequencies
    root_w = np.sqrt(psi.weights)
    coeff = psi.amplitudes * root_w[:, None] * root_w[None, :]
    coeff = coeff * np.exp(-1j * accumulated_phase(omega[:, None], omega[None, :], delays))

    S = np.zeros((2 * M, 2 * M), dtype=complex)
    S[:M, M:] = coeff
    U = beamsplitter_matrix(M)
    S_out = U @ S @ U.T
    S_sym = 0.5 * (S_out + S_out.T)

    norm = 2.0 * np.sum(np.abs(S_sym) ** 2)
    coincidences = 0.0
    for m in range(M):
        for n in range(M):
            amplitude = 2.0 * S_sym[m, M + n]
            coincidences += amplitude.real**2 + amplitude.imag**2
    return coincidences / norm
