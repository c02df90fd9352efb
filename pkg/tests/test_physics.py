import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from rotating_hom import physics
from rotating_hom.errors import DomainError, NumericalError, ResourceError
from rotating_hom.physics import (
    PAPER_F,
    PHYSICAL_HZ,
    SPEED_OF_LIGHT,
    PathDelays,
    PlatformGeometry,
    RotationRate,
    SeparableGaussian,
    Tabulated,
)

OMEGA_710 = 2 * np.pi * SPEED_OF_LIGHT / 710e-9
SIGMA = 1.5e14


@pytest.fixture(scope="module")
def gauss():
    return SeparableGaussian(OMEGA_710, SIGMA)


def overlap_by_quadpack(g, T):
    """Independent oracle: for psi = g(w1) g(w2) the overlap is |FT of |g|^2 at T|^2."""
    lo, hi = g.center - 12 * g.width, g.center + 12 * g.width
    re = integrate.quad(lambda w: g.marginal(w) ** 2 * np.cos((w - g.center) * T), lo, hi, limit=400)[0]
    im = integrate.quad(lambda w: g.marginal(w) ** 2 * np.sin((w - g.center) * T), lo, hi, limit=400)[0]
    return re**2 + im**2


# --- geometry and delays ------------------------------------------------------


def test_enclosed_area_lab():
    assert physics.enclosed_area(35, 0.908) == pytest.approx(22.6636, abs=1e-4)
    assert abs(physics.enclosed_area(35, 0.908) - 22.7) < 0.05


def test_enclosed_area_trivial_cases():
    assert physics.enclosed_area(1, 2.0) == pytest.approx(np.pi)
    assert physics.enclosed_area(0, 0.5) == 0.0
    with pytest.raises(DomainError):
        physics.enclosed_area(3, 0.0)


def test_geometry_validation_and_from_area():
    geo = PlatformGeometry.from_area(22.7, turns=35, fiber_length=100.0)
    assert geo.enclosed_area == pytest.approx(22.7, rel=1e-14)
    with pytest.raises(DomainError):
        PlatformGeometry(0.9, 35, 100.0, group_index=0.9)
    with pytest.raises(DomainError):
        PlatformGeometry(0.9, 35, -1.0)
    with pytest.raises(DomainError):
        PlatformGeometry(0.9, 2.5, 100.0)


def test_sagnac_delay_both_conventions():
    # 4 A / c^2 and 8 pi A / c^2 for A = 22.7 m^2, rate 1
    assert physics.sagnac_delay(22.7, 1.0, PHYSICAL_HZ) == pytest.approx(6.3478157e-15, abs=1e-21)
    assert physics.sagnac_delay(22.7, 1.0, PAPER_F) == pytest.approx(1.01028625e-15, abs=1e-22)
    assert physics.sagnac_delay(22.7, RotationRate(1.0, PHYSICAL_HZ)) == physics.sagnac_delay(
        22.7, 1.0, PHYSICAL_HZ
    )
    assert physics.sagnac_delay(10.0, 0.0) == 0.0


@given(
    area=st.floats(0, 1e3).filter(lambda a: a == 0 or a > 1e-100),
    rate=st.floats(-100, 100).filter(lambda r: r == 0 or abs(r) > 1e-100),
    conv=st.sampled_from([PAPER_F, PHYSICAL_HZ]),
)
def test_sagnac_delay_linear_and_antisymmetric(area, rate, conv):
    dt = physics.sagnac_delay(area, rate, conv)
    assert physics.sagnac_delay(area, -rate, conv) == -dt
    assert physics.sagnac_delay(2 * area, rate, conv) == pytest.approx(2 * dt, rel=1e-15, abs=0)
    r = RotationRate(rate, conv)
    assert np.sign(r.angular_rate) == np.sign(rate)


def test_rotation_rate_rejects_unknown_convention():
    with pytest.raises(DomainError):
        RotationRate(1.0, "rpm")


def test_classical_phase_shift_lab():
    dphi = physics.classical_phase_shift(physics.sagnac_delay(22.7, 1.0), 642e-9)
    # 8 pi A / (lambda c) evaluated independently
    assert dphi == pytest.approx(8 * np.pi * 22.7 / (642e-9 * SPEED_OF_LIGHT), rel=1e-14)
    assert dphi == pytest.approx(2.96422, abs=1e-5)
    assert np.degrees(dphi) == pytest.approx(169.84, abs=0.01)
    assert round(np.degrees(dphi)) == 170
    assert physics.classical_phase_shift(0.0, 642e-9) == 0.0
    assert physics.classical_phase_shift(2e-15, 642e-9) == pytest.approx(2 * physics.classical_phase_shift(1e-15, 642e-9))
    with pytest.raises(DomainError):
        physics.classical_phase_shift(1e-15, 0.0)


def test_flight_times():
    geo = PlatformGeometry(0.908, 35, 100.0, group_index=1.45)
    at_rest = physics.flight_times(geo, 0.0)
    assert at_rest.t_plus == at_rest.t_minus
    assert at_rest.t_plus == pytest.approx(100 * 1.45 / SPEED_OF_LIGHT, rel=1e-15)
    assert at_rest.t_plus == pytest.approx(4.8367e-7, abs=1e-11)

    quoted = PlatformGeometry.from_area(22.7, 35, 100.0)
    spinning = physics.flight_times(quoted, 1.0, stage_delay=3e-15)
    assert spinning.sagnac_delta == pytest.approx(1.01028625e-15, rel=1e-6)
    assert spinning.stage_delay == 3e-15
    back = physics.flight_times(quoted, -1.0)
    assert back.sagnac_delta == pytest.approx(-spinning.sagnac_delta, rel=1e-6)


def test_accumulated_phase_cases():
    d = PathDelays(t_plus=2e-9, t_minus=1e-9, stage_delay=5e-12)
    assert physics.accumulated_phase(3.0, 0.0, d) == pytest.approx(3.0 * (2e-9 + 5e-12))
    assert physics.accumulated_phase(3.0, 4.0, PathDelays(0.0, 0.0)) == 0.0
    T = 7e-9
    assert physics.accumulated_phase(3.0, 4.0, PathDelays(T, T)) == pytest.approx(7.0 * T)


def test_dip_shift_stage():
    dt = physics.sagnac_delay(22.7, 1.0)
    assert physics.dip_shift_stage(dt, 1.45) == pytest.approx(208.88e-9, abs=0.01e-9)
    assert physics.dip_shift_stage(dt, 1.0) == pytest.approx(SPEED_OF_LIGHT * dt)
    # stage slope over phase slope, times n_g, is lambda / 2 pi
    dphi = physics.classical_phase_shift(dt, 642e-9)
    ratio = physics.dip_shift_stage(dt, 1.45) / dphi * 1.45
    assert ratio == pytest.approx(642e-9 / (2 * np.pi), rel=1e-14)
    with pytest.raises(DomainError):
        physics.dip_shift_stage(dt, 0.5)


# --- joint spectral amplitudes ---------------------------------------------------


def test_separable_gaussian_requires_narrowband():
    with pytest.raises(DomainError):
        SeparableGaussian(9.0, 1.0)
    with pytest.raises(DomainError):
        SeparableGaussian(10.0, 0.0)
    SeparableGaussian(10.0, 1.0)


def test_tabulated_normalisation_enforced():
    grid = np.array([1.0, 2.0])
    with pytest.raises(DomainError):
        Tabulated(grid, np.ones((2, 2)))
    with pytest.raises(DomainError):
        Tabulated(grid, np.ones((3, 3)))
    tab = Tabulated(grid, np.full((2, 2), 0.5))
    assert tab.norm() == pytest.approx(1.0)


@settings(max_examples=30, deadline=None)
@given(
    seed=st.integers(0, 2**32 - 1),
    n=st.integers(2, 12),
)
def test_tabulated_from_function_is_normalised(seed, n):
    rng = np.random.default_rng(seed)
    grid = np.sort(rng.uniform(1, 10, n)) + np.arange(n)
    amps = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    tab = Tabulated.from_function(lambda a, b: amps, grid)
    assert abs(tab.norm() - 1.0) <= 1e-9


# --- coincidence probability ------------------------------------------------------


@pytest.mark.parametrize("sigma_t", [0.0, 0.3, 1.0, 1.7, 2.5, 4.0, 5.0])
def test_quadrature_matches_independent_gaussian_oracle(gauss, sigma_t):
    T = sigma_t / gauss.width
    expected = 0.5 - 0.5 * overlap_by_quadpack(gauss, T)
    assert expected == pytest.approx(0.5 * (1 - np.exp(-(sigma_t**2))), abs=1e-12)
    p = physics.coincidence_probability(gauss, T)
    assert p == pytest.approx(expected, abs=1e-10)


def test_quadrature_zero_delay_is_perfect_bunching(gauss):
    assert physics.coincidence_probability(gauss, 0.0) == pytest.approx(0.0, abs=1e-12)


def test_distinguishable_limit(gauss):
    for s in (8.0, 9.0, 12.0):
        assert abs(physics.coincidence_probability(gauss, s / gauss.width) - 0.5) < 1e-9


def test_quadrature_reports_non_convergence(gauss):
    with pytest.raises(NumericalError) as info:
        physics.coincidence_probability(gauss, 400 / gauss.width, max_order=128)
    assert "order" in info.value.diagnostics


def test_antisymmetric_pair_antibunches(gauss):
    anti = physics.two_color_pair(OMEGA_710 - 3 * SIGMA, OMEGA_710 + 3 * SIGMA, SIGMA, antisymmetric=True)
    assert physics.coincidence_probability(anti, 0.0) == pytest.approx(1.0, abs=1e-9)
    sym = physics.two_color_pair(OMEGA_710 - 3 * SIGMA, OMEGA_710 + 3 * SIGMA, SIGMA)
    assert physics.coincidence_probability(sym, 0.0) == pytest.approx(0.0, abs=1e-9)


def test_closed_form_cases():
    area, sigma = 22.7, SIGMA
    dt = physics.sagnac_delay(area, 1.3)
    assert physics.coincidence_probability_gaussian(-dt, 1.3, area, sigma) == 0.0
    assert physics.coincidence_probability_gaussian(1.0, 1.3, area, sigma) == 0.5
    with pytest.raises(DomainError):
        physics.coincidence_probability_gaussian(0.0, 1.0, area, 0.0)


@pytest.mark.parametrize("sigma_t", np.linspace(0.25, 5.0, 8))
def test_closed_form_matches_quadrature(gauss, sigma_t):
    T = sigma_t / gauss.width
    closed = physics.gaussian_dip(T, gauss.width)
    assert physics.coincidence_probability(gauss, T) == pytest.approx(closed, rel=1e-6)


@settings(max_examples=40, deadline=None)
@given(sigma_t=st.floats(-6, 6))
def test_dip_bounds_and_symmetry(gauss, sigma_t):
    T = sigma_t / gauss.width
    p = physics.coincidence_probability(gauss, T)
    assert -1e-12 <= p <= 0.5 + 1e-12
    assert physics.coincidence_probability(gauss, -T) == pytest.approx(p, abs=1e-10)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), T=st.floats(-3, 3))
def test_random_amplitude_probability_in_unit_interval(seed, T):
    rng = np.random.default_rng(seed)
    n = 8
    grid = np.linspace(10.0, 17.0, n)
    amps = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    tab = Tabulated.from_function(lambda a, b: amps, grid)
    p = physics.coincidence_probability(tab, T)
    assert -1e-12 <= p <= 1 + 1e-12
    assert physics.coincidence_probability_discrete_oracle(tab, T) == pytest.approx(p, abs=1e-12)


# --- discrete mode oracle -----------------------------------------------------------


def test_oracle_two_bins_by_hand():
    grid = np.array([1.0, 2.0])
    equal = Tabulated(grid, np.full((2, 2), 0.5), weights=np.ones(2))
    assert physics.coincidence_probability_discrete_oracle(equal, 0.0) == pytest.approx(0.0, abs=1e-15)
    r = 1 / np.sqrt(2)
    anti = Tabulated(grid, np.array([[0, r], [-r, 0]]), weights=np.ones(2))
    assert physics.coincidence_probability_discrete_oracle(anti, 0.0) == pytest.approx(1.0, abs=1e-15)


def test_oracle_two_bins_with_delay():
    # psi = (|1,2> + |2,1>)/sqrt2 gives p = (1 - cos(dw T))/2 by hand
    r = 1 / np.sqrt(2)
    tab = Tabulated(np.array([1.0, 3.0]), np.array([[0, r], [r, 0]]), weights=np.ones(2))
    for T in (0.3, 1.1, np.pi / 2):
        expected = 0.5 * (1 - np.cos(2.0 * T))
        assert physics.coincidence_probability_discrete_oracle(tab, T) == pytest.approx(expected, abs=1e-14)
        assert physics.coincidence_probability(tab, T) == pytest.approx(expected, abs=1e-14)


def test_oracle_matches_quadrature_on_tabulated(gauss):
    tab = gauss.tabulate(96)
    for s in (0.0, 0.7, 2.0, 4.5):
        T = s / gauss.width
        assert physics.coincidence_probability_discrete_oracle(tab, T) == pytest.approx(
            physics.coincidence_probability(tab, T), rel=1e-6, abs=1e-12
        )


def test_oracle_uses_full_path_delays(gauss):
    tab = gauss.tabulate(64)
    T = 0.8 / gauss.width
    split = PathDelays(t_plus=4.8e-10 + 0.5 * T, t_minus=4.8e-10 - 0.5 * T)
    assert physics.coincidence_probability_discrete_oracle(tab, split) == pytest.approx(
        physics.gaussian_dip(T, gauss.width), rel=1e-6
    )


def test_oracle_grid_limit(gauss):
    with pytest.raises(ResourceError):
        physics.coincidence_probability_discrete_oracle(gauss.tabulate(129), 0.0)
    with pytest.raises(DomainError):
        physics.coincidence_probability_discrete_oracle(gauss, 0.0)


def test_beamsplitter_matrix_is_unitary():
    U = physics.beamsplitter_matrix(5)
    assert np.allclose(U.conj().T @ U, np.eye(10), atol=1e-15)
