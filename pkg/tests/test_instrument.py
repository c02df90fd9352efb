import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rotating_hom import instrument, physics
from rotating_hom.errors import DomainError
from rotating_hom.instrument import (
    ACW,
    CW,
    Apparatus,
    DetectorModel,
    RunPlan,
    SourceModel,
    expected_rates,
    run_dip_scan,
    run_rotation_protocol,
    sample_counts,
)

GEOMETRY = physics.PlatformGeometry(0.908, 35, 100.0)
QUIET = DetectorModel(dark_rate=0.0)


@pytest.fixture
def app():
    return Apparatus(GEOMETRY)


def pair_detect(source=SourceModel(), det=DetectorModel()):
    t1, t2 = source.arm_transmission
    e1, e2 = det.efficiency
    return source.pair_rate * t1 * t2 * e1 * e2


def test_expected_rates_perfect_dip_bottom():
    src = SourceModel(mode_overlap_visibility=1.0)
    rate, singles = expected_rates(0.0, src, QUIET)
    accidentals = singles[0] * singles[1] * QUIET.coincidence_window
    assert rate == pytest.approx(accidentals, rel=1e-15)
    assert singles == (5000.0, 5000.0)


def test_expected_rates_baseline():
    src = SourceModel(mode_overlap_visibility=1.0)
    rate, singles = expected_rates(0.5, src, QUIET)
    accidentals = singles[0] * singles[1] * QUIET.coincidence_window
    assert rate - accidentals == pytest.approx(0.5 * pair_detect(src, QUIET), rel=1e-15)
    assert 0.5 * pair_detect(src, QUIET) == pytest.approx(125.0)


def test_expected_rates_partial_visibility():
    src = SourceModel(mode_overlap_visibility=0.9)
    rate, singles = expected_rates(0.0, src, QUIET)
    accidentals = singles[0] * singles[1] * QUIET.coincidence_window
    # 90 % deep dip: a tenth of the baseline survives
    assert rate - accidentals == pytest.approx(0.05 * pair_detect(src, QUIET), rel=1e-12)


def test_model_validation():
    with pytest.raises(DomainError):
        SourceModel(arm_transmission=(0.1, 1.2))
    with pytest.raises(DomainError):
        SourceModel(mode_overlap_visibility=1.1)
    with pytest.raises(DomainError):
        DetectorModel(coincidence_window=0.0)
    with pytest.raises(DomainError):
        RunPlan(runs_per_setting=0)
    with pytest.raises(DomainError):
        RunPlan(dwell_time=0.0)


def test_sample_counts_zero_rate():
    rec = sample_counts((0.0, (0.0, 0.0)), 1.0, (9, 1), master_seed=3)
    assert rec.coincidences == 0 and rec.singles == (0, 0)


def test_sample_counts_deterministic():
    a = sample_counts((123.4, (1e3, 2e3)), 2.0, (2, 0, 1, 5), master_seed=11)
    b = sample_counts((123.4, (1e3, 2e3)), 2.0, (2, 0, 1, 5), master_seed=11)
    c = sample_counts((123.4, (1e3, 2e3)), 2.0, (2, 0, 1, 6), master_seed=11)
    assert a == b
    assert a != c


def test_sample_counts_poisson_tail():
    # P(|k - 1e4| > 5 sqrt(1e4)) ~ 6e-7 per draw; 2000 seeds should all land inside
    draws = np.array(
        [sample_counts((1e4, (0.0, 0.0)), 1.0, (7, i), master_seed=5).coincidences for i in range(2000)]
    )
    assert np.all(np.abs(draws - 1e4) <= 500)
    assert draws.mean() == pytest.approx(1e4, abs=5 * 100 / np.sqrt(2000))


def test_noiseless_sampling_stores_means():
    rec = sample_counts((12.5, (10.0, 20.0)), 2.0, (1,), noiseless=True)
    assert rec.coincidences == 25.0 and rec.singles == (20.0, 40.0)


def test_dip_scan_minimum_at_zero(app):
    plan = RunPlan(noiseless=True, scan_positions=tuple(np.linspace(-4e-6, 4e-6, 41)))
    recs = run_dip_scan(plan, app)
    counts = np.array([r.coincidences for r in recs])
    assert recs[int(np.argmin(counts))].stage_position == pytest.approx(0.0, abs=1e-15)
    assert np.allclose(counts, counts[::-1], rtol=1e-12)


def test_dip_scan_moves_with_rotation(app):
    shift = app.stage_shift(1.5)
    positions = np.linspace(-4e-6, 4e-6, 8001)
    plan = RunPlan(noiseless=True, scan_positions=tuple(positions))
    counts = np.array([r.coincidences for r in run_dip_scan(plan, app, rotation_rate=1.5)])
    assert positions[np.argmin(counts)] == pytest.approx(-shift, abs=1e-9)
    assert shift == pytest.approx(physics.dip_shift_stage(app.sagnac_delay(1.5), 1.45))


def test_visibility_sets_dip_depth():
    app = Apparatus(GEOMETRY, SourceModel(mode_overlap_visibility=0.8), QUIET)
    plan = RunPlan(noiseless=True, scan_positions=(-1e-5, 0.0, 1e-5))
    far, bottom, _ = (r.coincidences for r in run_dip_scan(plan, app))
    assert 1 - bottom / far == pytest.approx(0.8, abs=1e-3)  # accidentals dilute slightly


def test_even_systematic_identical_in_both_directions(app):
    plan = RunPlan(rotation_magnitudes=(0.5, 1.5), runs_per_setting=3, even_coefficient=2e-7, sagnac=False,
                   noiseless=True)
    recs = run_rotation_protocol(plan, app, -app.dip_width)
    cw = [r.coincidences for r in recs if r.direction == CW]
    acw = [r.coincidences for r in recs if r.direction == ACW]
    assert cw == acw


def test_even_systematic_noisy_directions_statistically_equal(app):
    plan = RunPlan(rotation_magnitudes=(2.0,), runs_per_setting=400, even_coefficient=1e-7, sagnac=False)
    recs = run_rotation_protocol(plan, app, -app.dip_width, master_seed=2)
    cw = np.array([r.coincidences for r in recs if r.direction == CW], dtype=float)
    acw = np.array([r.coincidences for r in recs if r.direction == ACW], dtype=float)
    se = np.sqrt(cw.var() / cw.size + acw.var() / acw.size)
    assert abs(cw.mean() - acw.mean()) < 5 * se


def test_static_rotation_gives_fixed_point_rate(app):
    x = -app.dip_width
    plan = RunPlan(rotation_magnitudes=(0.0,), runs_per_setting=2, noiseless=True)
    recs = run_rotation_protocol(plan, app, x)
    expected, _ = expected_rates(app.probability(x), app.source, app.detector)
    assert all(r.coincidences == pytest.approx(expected) for r in recs)


def test_sagnac_term_flips_sign(app):
    x = -app.dip_width
    plan = RunPlan(rotation_magnitudes=(1.0,), runs_per_setting=1, noiseless=True)
    cw, acw = run_rotation_protocol(plan, app, x)
    up, _ = expected_rates(app.probability(x + app.stage_shift(1.0)), app.source, app.detector)
    down, _ = expected_rates(app.probability(x - app.stage_shift(1.0)), app.source, app.detector)
    assert cw.coincidences == pytest.approx(up, rel=1e-12)
    assert acw.coincidences == pytest.approx(down, rel=1e-12)


def test_mean_count_convergence(app):
    x = -app.dip_width
    plan = RunPlan(rotation_magnitudes=(0.0, 1.0, 2.0), runs_per_setting=200)
    recs = run_rotation_protocol(plan, app, x, master_seed=8)
    for mag in plan.rotation_magnitudes:
        for direction, sign in ((CW, 1), (ACW, -1)):
            k = np.array([r.coincidences for r in recs if r.direction == direction and abs(r.rotation_rate) == mag])
            lam, _ = expected_rates(app.probability(x, sign * mag), app.source, app.detector)
            assert abs(k.mean() - lam) < 5 * np.sqrt(lam) / np.sqrt(k.size)


def test_records_independent_of_order(app):
    plan = RunPlan(rotation_magnitudes=(0.5, 1.0), runs_per_setting=4, drift_std=1e-9)
    a = run_rotation_protocol(plan, app, -app.dip_width, master_seed=42)
    reversed_plan = RunPlan(rotation_magnitudes=(0.5,), runs_per_setting=4, drift_std=1e-9)
    b = run_rotation_protocol(reversed_plan, app, -app.dip_width, master_seed=42)
    assert a[: len(b)] == b
    assert a == run_rotation_protocol(plan, app, -app.dip_width, master_seed=42)


def test_drift_is_common_to_cw_and_acw(app):
    plan = RunPlan(rotation_magnitudes=(1.0,), runs_per_setting=20, drift_std=5e-8, noiseless=False)
    offsets = instrument.drift_offsets(plan, 3, 0)
    assert offsets.shape == (20,) and np.all(np.diff(offsets) != 0)
    assert np.array_equal(offsets, instrument.drift_offsets(plan, 3, 0))
    assert not np.any(instrument.drift_offsets(RunPlan(drift_std=5e-8, noiseless=True), 3, 0))


@settings(max_examples=20, deadline=None)
@given(p=st.floats(0, 1), vis=st.floats(0, 1))
def test_effective_probability_bounded(p, vis):
    src = SourceModel(mode_overlap_visibility=vis)
    rate, singles = expected_rates(p, src, QUIET)
    assert 0.0 <= rate <= pair_detect(src, QUIET) + singles[0] * singles[1] * QUIET.coincidence_window + 1e-9


def test_classical_protocol_noiseless(app):
    plan = RunPlan(rotation_magnitudes=(1.0,), runs_per_setting=2, noiseless=True)
    recs = instrument.run_classical_protocol(plan, app, 642e-9, phase_noise=0.3, even_phase_coefficient=0.1)
    phi = physics.classical_phase_shift(app.sagnac_delay(1.0), 642e-9)
    assert [r.phase_shift for r in recs] == pytest.approx([phi + 0.1, -phi + 0.1] * 2)
