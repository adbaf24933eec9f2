import math

import numpy as np
import pytest
from scipy import integrate

from skinlink.exceptions import DomainError, JitterInfeasibleError
from skinlink.models import DetectionScheme, LinkGeometry, RunConfig, RxConfig, SubBand, SubBandSpec, TxConfig
from skinlink.services import link_metrics
from skinlink.services.channel import derive_beam, derive_misalignment, path_loss
from skinlink.services.link_metrics import (
    big_b,
    capacity,
    capacity_at_target_outage,
    ergodic_se_from_average_snr,
    ergodic_se_lower_bound,
    ergodic_spectral_efficiency,
    gamma_threshold,
    jitter_tolerance,
    narrowband_capacity,
    outage_probability,
    outage_probability_normalized,
    solve_jitter,
)
from skinlink.services.noise_snr import average_snr, peak_snr, responsivity, snr_gain

XI_GRID = [0.1, 0.5, 1.0, 2.0, 10.0]
Z_GRID = [1.0, 1e2, 1e4, 1e6, 1e8]
N0 = (1.3e-12) ** 2


def geometry(sigma_s=0.5e-3) -> LinkGeometry:
    return LinkGeometry(delta=4e-3, theta=math.radians(20.0), aperture_area=1e-6, sigma_s=sigma_s)


def tx(psd: float = 1e-14) -> TxConfig:
    return TxConfig(wavelength=1100e-9, bandwidth=10e6, signal_psd=psd)


def rx(scheme: DetectionScheme = DetectionScheme.HETERODYNE) -> RxConfig:
    return RxConfig(eta=0.8, dark_current=0.05e-9, noise_psd=N0, scheme=scheme)


def se_quadrature(z: float, xi: float, psi_scaled: float = 1.0) -> float:
    """½∫ log₂(1 + z u²) ξ u^(ξ-1) du over the normalised gain u = h_p/A0."""
    z = z * psi_scaled
    cut = min(1.0, 1.0 / math.sqrt(z))
    head, _ = integrate.quad(
        lambda u: 0.5 * math.log2(1.0 + z * u * u) * xi,
        0.0,
        cut,
        weight="alg",
        wvar=(xi - 1.0, 0.0),
        epsabs=0.0,
        epsrel=1e-12,
        limit=200,
    )
    # log variable u = e^s keeps the tail smooth across decades
    tail, _ = integrate.quad(
        lambda s: 0.5 * math.log2(1.0 + z * math.exp(2 * s)) * xi * math.exp(xi * s),
        math.log(cut),
        0.0,
        epsabs=0.0,
        epsrel=1e-12,
        limit=200,
    )
    return head + tail


def params_with(xi: float):
    return derive_misalignment(geometry()).with_xi(xi)


# ---------------------------------------------------------------- big_b


def test_big_b_matches_peak_snr(flat_table):
    resp = responsivity(0.8, 1100e-9)
    alpha = 200.0
    params = derive_misalignment(geometry())
    b = big_b(resp, 4e-3, alpha, tx(), rx(), DetectionScheme.HETERODYNE)
    h_l = path_loss(flat_table, 1100e-9, 4e-3)
    gain = snr_gain(resp, h_l * h_l, tx(), rx())
    assert b * params.a0**2 == pytest.approx(peak_snr(params, gain), rel=1e-14)
    im_dd = big_b(resp, 4e-3, alpha, tx(), rx(), DetectionScheme.IM_DD)
    assert im_dd == pytest.approx(b * math.e / (2 * math.pi), rel=1e-15)
    assert big_b(resp, 4e-3, alpha, tx(0.0), rx(), DetectionScheme.HETERODYNE) == 0.0


# ---------------------------------------------------------------- spectral efficiency


def test_zero_snr_gives_zero_efficiency():
    assert ergodic_spectral_efficiency(params_with(1.0), 0.0) == 0.0


@pytest.mark.parametrize("scheme", list(DetectionScheme))
@pytest.mark.parametrize("xi", XI_GRID)
@pytest.mark.parametrize("z", Z_GRID)
def test_efficiency_matches_gain_space_quadrature(scheme, xi, z):
    params = params_with(xi)
    gain = z / params.a0**2
    b = scheme.psi * gain
    expected = se_quadrature(z, xi, psi_scaled=scheme.psi)
    assert ergodic_spectral_efficiency(params, b) == pytest.approx(expected, rel=1e-7)


@pytest.mark.parametrize("scheme", list(DetectionScheme))
@pytest.mark.parametrize("xi", XI_GRID)
@pytest.mark.parametrize("z", Z_GRID)
def test_average_snr_parameterisation_agrees(scheme, xi, z):
    params = params_with(xi)
    gain = z / params.a0**2
    avg = gain * xi * params.a0**2 / (xi + 2)
    direct = ergodic_spectral_efficiency(params, scheme.psi * gain)
    assert ergodic_se_from_average_snr(avg, xi, scheme) == pytest.approx(direct, rel=1e-10)
    assert link_metrics.ergodic_se_lower_bound_from_average_snr(avg, xi, scheme) == pytest.approx(
        ergodic_se_lower_bound(params, scheme.psi * gain), rel=1e-10, abs=1e-12
    )


@pytest.mark.parametrize("xi", np.geomspace(0.1, 10.0, 7))
@pytest.mark.parametrize("z", np.geomspace(1.0, 1e8, 9))
def test_lower_bound_strictly_below(xi, z):
    params = params_with(float(xi))
    b = float(z) / params.a0**2
    exact = ergodic_spectral_efficiency(params, b)
    bound = ergodic_se_lower_bound(params, b)
    assert bound < exact
    if xi >= 2 and z >= 1e4:
        assert (exact - bound) / exact < 0.05


def test_lower_bound_gap_shrinks_with_snr():
    params = params_with(2.0)
    gaps = []
    for z in (1e1, 1e2, 1e3, 1e4, 1e6):
        b = z / params.a0**2
        gaps.append(ergodic_spectral_efficiency(params, b) - ergodic_se_lower_bound(params, b))
    assert all(later < earlier for earlier, later in zip(gaps, gaps[1:]))


def test_lower_bound_penalty_vanishes_for_large_xi():
    params = params_with(1e12)
    b = 1e3 / params.a0**2
    assert ergodic_se_lower_bound(params, b) == pytest.approx(0.5 * math.log2(1 + 1e3), rel=1e-10)


def test_vacuous_bound_is_reported_verbatim():
    params = params_with(0.1)
    assert ergodic_se_lower_bound(params, 1.0 / params.a0**2) < 0


# ---------------------------------------------------------------- capacity


def test_narrowband_capacity_is_bandwidth_times_efficiency():
    params = params_with(1.0)
    b = 1e6
    result = narrowband_capacity(10e6, params, b)
    assert result.value == 10e6 * ergodic_spectral_efficiency(params, b)
    assert result.lower_bound == 10e6 * ergodic_se_lower_bound(params, b)


def test_capacity_additive_over_identical_subbands(default_table):
    params = derive_misalignment(geometry())
    single = capacity(SubBandSpec.narrowband(10e6, 1100e-9), params, default_table, 4e-3, tx(), rx())
    split = capacity(
        SubBandSpec(bands=[SubBand(wavelength=1100e-9, width=5e6), SubBand(wavelength=1100e-9, width=5e6)]),
        params,
        default_table,
        4e-3,
        tx(),
        rx(),
    )
    assert split.value == pytest.approx(single.value, rel=1e-14)
    assert split.lower_bound == pytest.approx(single.lower_bound, rel=1e-14)


def test_band_partitioned_capacity_sums_each_band(default_table):
    params = derive_misalignment(geometry())
    bands = [SubBand(wavelength=w, width=2e6) for w in (1000e-9, 1100e-9, 1200e-9)]
    total = capacity(SubBandSpec(bands=bands), params, default_table, 4e-3, tx(), rx())
    parts = [capacity(SubBandSpec(bands=[band]), params, default_table, 4e-3, tx(), rx()) for band in bands]
    assert total.value == pytest.approx(sum(p.value for p in parts), rel=1e-14)
    assert total.lower_bound < total.value


def test_baseline_capacity_order_of_magnitude(service, baseline):
    report = service.evaluate(baseline)
    assert 100e6 <= report.capacity_bps <= 150e6
    assert report.capacity_lower_bound_bps < report.capacity_bps


# ---------------------------------------------------------------- outage


def test_gamma_threshold():
    assert gamma_threshold(0.0, DetectionScheme.HETERODYNE) == 0.0
    assert gamma_threshold(1.0, DetectionScheme.HETERODYNE) == pytest.approx(3.0, rel=1e-15)
    assert gamma_threshold(1.0, DetectionScheme.IM_DD) == pytest.approx(3 * 2 * math.pi / math.e, rel=1e-12)
    with pytest.raises(DomainError):
        gamma_threshold(-1.0, DetectionScheme.HETERODYNE)


def test_normalized_outage_reference_value():
    assert outage_probability_normalized(1.0, 10.0) == pytest.approx(math.sqrt(0.1 / 3.0), rel=1e-15)
    assert outage_probability_normalized(1.0, 10.0) == pytest.approx(0.1826, abs=1e-4)


@pytest.mark.parametrize("snr_db, reduction, tolerance", [(10.0, 0.76, 0.01), (50.0, 0.995, 0.002)])
def test_outage_improvement_from_better_alignment(snr_db, reduction, tolerance):
    normalized = 10 ** (snr_db / 10)
    loose = outage_probability_normalized(0.1, normalized)
    tight = outage_probability_normalized(1.0, normalized)
    assert 1 - tight / loose == pytest.approx(reduction, abs=tolerance)


def test_outage_parameterisations_agree():
    resp = responsivity(0.8, 1100e-9)
    for xi in XI_GRID:
        params = params_with(xi)
        avg = average_snr(params, resp, 0.6, tx(), rx())
        for gamma_th in np.geomspace(avg * 1e-6, avg * 1.2, 15):
            direct = outage_probability(params, resp, 0.6, tx(), rx(), float(gamma_th))
            normalized = outage_probability_normalized(xi, avg / gamma_th)
            assert direct == pytest.approx(normalized, rel=1e-12)


def test_outage_saturates_above_peak_and_is_continuous():
    resp = responsivity(0.8, 1100e-9)
    params = params_with(1.0)
    peak = peak_snr(params, snr_gain(resp, 0.6, tx(), rx()))
    assert outage_probability(params, resp, 0.6, tx(), rx(), peak * 1.5) == 1.0
    assert outage_probability(params, resp, 0.6, tx(), rx(), peak) == pytest.approx(1.0, rel=1e-15)
    assert outage_probability(params, resp, 0.6, tx(), rx(), peak * (1 - 1e-12)) == pytest.approx(1.0, abs=1e-11)
    assert outage_probability(params, resp, 0.6, tx(), rx(), 0.0) == 0.0

    thresholds = np.geomspace(peak * 1e-8, peak * 10, 40)
    values = [outage_probability(params, resp, 0.6, tx(), rx(), float(t)) for t in thresholds]
    assert all(0.0 <= v <= 1.0 for v in values)
    assert all(b >= a for a, b in zip(values, values[1:]))


def test_outage_rejects_negative_threshold():
    with pytest.raises(DomainError):
        outage_probability(params_with(1.0), 0.7, 0.6, tx(), rx(), -1.0)


# ---------------------------------------------------------------- jitter tolerance


def _link():
    beam = derive_beam(geometry(sigma_s=None))
    resp = responsivity(0.8, 1100e-9)
    return beam, resp, 0.6


@pytest.mark.parametrize("target", np.geomspace(1e-6, 0.5, 20))
def test_jitter_round_trip(target):
    beam, resp, h_l_sq = _link()
    sigma = jitter_tolerance(float(target), 3.0, beam, resp, h_l_sq, tx(), rx())
    params = derive_misalignment(geometry(sigma_s=sigma))
    outage = outage_probability(params, resp, h_l_sq, tx(), rx(), 3.0)
    assert outage == pytest.approx(float(target), rel=1e-9)


def test_jitter_equals_quarter_root_two_beam_when_target_is_h():
    beam, resp, h_l_sq = _link()
    gamma_th = 3.0
    h_value = link_metrics.outage_h(gamma_th, beam.a0, snr_gain(resp, h_l_sq, tx(), rx()))
    sigma = jitter_tolerance(h_value, gamma_th, beam, resp, h_l_sq, tx(), rx())
    assert sigma == pytest.approx(beam.w_eq / (2 * math.sqrt(2)), rel=1e-12)


def test_stricter_target_tolerates_less_jitter():
    beam, resp, h_l_sq = _link()
    sigmas = [jitter_tolerance(t, 3.0, beam, resp, h_l_sq, tx(), rx()) for t in (1e-1, 1e-3, 1e-5)]
    assert sigmas[0] > sigmas[1] > sigmas[2]


@pytest.mark.parametrize("target", [1e-1, 1e-3, 1e-6])
def test_capacity_at_target_outage_consistent_with_capacity(target):
    beam, resp, h_l_sq = _link()
    sigma = jitter_tolerance(target, 3.0, beam, resp, h_l_sq, tx(), rx())
    params = derive_misalignment(geometry(sigma_s=sigma))
    b = snr_gain(resp, h_l_sq, tx(), rx())
    expected = narrowband_capacity(tx().bandwidth, params, b)
    result = capacity_at_target_outage(target, 3.0, beam, resp, h_l_sq, tx(), rx())
    assert result.value == pytest.approx(expected.value, rel=1e-9)
    assert result.lower_bound == pytest.approx(expected.lower_bound, rel=1e-9)
    assert result.lower_bound < result.value


def test_tighter_target_needs_steadier_beam_and_raises_capacity():
    # a stricter outage target forces a larger xi, so less of the fading penalty remains
    beam, resp, h_l_sq = _link()
    values = [capacity_at_target_outage(t, 3.0, beam, resp, h_l_sq, tx(), rx()).value for t in (1e-1, 1e-3, 1e-5)]
    assert values[0] < values[1] < values[2]


def test_unreachable_threshold_is_infeasible():
    beam, resp, h_l_sq = _link()
    peak = snr_gain(resp, h_l_sq, tx(), rx()) * beam.a0**2
    with pytest.raises(JitterInfeasibleError) as excinfo:
        solve_jitter(0.01, peak * 2, beam, resp, h_l_sq, tx(), rx())
    assert excinfo.value.h_value == pytest.approx(2.0)
    assert excinfo.value.best_case_outage == 1.0


@pytest.mark.parametrize("target", [0.0, 1.0, -0.5, 1.5])
def test_target_outage_domain(target):
    beam, resp, h_l_sq = _link()
    with pytest.raises(DomainError):
        jitter_tolerance(target, 3.0, beam, resp, h_l_sq, tx(), rx())


@pytest.mark.parametrize("sigma_s", ["0.005mm", "0.001mm"])
def test_small_jitter_keeps_efficiency_below_jitter_free_value(service, sigma_s):
    report = service.evaluate(RunConfig(sigma_s=sigma_s))
    ceiling = 0.5 * math.log2(1.0 + report.peak_snr)
    assert report.xi > 1e3
    assert report.spectral_efficiency_lower_bound <= report.spectral_efficiency < ceiling
    gap = ceiling - report.spectral_efficiency
    assert gap == pytest.approx(1.0 / (2.0 * math.log(2.0) * (1.0 + report.xi / 2.0)), rel=1e-3)
