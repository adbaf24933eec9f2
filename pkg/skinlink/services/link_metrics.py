"""Closed-form link performance: spectral efficiency, capacity, outage, jitter tolerance."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List

from skinlink.exceptions import DomainError, JitterInfeasibleError
from skinlink.models.schemas import DetectionScheme, RxConfig, SubBandSpec, TxConfig
from skinlink.services.channel import BeamFootprint, MisalignmentParams, path_loss
from skinlink.services.noise_snr import responsivity, snr_gain
from skinlink.services.skin_attenuation import SkinAttenuationTable
from skinlink.services.specfun import DEFAULT_REL_TOL, LerchArgs, lerch_phi

logger = logging.getLogger(__name__)

LN2 = math.log(2.0)


@dataclass(frozen=True)
class CapacityEstimate:
    """Capacity in bits/s with its closed-form lower bound."""

    value: float
    lower_bound: float

    @property
    def vacuous(self) -> bool:
        return self.lower_bound <= 0


@dataclass(frozen=True)
class JitterSolution:
    h_value: float
    xi: float
    sigma_s: float


# --------------------------------------------------------------------------
# Spectral efficiency
# --------------------------------------------------------------------------


def big_b(
    resp: float,
    delta: float,
    alpha: float,
    tx: TxConfig,
    rx: RxConfig,
    scheme: DetectionScheme,
) -> float:
    """𝓑(λ) = ψR²e^{-αδ}P̃s/(2qRP_b + 2qI_DC + N0)."""
    return scheme.psi * snr_gain(resp, math.exp(-alpha * delta), tx, rx)


def _spectral_efficiency(z: float, xi: float, rel_tol: float) -> float:
    if z < 0:
        raise DomainError(f"A0²·B must be non-negative, got {z!r}.")
    if z == 0:
        return 0.0
    phi = lerch_phi(LerchArgs(a=-z, b=1.0, x=1.0 + xi / 2.0), rel_tol)
    return 0.5 * math.log2(1.0 + z) - z / (2.0 * LN2) * phi


def _se_lower_bound(z: float, xi: float) -> float:
    return 0.5 * math.log2(1.0 + z) - 1.0 / (xi * LN2)


def ergodic_spectral_efficiency(
    params: MisalignmentParams,
    b_lambda: float,
    rel_tol: float = DEFAULT_REL_TOL,
) -> float:
    """Ergodic spectral efficiency in bits/channel use.

    For IM/DD receivers the value is a lower bound on the true capacity.
    """
    return _spectral_efficiency(params.a0 * params.a0 * b_lambda, params.xi, rel_tol)


def ergodic_se_lower_bound(params: MisalignmentParams, b_lambda: float) -> float:
    """½log₂(1 + A0²𝓑) − 1/(ξ ln 2); may be negative."""
    if b_lambda < 0:
        raise DomainError(f"B(lambda) must be non-negative, got {b_lambda!r}.")
    return _se_lower_bound(params.a0 * params.a0 * b_lambda, params.xi)


def _z_from_average_snr(avg_snr: float, xi: float, scheme: DetectionScheme) -> float:
    if xi <= 0:
        raise DomainError(f"xi must be positive, got {xi!r}.")
    return scheme.psi * (xi + 2.0) / xi * avg_snr


def ergodic_se_from_average_snr(
    avg_snr: float,
    xi: float,
    scheme: DetectionScheme,
    rel_tol: float = DEFAULT_REL_TOL,
) -> float:
    """Spectral efficiency parameterised by the average SNR and ξ."""
    return _spectral_efficiency(_z_from_average_snr(avg_snr, xi, scheme), xi, rel_tol)


def ergodic_se_lower_bound_from_average_snr(avg_snr: float, xi: float, scheme: DetectionScheme) -> float:
    return _se_lower_bound(_z_from_average_snr(avg_snr, xi, scheme), xi)


# --------------------------------------------------------------------------
# Capacity
# --------------------------------------------------------------------------


def narrowband_capacity(
    bandwidth: float,
    params: MisalignmentParams,
    b_lambda: float,
    rel_tol: float = DEFAULT_REL_TOL,
) -> CapacityEstimate:
    """C_B = B·C for a band narrower than the channel coherence in λ."""
    return CapacityEstimate(
        value=bandwidth * ergodic_spectral_efficiency(params, b_lambda, rel_tol),
        lower_bound=bandwidth * ergodic_se_lower_bound(params, b_lambda),
    )


def capacity(
    subbands: SubBandSpec,
    params: MisalignmentParams,
    table: SkinAttenuationTable,
    delta: float,
    tx: TxConfig,
    rx: RxConfig,
    rel_tol: float = DEFAULT_REL_TOL,
) -> CapacityEstimate:
    """Σ Δf·C(λᵢ) over sub-bands, with the matching Σ Δf·C_lb(λᵢ) bound.

    The signal PSD of ``tx`` applies in every sub-band.
    """
    values: List[float] = []
    bounds: List[float] = []
    for band in subbands.bands:
        resp = responsivity(rx.eta, band.wavelength)
        h_l = path_loss(table, band.wavelength, delta)
        b_lambda = rx.scheme.psi * snr_gain(resp, h_l * h_l, tx, rx)
        values.append(band.width * ergodic_spectral_efficiency(params, b_lambda, rel_tol))
        bounds.append(band.width * ergodic_se_lower_bound(params, b_lambda))
    return CapacityEstimate(value=math.fsum(values), lower_bound=math.fsum(bounds))


# --------------------------------------------------------------------------
# Outage
# --------------------------------------------------------------------------


def gamma_threshold(rate_threshold: float, scheme: DetectionScheme) -> float:
    """γ_th = (2^{2r_th} − 1)/ψ."""
    if rate_threshold < 0:
        raise DomainError(f"Rate threshold must be non-negative, got {rate_threshold!r}.")
    return math.expm1(2.0 * rate_threshold * LN2) / scheme.psi


def outage_h(gamma_th: float, a0: float, gain: float) -> float:
    """𝓗 = γ_th/(G·A0²), the threshold relative to the peak SNR."""
    peak = gain * a0 * a0
    if peak <= 0:
        return math.inf
    return gamma_th / peak


def outage_from_h(h_value: float, xi: float) -> float:
    if h_value > 1:
        return 1.0
    return h_value ** (xi / 2.0)


def outage_probability(
    params: MisalignmentParams,
    resp: float,
    h_l_sq: float,
    tx: TxConfig,
    rx: RxConfig,
    gamma_th: float,
) -> float:
    """P(γ ≤ γ_th); exactly 1 once γ_th exceeds the peak SNR."""
    if gamma_th < 0:
        raise DomainError(f"SNR threshold must be non-negative, got {gamma_th!r}.")
    gain = snr_gain(resp, h_l_sq, tx, rx)
    return outage_from_h(outage_h(gamma_th, params.a0, gain), params.xi)


def outage_probability_normalized(xi: float, normalized_snr: float) -> float:
    """Outage as a function of ξ and γ̄/γ_th (both linear)."""
    if xi <= 0:
        raise DomainError(f"xi must be positive, got {xi!r}.")
    if normalized_snr <= 0:
        raise DomainError(f"Normalized SNR must be positive, got {normalized_snr!r}.")
    base = xi / (xi + 2.0) / normalized_snr
    return outage_from_h(base, xi)


# --------------------------------------------------------------------------
# Jitter tolerance
# --------------------------------------------------------------------------


def solve_jitter(
    target_outage: float,
    gamma_th: float,
    beam: BeamFootprint,
    resp: float,
    h_l_sq: float,
    tx: TxConfig,
    rx: RxConfig,
) -> JitterSolution:
    """Largest σ_s whose outage at γ_th equals ``target_outage``."""
    if not 0 < target_outage < 1:
        raise DomainError(f"Target outage must lie in (0, 1), got {target_outage!r}.")
    if gamma_th <= 0:
        raise DomainError(f"SNR threshold must be positive, got {gamma_th!r}.")
    h_value = outage_h(gamma_th, beam.a0, snr_gain(resp, h_l_sq, tx, rx))
    if h_value >= 1:
        raise JitterInfeasibleError(h_value, 1.0)
    log_h = math.log(h_value)
    log_po = math.log(target_outage)
    sigma_sq = beam.w_eq_sq * log_h / (8.0 * log_po)
    return JitterSolution(h_value=h_value, xi=2.0 * log_po / log_h, sigma_s=math.sqrt(sigma_sq))


def jitter_tolerance(
    target_outage: float,
    gamma_th: float,
    beam: BeamFootprint,
    resp: float,
    h_l_sq: float,
    tx: TxConfig,
    rx: RxConfig,
) -> float:
    """σ_s² = w_eq² ln𝓗 / (8 ln P_o), in metres."""
    return solve_jitter(target_outage, gamma_th, beam, resp, h_l_sq, tx, rx).sigma_s


def capacity_at_target_outage(
    target_outage: float,
    gamma_th: float,
    beam: BeamFootprint,
    resp: float,
    h_l_sq: float,
    tx: TxConfig,
    rx: RxConfig,
    rel_tol: float = DEFAULT_REL_TOL,
) -> CapacityEstimate:
    """Narrow-band capacity when ξ is set by the target outage at γ_th."""
    solution = solve_jitter(target_outage, gamma_th, beam, resp, h_l_sq, tx, rx)
    b_lambda = rx.scheme.psi * snr_gain(resp, h_l_sq, tx, rx)
    z = beam.a0 * beam.a0 * b_lambda
    value = tx.bandwidth * _spectral_efficiency(z, solution.xi, rel_tol)
    penalty = math.log(solution.h_value) / (2.0 * LN2 * math.log(target_outage))
    lower_bound = tx.bandwidth * (0.5 * math.log2(1.0 + z) - penalty)
    return CapacityEstimate(value=value, lower_bound=lower_bound)
