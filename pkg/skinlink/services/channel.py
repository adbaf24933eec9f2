"""Misalignment geometry, skin path loss and the law of the misalignment gain h_p.

The collected-power fraction is modelled as h_p = A0·exp(-2r²/w_eq²) with a
Rayleigh radial displacement r, which gives h_p a power-law distribution on
(0, A0] with exponent ξ.
"""

from __future__ import annotations

import logging
import math
import sys
from dataclasses import dataclass, replace
from typing import Union

import numpy as np

from skinlink.exceptions import DomainError
from skinlink.models.schemas import LinkGeometry
from skinlink.services.skin_attenuation import SkinAttenuationTable, alpha_at
from skinlink.services.specfun import erf

logger = logging.getLogger(__name__)

XI_STUDIED_MIN = 0.05
XI_STUDIED_MAX = 1e3
MAX_LOG_FLOAT = math.log(sys.float_info.max)

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class BeamFootprint:
    """Jitter-independent part of the misalignment model."""

    w_delta: float
    upsilon: float
    a0: float
    w_eq_sq: float

    @property
    def w_eq(self) -> float:
        return math.sqrt(self.w_eq_sq)

    def xi_for(self, sigma_s: float) -> float:
        if sigma_s <= 0:
            raise DomainError(f"sigma_s must be positive, got {sigma_s!r}.")
        return self.w_eq_sq / (4.0 * sigma_s * sigma_s)


@dataclass(frozen=True)
class MisalignmentParams:
    w_delta: float
    upsilon: float
    a0: float
    w_eq_sq: float
    xi: float

    def __post_init__(self) -> None:
        if not 0 < self.a0 <= 1:
            raise DomainError(f"A0 must lie in (0, 1], got {self.a0!r}.")
        if not self.xi > 0:
            raise DomainError(f"xi must be positive, got {self.xi!r}.")

    @property
    def w_eq(self) -> float:
        return math.sqrt(self.w_eq_sq)

    @property
    def law(self) -> "MisalignmentGainLaw":
        return MisalignmentGainLaw(a0=self.a0, xi=self.xi)

    def with_xi(self, xi: float) -> "MisalignmentParams":
        """Same beam, different jitter ratio (used to study ξ directly)."""
        return replace(self, xi=xi)


@dataclass(frozen=True)
class MisalignmentGainLaw:
    a0: float
    xi: float

    def __post_init__(self) -> None:
        if not 0 < self.a0 <= 1:
            raise DomainError(f"A0 must lie in (0, 1], got {self.a0!r}.")
        if not self.xi > 0:
            raise DomainError(f"xi must be positive, got {self.xi!r}.")


def derive_beam(geom: LinkGeometry) -> BeamFootprint:
    w_delta = geom.delta * math.tan(geom.theta / 2.0)
    upsilon = math.sqrt(math.pi) * geom.beta / (math.sqrt(2.0) * w_delta)
    erf_u = float(erf(upsilon))
    a0 = erf_u * erf_u
    # w_eq² = w_δ²·√π·erf(υ)·e^{υ²}/(2υ), evaluated in log space
    log_w_eq_sq = (
        2.0 * math.log(w_delta)
        + math.log(math.sqrt(math.pi) * erf_u / (2.0 * upsilon))
        + upsilon * upsilon
    )
    if log_w_eq_sq > MAX_LOG_FLOAT:
        raise DomainError(
            f"Beam too narrow for the aperture: delta={geom.delta!r} m, theta={geom.theta!r} rad, "
            f"beta={geom.beta!r} m give upsilon={upsilon:.6g} and an unrepresentable w_eq."
        )
    w_eq_sq = math.exp(log_w_eq_sq)
    return BeamFootprint(w_delta=w_delta, upsilon=upsilon, a0=a0, w_eq_sq=w_eq_sq)


def derive_misalignment(geom: LinkGeometry) -> MisalignmentParams:
    """Beam footprint at the receiver plus ξ = w_eq²/(4σ_s²)."""
    if geom.sigma_s is None:
        raise DomainError("sigma_s is required to derive the jitter ratio xi.")
    beam = derive_beam(geom)
    params = MisalignmentParams(
        w_delta=beam.w_delta,
        upsilon=beam.upsilon,
        a0=beam.a0,
        w_eq_sq=beam.w_eq_sq,
        xi=beam.xi_for(geom.sigma_s),
    )
    logger.debug(
        "Misalignment: w_delta=%.6g m upsilon=%.6g A0=%.6g w_eq=%.6g m xi=%.6g",
        params.w_delta,
        params.upsilon,
        params.a0,
        params.w_eq,
        params.xi,
    )
    return params


def xi_in_studied_range(xi: float) -> bool:
    inside = XI_STUDIED_MIN <= xi <= XI_STUDIED_MAX
    if not inside:
        logger.warning("xi=%.6g is outside the studied range [%g, %g]", xi, XI_STUDIED_MIN, XI_STUDIED_MAX)
    return inside


def path_loss(table: SkinAttenuationTable, wavelength: float, delta: float) -> float:
    """Deterministic skin path loss h_l = exp(-α(λ)δ/2)."""
    if delta <= 0:
        raise DomainError(f"Skin thickness must be positive, got {delta!r} m.")
    return math.exp(-0.5 * alpha_at(table, wavelength) * delta)


def hp_pdf(law: MisalignmentGainLaw, x: ArrayLike) -> ArrayLike:
    """f(x) = ξ/A0^ξ · x^(ξ-1) on (0, A0], zero elsewhere."""
    values = np.asarray(x, dtype=float)
    inside = (values > 0) & (values <= law.a0)
    safe = np.where(inside, values, law.a0)
    density = np.where(inside, law.xi / law.a0**law.xi * safe ** (law.xi - 1.0), 0.0)
    return float(density) if np.ndim(x) == 0 else density


def hp_cdf(law: MisalignmentGainLaw, x: ArrayLike) -> ArrayLike:
    values = np.asarray(x, dtype=float)
    ratio = np.clip(values / law.a0, 0.0, 1.0)
    result = ratio**law.xi
    return float(result) if np.ndim(x) == 0 else result


def hp2_cdf(law: MisalignmentGainLaw, x: ArrayLike) -> ArrayLike:
    """CDF of h_p²: (x/A0²)^(ξ/2), clamped to [0, 1]."""
    values = np.asarray(x, dtype=float)
    ratio = np.clip(values / (law.a0 * law.a0), 0.0, 1.0)
    result = ratio ** (law.xi / 2.0)
    return float(result) if np.ndim(x) == 0 else result


def hp2_pdf(law: MisalignmentGainLaw, x: ArrayLike) -> ArrayLike:
    values = np.asarray(x, dtype=float)
    top = law.a0 * law.a0
    inside = (values > 0) & (values <= top)
    safe = np.where(inside, values, top)
    density = np.where(inside, law.xi / (2.0 * law.a0**law.xi) * safe ** (law.xi / 2.0 - 1.0), 0.0)
    return float(density) if np.ndim(x) == 0 else density


def mean_square(law: MisalignmentGainLaw) -> float:
    """E[h_p²] = ξA0²/(ξ+2)."""
    return law.xi * law.a0 * law.a0 / (law.xi + 2.0)
