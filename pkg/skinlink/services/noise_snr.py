"""Photodiode responsivity, receiver noise and the SNR functionals."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import constants

from skinlink.exceptions import DomainError
from skinlink.models.schemas import RxConfig, TxConfig
from skinlink.services.channel import MisalignmentParams

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class PhysicalConstants:
    q: float = constants.elementary_charge
    planck: float = constants.Planck
    c: float = constants.speed_of_light


PHYSICS = PhysicalConstants()


def responsivity(eta: float, wavelength: float) -> float:
    """R = ηqλ/(hc) in A/W."""
    return eta * PHYSICS.q * wavelength / (PHYSICS.planck * PHYSICS.c)


def noise_denominator_psd(rx: RxConfig, resp: float, bandwidth: float) -> float:
    """2qRP_b + 2qI_DC + N0 in A²/Hz.

    ``bandwidth`` is only used to convert a thermal variance into N0.
    """
    q = PHYSICS.q
    return 2.0 * q * resp * rx.background_power + 2.0 * q * rx.dark_current + rx.thermal_psd(bandwidth)


def noise_variance(rx: RxConfig, resp: float, bandwidth: float) -> float:
    """σ² = 2qRBP_b + 2qBI_DC + σ_th² in A²."""
    q = PHYSICS.q
    return (
        2.0 * q * resp * bandwidth * rx.background_power
        + 2.0 * q * bandwidth * rx.dark_current
        + rx.thermal_variance(bandwidth)
    )


def snr_gain(resp: float, h_l_sq: float, tx: TxConfig, rx: RxConfig) -> float:
    """G, the coefficient of h_p² in the instantaneous SNR."""
    denominator = noise_denominator_psd(rx, resp, tx.bandwidth)
    if denominator <= 0:
        raise DomainError("Receiver noise is zero; the SNR is unbounded.")
    return resp * resp * h_l_sq * tx.psd / denominator


def instantaneous_snr(hp: ArrayLike, resp: float, h_l_sq: float, tx: TxConfig, rx: RxConfig) -> ArrayLike:
    result = snr_gain(resp, h_l_sq, tx, rx) * np.square(hp)
    return float(result) if np.ndim(hp) == 0 else result


def instantaneous_snr_power_form(hp: float, resp: float, h_l_sq: float, tx: TxConfig, rx: RxConfig) -> float:
    """γ = R²h_l²h_p²P_s/σ²; agrees with the PSD form when σ_th² = N0·B."""
    return resp * resp * h_l_sq * hp * hp * tx.power / noise_variance(rx, resp, tx.bandwidth)


def peak_snr(params: MisalignmentParams, gain: float) -> float:
    """γ_max = G·A0², the SNR with zero displacement."""
    return gain * params.a0 * params.a0


def average_snr(params: MisalignmentParams, resp: float, h_l_sq: float, tx: TxConfig, rx: RxConfig) -> float:
    """γ̄ = G·ξA0²/(ξ+2)."""
    gain = snr_gain(resp, h_l_sq, tx, rx)
    return gain * params.xi * params.a0 * params.a0 / (params.xi + 2.0)


def to_db(linear: float) -> float:
    if linear <= 0:
        return -math.inf
    return 10.0 * math.log10(linear)


def from_db(decibels: float) -> float:
    return 10.0 ** (decibels / 10.0)
