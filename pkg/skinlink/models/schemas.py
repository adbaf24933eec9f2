from __future__ import annotations

import math
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Literal, Mapping, Optional

import numpy as np
from pydantic import (
    BaseModel,
    BeforeValidator,
    ConfigDict,
    Field,
    model_validator,
)
from typing_extensions import Annotated

from skinlink.exceptions import ConfigError
from skinlink.utils import units
from skinlink.utils.units import parse_quantity


def _quantity(table: Mapping[str, float]) -> BeforeValidator:
    def parse(value: Any) -> Any:
        return parse_quantity(value, table)

    return BeforeValidator(parse)


Millimeters = Annotated[float, _quantity(units.MILLIMETERS)]
Nanometers = Annotated[float, _quantity(units.NANOMETERS)]
SquareMillimeters = Annotated[float, _quantity(units.SQUARE_MILLIMETERS)]
Degrees = Annotated[float, _quantity(units.DEGREES)]
Microwatts = Annotated[float, _quantity(units.MICROWATTS)]
MicrowattsPerMHz = Annotated[float, _quantity(units.MICROWATTS_PER_MHZ)]
Megahertz = Annotated[float, _quantity(units.MEGAHERTZ)]
Nanoamperes = Annotated[float, _quantity(units.NANOAMPERES)]
PicoampsPerRootHz = Annotated[float, _quantity(units.PICOAMPERES_PER_RTHZ)]
SquareAmperes = Annotated[float, _quantity(units.SQUARE_AMPERES)]
BitsPerHz = Annotated[float, _quantity(units.BITS_PER_HZ)]


class DetectionScheme(str, Enum):
    HETERODYNE = "heterodyne"
    IM_DD = "im_dd"

    @property
    def psi(self) -> float:
        """Shannon-form scaling factor ψ of the receiver type."""
        if self is DetectionScheme.HETERODYNE:
            return 1.0
        return math.e / (2.0 * math.pi)


# --------------------------------------------------------------------------
# Domain inputs (SI units)
# --------------------------------------------------------------------------


class LinkGeometry(BaseModel):
    """Skin thickness, beam divergence, receiver aperture and pointing jitter."""

    model_config = ConfigDict(frozen=True)

    delta: float = Field(gt=0, description="Skin thickness [m]")
    theta: float = Field(gt=0, lt=math.pi, description="Full divergence angle [rad]")
    aperture_radius: Optional[float] = Field(None, gt=0, description="Aperture radius β [m]")
    aperture_area: Optional[float] = Field(None, gt=0, description="Aperture area A = πβ² [m²]")
    sigma_s: Optional[float] = Field(None, gt=0, description="Pointing-jitter standard deviation [m]")

    @model_validator(mode="after")
    def _exactly_one_aperture(self) -> "LinkGeometry":
        if (self.aperture_radius is None) == (self.aperture_area is None):
            raise ValueError("specify exactly one of aperture_radius or aperture_area")
        return self

    @property
    def beta(self) -> float:
        if self.aperture_radius is not None:
            return self.aperture_radius
        return math.sqrt(self.aperture_area / math.pi)


class TxConfig(BaseModel):
    """Transmitter: wavelength, bandwidth and signal power / power spectral density."""

    model_config = ConfigDict(frozen=True)

    wavelength: float = Field(gt=0, description="Operating wavelength [m]")
    bandwidth: float = Field(gt=0, description="Communication bandwidth B [Hz]")
    signal_psd: Optional[float] = Field(None, ge=0, description="Signal PSD P̃s [W/Hz]")
    signal_power: Optional[float] = Field(None, ge=0, description="Average optical power Ps [W]")

    @model_validator(mode="after")
    def _power_consistency(self) -> "TxConfig":
        if self.signal_psd is None and self.signal_power is None:
            raise ValueError("specify signal_psd and/or signal_power")
        if self.signal_psd is not None and self.signal_power is not None:
            implied = self.signal_psd * self.bandwidth
            scale = max(abs(self.signal_power), abs(implied))
            if abs(self.signal_power - implied) > 1e-9 * scale:
                raise ValueError(
                    f"signal_power {self.signal_power!r} W differs from signal_psd*bandwidth {implied!r} W"
                )
        return self

    @property
    def psd(self) -> float:
        if self.signal_psd is not None:
            return self.signal_psd
        return self.signal_power / self.bandwidth

    @property
    def power(self) -> float:
        if self.signal_power is not None:
            return self.signal_power
        return self.signal_psd * self.bandwidth


class RxConfig(BaseModel):
    """Photodiode receiver: quantum efficiency, noise sources and detection scheme."""

    model_config = ConfigDict(frozen=True)

    eta: float = Field(gt=0, le=1, description="Quantum efficiency")
    dark_current: float = Field(0.0, ge=0, description="Dark current I_DC [A]")
    background_power: float = Field(0.0, ge=0, description="Background optical power P_b [W]")
    noise_psd: Optional[float] = Field(None, ge=0, description="Thermal-noise PSD N0 [A²/Hz]")
    thermal_noise_variance: Optional[float] = Field(None, ge=0, description="Thermal-noise variance σ_th² [A²]")
    scheme: DetectionScheme = DetectionScheme.HETERODYNE

    @model_validator(mode="after")
    def _one_thermal_form(self) -> "RxConfig":
        if (self.noise_psd is None) == (self.thermal_noise_variance is None):
            raise ValueError("specify exactly one of noise_psd or thermal_noise_variance")
        return self

    def thermal_psd(self, bandwidth: float) -> float:
        """N0, derived as σ_th²/B when only the variance is known."""
        if self.noise_psd is not None:
            return self.noise_psd
        return self.thermal_noise_variance / bandwidth

    def thermal_variance(self, bandwidth: float) -> float:
        """σ_th², derived as N0·B when only the PSD is known."""
        if self.thermal_noise_variance is not None:
            return self.thermal_noise_variance
        return self.noise_psd * bandwidth


class SubBand(BaseModel):
    model_config = ConfigDict(frozen=True)

    wavelength: float = Field(gt=0, description="Centre wavelength λᵢ [m]")
    width: float = Field(gt=0, description="Sub-band width Δf [Hz]")


class SubBandSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    bands: List[SubBand] = Field(min_length=1)

    @classmethod
    def narrowband(cls, bandwidth: float, wavelength: float) -> "SubBandSpec":
        return cls(bands=[SubBand(wavelength=wavelength, width=bandwidth)])


class McConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_samples: int = Field(1_000_000, ge=1)
    seed: int = Field(20190101, ge=0, lt=2**64)
    n_streams: int = Field(1, ge=1)
    block_size: int = Field(65_536, ge=1)


# --------------------------------------------------------------------------
# Human-unit run configuration
# --------------------------------------------------------------------------

DEFAULT_APERTURE_AREA_MM2 = 1.0
DEFAULT_NOISE_DENSITY_PA = 1.3
DEFAULT_SIGNAL_PSD_UW_PER_MHZ = 0.01


class RunConfig(BaseModel):
    """Link parameters in human units; defaults are the baseline design point."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    wavelength: Nanometers = Field(1100.0, gt=0, description="[nm]")
    delta: Millimeters = Field(4.0, gt=0, description="Skin thickness [mm]")
    theta: Degrees = Field(20.0, gt=0, lt=180, description="Full divergence angle [deg]")
    aperture_area: Optional[SquareMillimeters] = Field(None, gt=0, description="[mm²]")
    aperture_radius: Optional[Millimeters] = Field(None, gt=0, description="[mm]")
    sigma_s: Millimeters = Field(0.5, gt=0, description="Jitter standard deviation [mm]")
    eta: float = Field(0.8, gt=0, le=1)
    dark_current: Nanoamperes = Field(0.05, ge=0, description="[nA]")
    background_power: Microwatts = Field(0.0, ge=0, description="[µW]")
    noise_density: Optional[PicoampsPerRootHz] = Field(None, ge=0, description="√N0 [pA/√Hz]")
    thermal_noise_variance: Optional[SquareAmperes] = Field(None, ge=0, description="σ_th² [A²]")
    signal_psd: Optional[MicrowattsPerMHz] = Field(None, ge=0, description="[µW/MHz]")
    signal_power: Optional[Microwatts] = Field(None, ge=0, description="[µW]")
    bandwidth: Megahertz = Field(10.0, gt=0, description="[MHz]")
    rate_threshold: BitsPerHz = Field(1.0, ge=0, description="r_th [bits/s/Hz]")
    gamma_th: Optional[float] = Field(None, gt=0, description="Linear SNR threshold (overrides r_th)")
    xi: Optional[float] = Field(None, gt=0, description="Override of the derived ξ")
    scheme: DetectionScheme = DetectionScheme.HETERODYNE
    attenuation_file: Optional[Path] = None

    @model_validator(mode="before")
    @classmethod
    def _fill_alternatives(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        data = dict(data)
        if data.get("aperture_area") is None and data.get("aperture_radius") is None:
            data["aperture_area"] = DEFAULT_APERTURE_AREA_MM2
        if data.get("noise_density") is None and data.get("thermal_noise_variance") is None:
            data["noise_density"] = DEFAULT_NOISE_DENSITY_PA
        if data.get("signal_psd") is None and data.get("signal_power") is None:
            data["signal_psd"] = DEFAULT_SIGNAL_PSD_UW_PER_MHZ
        return data

    @model_validator(mode="after")
    def _exclusive_pairs(self) -> "RunConfig":
        for first, second in EXCLUSIVE_FIELDS:
            if getattr(self, first) is not None and getattr(self, second) is not None:
                raise ValueError(f"specify only one of {first} or {second}")
        if self.signal_psd is not None and self.signal_power is not None:
            implied = self.signal_psd * self.bandwidth
            if abs(self.signal_power - implied) > 1e-9 * max(abs(self.signal_power), abs(implied)):
                raise ValueError(
                    f"signal_power {self.signal_power!r} uW differs from signal_psd*bandwidth {implied!r} uW"
                )
        return self

    def with_updates(self, **updates: Any) -> "RunConfig":
        """Return a re-validated copy; setting one of an exclusive pair clears the other."""
        data = self.model_dump()
        for first, second in REPLACING_FIELDS:
            if updates.get(first) is not None:
                data[second] = None
            if updates.get(second) is not None:
                data[first] = None
        # a new rate threshold replaces an explicit SNR threshold
        if updates.get("rate_threshold") is not None and updates.get("gamma_th") is None:
            data["gamma_th"] = None
        # bandwidth changes hold the PSD fixed
        psd_held = data["signal_psd"] is not None and updates.get("signal_power") is None
        if updates.get("bandwidth") is not None and psd_held:
            data["signal_power"] = None
        data.update(updates)
        return RunConfig.model_validate(data)

    def geometry(self) -> LinkGeometry:
        radius = self.aperture_radius / 1e3 if self.aperture_radius is not None else None
        area = self.aperture_area / 1e6 if self.aperture_area is not None else None
        return LinkGeometry(
            delta=self.delta / 1e3,
            theta=math.radians(self.theta),
            aperture_radius=radius,
            aperture_area=area,
            sigma_s=self.sigma_s / 1e3,
        )

    def tx(self) -> TxConfig:
        psd = self.signal_psd / 1e12 if self.signal_psd is not None else None
        power = self.signal_power / 1e6 if self.signal_power is not None else None
        return TxConfig(
            wavelength=self.wavelength / 1e9,
            bandwidth=self.bandwidth * 1e6,
            signal_psd=psd,
            signal_power=power,
        )

    def rx(self) -> RxConfig:
        noise_psd = (self.noise_density / 1e12) ** 2 if self.noise_density is not None else None
        return RxConfig(
            eta=self.eta,
            dark_current=self.dark_current / 1e9,
            background_power=self.background_power / 1e6,
            noise_psd=noise_psd,
            thermal_noise_variance=self.thermal_noise_variance,
            scheme=self.scheme,
        )


EXCLUSIVE_FIELDS = (
    ("aperture_area", "aperture_radius"),
    ("noise_density", "thermal_noise_variance"),
)
# Setting one member of these pairs drops the other when a config is updated.
REPLACING_FIELDS = EXCLUSIVE_FIELDS + (("signal_psd", "signal_power"),)


# --------------------------------------------------------------------------
# Sweeps
# --------------------------------------------------------------------------

SweepAxisName = Literal[
    "delta", "lambda", "xi", "sigma_s", "theta", "area", "eta", "Ptilde_s", "B", "r_th", "gamma_th_norm"
]

# Sweep axis -> (RunConfig field, unit shown in CSV headers); None means the
# axis is applied as an evaluation override rather than a config field.
SWEEP_AXIS_FIELDS: Dict[str, Any] = {
    "delta": ("delta", "mm"),
    "lambda": ("wavelength", "nm"),
    "xi": ("xi", ""),
    "sigma_s": ("sigma_s", "mm"),
    "theta": ("theta", "deg"),
    "area": ("aperture_area", "mm2"),
    "eta": ("eta", ""),
    "Ptilde_s": ("signal_psd", "uW/MHz"),
    "B": ("bandwidth", "MHz"),
    "r_th": ("rate_threshold", "bits/s/Hz"),
    "gamma_th_norm": (None, "dB"),
}


class SweepAxis(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: SweepAxisName
    start: float
    stop: float
    count: int = Field(ge=1)
    spacing: Literal["linear", "log"] = "linear"

    @model_validator(mode="after")
    def _log_needs_positive(self) -> "SweepAxis":
        if self.spacing == "log" and (self.start <= 0 or self.stop <= 0):
            raise ValueError("log spacing needs positive start and stop")
        return self

    @classmethod
    def parse(cls, text: str) -> "SweepAxis":
        """Parse ``NAME:START:STOP:COUNT[:log|:linear]``."""
        parts = text.split(":")
        if len(parts) not in (4, 5):
            raise ConfigError(f"Axis '{text}' must look like NAME:START:STOP:COUNT[:log]", key=text)
        name, start, stop, count = parts[:4]
        if name not in SWEEP_AXIS_FIELDS:
            raise ConfigError(
                f"Unknown sweep axis '{name}'; expected one of: {', '.join(SWEEP_AXIS_FIELDS)}",
                key=name,
            )
        try:
            return cls(
                name=name,
                start=float(start),
                stop=float(stop),
                count=int(count),
                spacing=parts[4] if len(parts) == 5 else "linear",
            )
        except ValueError as exc:
            raise ConfigError(f"Invalid axis '{text}': {exc}", key=name) from None

    def values(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.start, self.stop, self.count)
        return np.linspace(self.start, self.stop, self.count)

    @property
    def column(self) -> str:
        unit = SWEEP_AXIS_FIELDS[self.name][1]
        if not unit:
            return f"{self.name}_value"
        return f"{self.name}_{unit}".replace("/", "_per_")


# --------------------------------------------------------------------------
# Reports
# --------------------------------------------------------------------------


class MetricsReport(BaseModel):
    """Closed-form link metrics at one design point.

    SNRs are linear (dB copies alongside), spectral efficiencies are in
    bits/channel use and capacities in bits/s.
    """

    wavelength_nm: float
    delta_mm: float
    scheme: DetectionScheme
    psi: float
    responsivity: float
    path_loss: float
    a0: float
    w_eq_mm: float
    xi: float
    avg_snr: float
    avg_snr_db: Optional[float] = None
    peak_snr: float
    peak_snr_db: Optional[float] = None
    gamma_th: float
    outage_probability: float = Field(ge=0, le=1)
    spectral_efficiency: float
    spectral_efficiency_lower_bound: float
    capacity_bps: float
    capacity_lower_bound_bps: float
    capacity_is_lower_bound: bool = False
    vacuous_bound: bool = False
    threshold_exceeds_peak: bool = False
    xi_out_of_studied_range: bool = False
    units: Dict[str, str] = Field(
        default_factory=lambda: {
            "avg_snr": "linear",
            "avg_snr_db": "dB",
            "spectral_efficiency": "bits/channel use",
            "capacity_bps": "bits/s",
            "outage_probability": "probability",
        }
    )

    @model_validator(mode="after")
    def _consistent(self) -> "MetricsReport":
        numbers = [
            self.avg_snr,
            self.peak_snr,
            self.spectral_efficiency,
            self.spectral_efficiency_lower_bound,
            self.capacity_bps,
            self.capacity_lower_bound_bps,
        ]
        if not all(math.isfinite(value) for value in numbers):
            raise ValueError("metrics must be finite")
        slack = 1e-9 * max(1.0, abs(self.spectral_efficiency_lower_bound))
        if self.spectral_efficiency < self.spectral_efficiency_lower_bound - slack:
            raise ValueError("spectral efficiency fell below its lower bound")
        return self

    @property
    def flags(self) -> List[str]:
        names = ("capacity_is_lower_bound", "vacuous_bound", "threshold_exceeds_peak", "xi_out_of_studied_range")
        return [name for name in names if getattr(self, name)]


class JitterReport(BaseModel):
    target_outage: float
    gamma_th: float
    h_value: float
    sigma_s_mm: float
    xi: float
    w_eq_mm: float
    capacity_bps: float
    capacity_lower_bound_bps: float
    capacity_is_lower_bound: bool = False


class ValidationRow(BaseModel):
    metric: str
    closed_form: float
    mc_mean: float
    mc_std_error: float
    z_score: Optional[float] = None
    passed: bool


class ValidationReport(BaseModel):
    rows: List[ValidationRow]
    n_samples: int
    seed: int
    rng: str
    block_size: int
    sigma_limit: float
    passed: bool


class SweepRow(BaseModel):
    axes: Dict[str, float]
    report: MetricsReport

