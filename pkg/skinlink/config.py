import logging
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

from dotenv import dotenv_values
from pydantic_settings import BaseSettings, SettingsConfigDict

from skinlink.exceptions import ConfigError

logger = logging.getLogger(__name__)

PROJECT_ROOT = Path(__file__).resolve().parents[1]
DEFAULT_ATTENUATION_FILE = PROJECT_ROOT / "config" / "skin_attenuation.csv"


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_prefix="SKINLINK_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    # API Configuration
    app_name: str = "Transcutaneous Optical Link Evaluator"
    app_version: str = "0.1.0"
    debug: bool = False
    log_level: str = "INFO"

    # Server Configuration
    host: str = "0.0.0.0"
    port: int = 8000

    # Channel data
    attenuation_file: Path = DEFAULT_ATTENUATION_FILE

    # Numerics
    lerch_rel_tol: float = 1e-10

    # Monte Carlo defaults
    mc_samples: int = 1_000_000
    mc_seed: int = 20190101
    mc_streams: int = 4
    mc_block_size: int = 65_536
    api_max_mc_samples: int = 2_000_000
    api_max_sweep_points: int = 10_000

    # Sweeps / output
    sweep_workers: int = 4
    csv_digits: int = 12


settings = Settings()


# Short names accepted in key=value run files and mapped onto RunConfig fields.
RUN_KEY_ALIASES = {
    "lambda": "wavelength",
    "psd": "signal_psd",
    "ptilde_s": "signal_psd",
    "power": "signal_power",
    "p_s": "signal_power",
    "area": "aperture_area",
    "radius": "aperture_radius",
    "b": "bandwidth",
    "r_th": "rate_threshold",
    "i_dc": "dark_current",
    "p_b": "background_power",
    "n0": "noise_density",
    "sigma_th_sq": "thermal_noise_variance",
}


def normalize_run_key(key: str) -> str:
    name = key.strip().replace("-", "_")
    return RUN_KEY_ALIASES.get(name.lower(), name)


def load_run_config(path: Optional[Union[str, Path]] = None, overrides: Optional[Mapping[str, Any]] = None):
    """Build a RunConfig from baked defaults, an optional key=value file and overrides.

    Later sources win: overrides beat the file, the file beats the defaults.
    """
    from skinlink.models.schemas import REPLACING_FIELDS, RunConfig

    data: Dict[str, Any] = {}
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"Config file not found: {path}", key=str(path))
        for key, value in dotenv_values(path).items():
            field = normalize_run_key(key)
            if field not in RunConfig.model_fields:
                raise ConfigError(f"Unknown config key '{key}' in {path}", key=key)
            if value is None or value == "":
                raise ConfigError(f"Config key '{key}' has no value in {path}", key=key)
            data[field] = value

    for key, value in (overrides or {}).items():
        if value is None:
            continue
        field = normalize_run_key(key)
        if field not in RunConfig.model_fields:
            raise ConfigError(f"Unknown config key '{key}'", key=key)
        for first, second in REPLACING_FIELDS:
            if field == first:
                data.pop(second, None)
            elif field == second:
                data.pop(first, None)
        data[field] = value

    logger.debug("Run configuration keys: %s", ", ".join(sorted(data)) or "defaults")
    return RunConfig.model_validate(data)
