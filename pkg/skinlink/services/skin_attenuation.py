from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Tuple, Union

import numpy as np

from skinlink.config import settings
from skinlink.exceptions import AttenuationTableError, WavelengthRangeError

logger = logging.getLogger(__name__)

CSV_HEADER = ("wavelength_nm", "alpha_per_mm")
SOURCE_PREFIX = "# source:"
MIN_WAVELENGTH = 300e-9
MAX_WAVELENGTH = 2000e-9


@dataclass(frozen=True)
class SkinAttenuationTable:
    """Skin attenuation coefficient α(λ) sampled on increasing wavelengths (SI units)."""

    wavelengths: Tuple[float, ...]
    alphas: Tuple[float, ...]
    metadata: str = ""

    def __post_init__(self) -> None:
        if len(self.wavelengths) != len(self.alphas):
            raise AttenuationTableError("wavelength and alpha columns differ in length")
        if len(self.wavelengths) < 2:
            raise AttenuationTableError("at least two samples are required")
        for wavelength, alpha in zip(self.wavelengths, self.alphas):
            if not (math.isfinite(wavelength) and math.isfinite(alpha)):
                raise AttenuationTableError("samples must be finite")
            if alpha < 0:
                raise AttenuationTableError(f"negative attenuation {alpha!r} 1/m")
            if not MIN_WAVELENGTH <= wavelength <= MAX_WAVELENGTH:
                raise AttenuationTableError(
                    f"wavelength {wavelength * 1e9:.6g} nm outside [300 nm, 2000 nm]"
                )
        if any(b <= a for a, b in zip(self.wavelengths, self.wavelengths[1:])):
            raise AttenuationTableError("wavelengths must be strictly increasing")

    @classmethod
    def from_samples(
        cls,
        samples: Iterable[Tuple[float, float]],
        metadata: str = "",
    ) -> "SkinAttenuationTable":
        """Build a table from ``(wavelength [m], alpha [1/m])`` pairs."""
        pairs = list(samples)
        return cls(
            wavelengths=tuple(float(w) for w, _ in pairs),
            alphas=tuple(float(a) for _, a in pairs),
            metadata=metadata,
        )

    @property
    def min_wavelength(self) -> float:
        return self.wavelengths[0]

    @property
    def max_wavelength(self) -> float:
        return self.wavelengths[-1]


def _parse_float(text: str, *, column: str, path: str, line: int) -> float:
    try:
        return float(text)
    except ValueError:
        raise AttenuationTableError(f"cannot parse {column} value '{text}'", path=path, line=line) from None


def load_table(path: Union[str, Path]) -> SkinAttenuationTable:
    """Load and validate an attenuation CSV (``wavelength_nm,alpha_per_mm``)."""
    path = Path(path)
    source = str(path)
    try:
        handle = path.open(encoding="utf-8", newline="")
    except FileNotFoundError:
        raise AttenuationTableError("attenuation file not found", path=source) from None

    sources: List[str] = []
    samples: List[Tuple[float, float]] = []
    header_seen = False
    previous: Optional[float] = None

    with handle:
        reader = csv.reader(handle)
        for row in reader:
            line = reader.line_num
            if not row or all(not cell.strip() for cell in row):
                continue
            first = row[0].strip()
            if first.startswith("#"):
                raw = ",".join(row).strip()
                if raw.lower().startswith(SOURCE_PREFIX):
                    sources.append(raw[len(SOURCE_PREFIX):].strip())
                continue
            cells = tuple(cell.strip() for cell in row)
            if not header_seen:
                if cells != CSV_HEADER:
                    raise AttenuationTableError(
                        f"expected header '{','.join(CSV_HEADER)}', got '{','.join(cells)}'",
                        path=source,
                        line=line,
                    )
                header_seen = True
                continue
            if len(cells) != 2:
                raise AttenuationTableError(
                    f"expected 2 columns, got {len(cells)}", path=source, line=line
                )
            wavelength_nm = _parse_float(cells[0], column="wavelength_nm", path=source, line=line)
            alpha_per_mm = _parse_float(cells[1], column="alpha_per_mm", path=source, line=line)
            if previous is not None and wavelength_nm <= previous:
                kind = "duplicate" if wavelength_nm == previous else "unsorted"
                raise AttenuationTableError(
                    f"{kind} wavelength {wavelength_nm:g} nm", path=source, line=line
                )
            if alpha_per_mm < 0:
                raise AttenuationTableError(
                    f"negative alpha {alpha_per_mm:g} 1/mm", path=source, line=line
                )
            previous = wavelength_nm
            samples.append((wavelength_nm / 1e9, alpha_per_mm * 1e3))

    if not header_seen:
        raise AttenuationTableError("missing header line", path=source)

    try:
        table = SkinAttenuationTable.from_samples(samples, metadata="; ".join(sources))
    except AttenuationTableError as exc:
        raise AttenuationTableError(str(exc), path=source) from None

    logger.info(
        "Loaded attenuation table %s (%d samples, %.0f-%.0f nm)",
        source,
        len(table.wavelengths),
        table.min_wavelength * 1e9,
        table.max_wavelength * 1e9,
    )
    return table


def load_default_table() -> SkinAttenuationTable:
    """Load the attenuation file configured in settings (the bundled dataset by default)."""
    return load_table(settings.attenuation_file)


def alpha_at(table: SkinAttenuationTable, wavelength: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """Piecewise-linear α(λ) in 1/m; exact at the table samples, no extrapolation."""
    values = np.asarray(wavelength, dtype=float)
    outside = (values < table.min_wavelength) | (values > table.max_wavelength) | ~np.isfinite(values)
    if np.any(outside):
        offending = float(values[outside].flat[0]) if values.ndim else float(values)
        raise WavelengthRangeError(offending, table.min_wavelength, table.max_wavelength)
    result = np.interp(values, table.wavelengths, table.alphas)
    if np.ndim(wavelength) == 0:
        return float(result)
    return result
