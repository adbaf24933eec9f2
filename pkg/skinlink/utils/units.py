"""Parsing of unit-suffixed quantities such as ``4mm``, ``1100nm`` or ``0.01uW/MHz``.

Every parser returns the value expressed in the canonical unit of its family
(the first entry of each table below), so human-unit config fields stay in
the units they are documented in and only the domain types hold SI values.
"""

from __future__ import annotations

import math
import re
from typing import Mapping, Union

from skinlink.exceptions import ConfigError

_QUANTITY_RE = re.compile(
    r"^\s*(?P<number>[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(?P<unit>\S*)\s*$"
)

MILLIMETERS: Mapping[str, float] = {
    "mm": 1.0,
    "m": 1e3,
    "cm": 10.0,
    "um": 1e-3,
    "µm": 1e-3,
    "nm": 1e-6,
}
NANOMETERS: Mapping[str, float] = {
    "nm": 1.0,
    "um": 1e3,
    "µm": 1e3,
    "mm": 1e6,
    "m": 1e9,
}
SQUARE_MILLIMETERS: Mapping[str, float] = {
    "mm2": 1.0,
    "mm^2": 1.0,
    "mm²": 1.0,
    "cm2": 100.0,
    "cm^2": 100.0,
    "m2": 1e6,
    "m^2": 1e6,
}
DEGREES: Mapping[str, float] = {
    "deg": 1.0,
    "°": 1.0,
    "rad": math.degrees(1.0),
    "mrad": math.degrees(1e-3),
}
MICROWATTS: Mapping[str, float] = {
    "uW": 1.0,
    "µW": 1.0,
    "W": 1e6,
    "mW": 1e3,
    "nW": 1e-3,
}
MICROWATTS_PER_MHZ: Mapping[str, float] = {
    "uW/MHz": 1.0,
    "µW/MHz": 1.0,
    "W/Hz": 1e12,
    "nW/MHz": 1e-3,
    "mW/MHz": 1e3,
}
MEGAHERTZ: Mapping[str, float] = {
    "MHz": 1.0,
    "Hz": 1e-6,
    "kHz": 1e-3,
    "GHz": 1e3,
}
NANOAMPERES: Mapping[str, float] = {
    "nA": 1.0,
    "A": 1e9,
    "mA": 1e6,
    "uA": 1e3,
    "µA": 1e3,
    "pA": 1e-3,
}
PICOAMPERES_PER_RTHZ: Mapping[str, float] = {
    "pA/rtHz": 1.0,
    "pA/sqrt(Hz)": 1.0,
    "pA/√Hz": 1.0,
    "A/rtHz": 1e12,
    "A/sqrt(Hz)": 1e12,
    "nA/rtHz": 1e3,
}
SQUARE_AMPERES: Mapping[str, float] = {
    "A2": 1.0,
    "A^2": 1.0,
    "A²": 1.0,
}
BITS_PER_HZ: Mapping[str, float] = {
    "bits/s/Hz": 1.0,
    "bps/Hz": 1.0,
    "b/s/Hz": 1.0,
}


def parse_quantity(value: Union[str, float, int, None], units: Mapping[str, float]) -> Union[float, None]:
    """Return ``value`` in the canonical unit of ``units``.

    Bare numbers are taken to already be in the canonical unit.
    """
    if value is None or isinstance(value, bool):
        return value
    if isinstance(value, (int, float)):
        return float(value)
    match = _QUANTITY_RE.match(str(value))
    if not match:
        raise ConfigError(f"Cannot parse quantity '{value}'.")
    number = float(match.group("number"))
    unit = match.group("unit")
    if unit == "":
        return number
    if unit not in units:
        accepted = ", ".join(u for u in units if u)
        raise ConfigError(f"Unsupported unit '{unit}' in '{value}'; expected one of: {accepted}.")
    return number * units[unit]
