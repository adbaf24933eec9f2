from __future__ import annotations

from typing import Optional


class LinkModelError(Exception):
    """Base class for link-model evaluation errors."""

    pass


class ConfigError(LinkModelError, ValueError):
    """Raised when a run configuration cannot be parsed."""

    def __init__(self, message: str, *, key: Optional[str] = None) -> None:
        super().__init__(message)
        self.key = key


class AttenuationTableError(LinkModelError):
    """Raised when an attenuation file cannot be parsed or violates the table invariants."""

    def __init__(self, message: str, *, path: Optional[str] = None, line: Optional[int] = None) -> None:
        location = ""
        if path is not None:
            location = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(f"{location}{message}")
        self.path = path
        self.line = line


class DomainError(LinkModelError, ValueError):
    """Raised when an argument lies outside the domain of a closed-form expression."""

    pass


class WavelengthRangeError(DomainError):
    """Raised when a wavelength lies outside the attenuation table."""

    def __init__(self, wavelength: float, minimum: float, maximum: float) -> None:
        super().__init__(
            f"Wavelength {wavelength * 1e9:.6g} nm is outside the supported range "
            f"[{minimum * 1e9:.6g} nm, {maximum * 1e9:.6g} nm]."
        )
        self.wavelength = wavelength
        self.minimum = minimum
        self.maximum = maximum


class LerchConvergenceError(LinkModelError, ArithmeticError):
    """Raised when the Lerch integral does not reach the requested tolerance."""

    def __init__(self, estimate: float, abs_error: float, rel_tol: float) -> None:
        super().__init__(
            f"Lerch transcendent quadrature did not converge: estimate={estimate!r}, "
            f"error estimate={abs_error!r} (requested rel_tol={rel_tol!r})."
        )
        self.estimate = estimate
        self.abs_error = abs_error
        self.rel_tol = rel_tol


class JitterInfeasibleError(LinkModelError):
    """Raised when the SNR threshold is unreachable even without pointing jitter."""

    def __init__(self, h_value: float, best_case_outage: float) -> None:
        super().__init__(
            f"Threshold is unreachable: H={h_value:.6g} >= 1, so the outage probability "
            f"is {best_case_outage:.6g} even with zero jitter."
        )
        self.h_value = h_value
        self.best_case_outage = best_case_outage
