"""Special functions behind the closed-form link metrics.

Only the regime the metrics need is supported for the Lerch transcendent:
order b = 1, first argument a <= 0 (possibly very large in magnitude) and a
positive third argument.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import integrate, special

from skinlink.exceptions import DomainError, LerchConvergenceError

logger = logging.getLogger(__name__)

DEFAULT_REL_TOL = 1e-10
MAX_REL_TOL = 1e-3
SERIES_CROSSOVER = 0.5
QUAD_SUBINTERVAL_LIMIT = 500

ArrayLike = Union[float, np.ndarray]


def erf(z: ArrayLike) -> ArrayLike:
    """Error function, vectorised over numpy arrays."""
    return special.erf(z)


@dataclass(frozen=True)
class LerchArgs:
    """Arguments of Φ(a, b, x)."""

    a: float
    b: float
    x: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.a) and math.isfinite(self.x)):
            raise DomainError(f"Lerch arguments must be finite (a={self.a!r}, x={self.x!r}).")
        if self.b != 1:
            raise DomainError(f"Only order b = 1 is supported, got b={self.b!r}.")
        if self.x <= 0:
            raise DomainError(f"Third argument must be positive, got x={self.x!r}.")
        if self.a > 0:
            raise DomainError(f"First argument must be <= 0, got a={self.a!r}.")


def _check_rel_tol(rel_tol: float) -> None:
    if not 0 < rel_tol <= MAX_REL_TOL:
        raise DomainError(f"rel_tol must lie in (0, {MAX_REL_TOL}], got {rel_tol!r}.")


def lerch_phi_series(a: float, x: float, rel_tol: float = DEFAULT_REL_TOL) -> float:
    """Defining series Σ aⁿ/(n + x), valid for |a| <= 0.5."""
    _check_rel_tol(rel_tol)
    if abs(a) > SERIES_CROSSOVER:
        raise DomainError(f"Series path requires |a| <= {SERIES_CROSSOVER}, got a={a!r}.")
    if a == 0:
        return 1.0 / x

    terms = [1.0 / x]
    power = 1.0
    n = 0
    while True:
        n += 1
        power *= a
        terms.append(power / (n + x))
        # |a|^k/(k + x) is decreasing, so the geometric tail bounds the remainder
        remainder = abs(power * a) / (n + 1 + x) / (1.0 - abs(a))
        if remainder <= 0.1 * rel_tol * abs(math.fsum(terms)):
            break
    return math.fsum(terms)


def lerch_phi_integral(a: float, x: float, rel_tol: float = DEFAULT_REL_TOL) -> float:
    """Φ(a, 1, x) from ∫₀^∞ e^{-xy}/(1 - a e^{-y}) dy by adaptive quadrature.

    The integral is taken in t = x·y, Φ = (1/x)∫₀^∞ e^{-t}/(1 - a e^{-t/x}) dt,
    so the mass sits near t ~ 1 for every x. The integrand is bounded by e^{-t}
    and the whole integral by 1/(1 - a) from below, so truncating at
    U = 40 + ln(1 - a) leaves a relative remainder under e^{-40}; the bound
    e^{-U} is added back.
    """
    _check_rel_tol(rel_tol)
    upper = 40.0 + math.log1p(-a)

    def integrand(t: float) -> float:
        return math.exp(-t) / (1.0 - a * math.exp(-t / x))

    points = [p for p in (1.0, 10.0) if p < upper]
    if a < -1.0:
        knee = x * math.log(-a)
        if knee < upper:
            points.append(knee)

    result = integrate.quad(
        integrand,
        0.0,
        upper,
        epsabs=0.0,
        epsrel=rel_tol,
        limit=QUAD_SUBINTERVAL_LIMIT,
        points=sorted(set(points)),
        full_output=1,
    )
    value, abs_error = result[0], result[1]
    scaled = value + math.exp(-upper)

    if len(result) > 3 or not scaled > 0 or abs_error > rel_tol * scaled:
        raise LerchConvergenceError(scaled / x, abs_error / x, rel_tol)

    total = scaled / x
    logger.debug(
        "lerch_phi_integral a=%g x=%g -> %.17g (err %.3g, %d evaluations)",
        a,
        x,
        total,
        abs_error / x,
        result[2]["neval"],
    )
    return total


def lerch_phi(args: LerchArgs, rel_tol: float = DEFAULT_REL_TOL) -> float:
    """Lerch transcendent Φ(a, 1, x) to relative accuracy ``rel_tol``.

    The defining series is used for |a| <= 0.5 and the integral
    representation otherwise.
    """
    _check_rel_tol(rel_tol)
    if abs(args.a) <= SERIES_CROSSOVER:
        return lerch_phi_series(args.a, args.x, rel_tol)
    return lerch_phi_integral(args.a, args.x, rel_tol)
