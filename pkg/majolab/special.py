"""Complete elliptic integral of the first kind and the real inverse hyperbolic cosine."""

from __future__ import annotations

import logging
import math

from majolab.errors import DomainError, ModulusOutOfRange, NoConvergence

logger = logging.getLogger(__name__)

_AGM_RTOL = 1e-15
_AGM_MAX_ITER = 64


def _agm(a: float, b: float) -> float:
    for iteration in range(_AGM_MAX_ITER):
        if abs(a - b) <= _AGM_RTOL * a:
            logger.debug("AGM converged after %d iterations", iteration)
            return a
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    raise NoConvergence(f"AGM did not converge within {_AGM_MAX_ITER} iterations (a={a!r}, b={b!r})")


def elliptic_K(x: float) -> float:
    """Return I(x) = integral over [0, pi/2] of 1/sqrt(1 - x^2 sin^2 t), x the modulus.

    Evaluated as pi / (2 AGM(1, sqrt(1 - x^2))). The modulus must lie in [0, 1);
    x = 1 is the logarithmic divergence and is rejected.
    """

    x = float(x)
    if not (0.0 <= x < 1.0) or math.isnan(x):
        raise ModulusOutOfRange(f"elliptic modulus must satisfy 0 <= x < 1, got {x!r}")
    complement = math.sqrt((1.0 - x) * (1.0 + x))
    return math.pi / (2.0 * _agm(1.0, complement))


def complementary_ratio(x: float) -> float:
    """I(sqrt(1 - x^2)) / I(x), the nome exponent ratio used by the XY dispersion."""

    x = float(x)
    if not (0.0 < x < 1.0):
        raise ModulusOutOfRange(f"complementary ratio needs 0 < x < 1, got {x!r}")
    return elliptic_K(math.sqrt((1.0 - x) * (1.0 + x))) / elliptic_K(x)


def arccosh(t: float) -> float:
    """ln(t + sqrt(t^2 - 1)) on the physical branch t >= 1."""

    t = float(t)
    if not t >= 1.0:
        raise DomainError(f"arccosh is real only for t >= 1, got {t!r}")
    excess = t - 1.0
    return math.log1p(excess + math.sqrt(excess * (t + 1.0)))


__all__ = ("elliptic_K", "complementary_ratio", "arccosh")
