"""
Selberg Zeta Function

log Z_X(s) and Z'/Z(s) from the Euler product over the primitive length
spectrum, the same derivative through the McKean heat-trace integral, the
ratio log(Z(n)/Z(2)) by two routes, and an experimental estimate of Z'(1).
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .config import Settings, load_settings
from .errors import ConsistencyError, DomainError, RangeError, TailDivergenceError
from .extended_log import ExtendedLog
from .heat import DEFAULT_POWER_CAP, _trace_terms
from .length_spectrum import LengthSpectrum
from .quadrature import QuadratureSettings, integrate_interval

logger = logging.getLogger(__name__)

DEFAULT_K_MAX = 40
RATIO_TOL = 1e-6
ZETA_QUADRATURE = QuadratureSettings(epsabs=1e-12, epsrel=1e-9, limit=400)


@dataclass(frozen=True)
class ZetaEvaluation:
    """
    Truncated log Z_X(s).

    Attributes:
        s (float): Evaluation point, > 1
        log_value (float): Sum of log(1 - e^{-(s+k) l}) over listed geodesics, k <= k_terms
        k_terms (int): Last k kept in the inner product
        spectrum_cutoff (float): Cutoff of the spectrum used
        tail_log_bound (ExtendedLog): Log bound on |omitted part of log Z|
    """

    s: float
    log_value: float
    k_terms: int
    spectrum_cutoff: float
    tail_log_bound: ExtendedLog


@dataclass(frozen=True)
class ZetaPrimeEstimate:
    """Richardson estimate of log Z'(1); no error control."""

    log_value: float
    samples: Tuple[Tuple[float, float], ...]
    experimental: bool = True


def _check_point(spec: LengthSpectrum, s: float, k_max: int, settings: Settings):
    if not s > 1.0:
        raise RangeError(f"the Euler product needs s > 1, got {s}")
    if k_max < 1:
        raise DomainError(f"k_max must be at least 1, got {k_max}")
    spec.require_usable()
    if s - 1.0 <= settings.zeta_tail_margin:
        raise TailDivergenceError(
            f"primitive tail bound diverges at s={s}; need s > 1 + {settings.zeta_tail_margin}")


def _factor_exponents(spec: LengthSpectrum, s: float, k_max: int) -> np.ndarray:
    k = np.arange(0, k_max + 1, dtype=float)
    return (s + k)[None, :] * spec.lengths[:, None]


def _log_tail(spec: LengthSpectrum, s: float, k_max: int) -> ExtendedLog:
    """Log of the k-tail (geometric series) plus the tail beyond the cutoff."""
    lengths, mults = spec.lengths, spec.multiplicities
    x = (s + k_max + 1) * lengths
    k_tail = np.log(mults) - x - np.log(-np.expm1(-x)) - np.log(-np.expm1(-lengths))

    A = 80.0 * math.pi * (spec.genus - 1) / spec.systole
    L = spec.cutoff
    prim_tail = (math.log(s) - math.log(s - 1.0) + A + (1.0 - s) * L
                 - math.log(-math.expm1(-s * L)) - math.log(-math.expm1(-L)))
    return ExtendedLog.finite(float(np.logaddexp.reduce(np.append(k_tail, prim_tail))))


def selberg_zeta_log(spec: LengthSpectrum, s: float, k_max: int = DEFAULT_K_MAX,
                     settings: Optional[Settings] = None) -> ZetaEvaluation:
    """
    Truncated Euler product for log Z_X(s).

    log Z_X(s) ~ sum_gamma sum_{k=0}^{k_max} log(1 - e^{-(s+k) l(gamma)})

    Args:
        spec (LengthSpectrum): Stabilized, non-empty spectrum
        s (float): Point with s > 1
        k_max (int): Last k in the inner product

    Returns:
        ZetaEvaluation: Value with tail bound
    """
    settings = settings or load_settings()
    _check_point(spec, s, k_max, settings)
    x = _factor_exponents(spec, s, k_max)
    terms = spec.multiplicities[:, None] * np.log1p(-np.exp(-x))
    log_value = math.fsum(terms.ravel())
    if log_value > 0.0:
        raise ConsistencyError(f"log Z({s}) = {log_value} is positive")
    return ZetaEvaluation(float(s), log_value, k_max, spec.cutoff, _log_tail(spec, s, k_max))


def zeta_log_derivative_product(spec: LengthSpectrum, s: float, k_max: int = DEFAULT_K_MAX,
                                settings: Optional[Settings] = None) -> float:
    """
    Z'/Z(s) as the termwise derivative of the Euler product.

    sum_gamma sum_k l e^{-(s+k) l} / (1 - e^{-(s+k) l})
    """
    settings = settings or load_settings()
    _check_point(spec, s, k_max, settings)
    x = _factor_exponents(spec, s, k_max)
    terms = (spec.multiplicities * spec.lengths)[:, None] / np.expm1(x)
    return math.fsum(terms.ravel())


def _mckean_integrand(spec: LengthSpectrum, s: float, power_cap: int):
    decay = (s - 0.5) ** 2
    lengths, mults = spec.lengths, spec.multiplicities

    def f(t: float) -> float:
        if t <= 0.0:
            return 0.0
        terms = _trace_terms(lengths, mults, t, power_cap)
        return math.exp(-decay * t) / (2.0 * math.sqrt(4.0 * math.pi * t)) * math.fsum(terms.ravel())

    return f


def zeta_log_derivative_mckean(spec: LengthSpectrum, s: float,
                               quad: QuadratureSettings = ZETA_QUADRATURE,
                               power_cap: int = DEFAULT_POWER_CAP) -> float:
    """
    Z'/Z(s) = (2s - 1) int_0^inf HTr K_X(t) e^{-s(s-1)t} dt.

    The exponents combine to e^{-(s-1/2)^2 t}; each term peaks at
    t = n l / (2s - 1), which are passed to the integrator as break points.

    Args:
        spec (LengthSpectrum): Stabilized, non-empty spectrum
        s (float): Point; s >= 2 is the intended range
        quad (QuadratureSettings): Integration tolerances
        power_cap (int): Powers per geodesic in the heat trace

    Returns:
        float: Z'/Z(s)
    """
    if not s > 1.0:
        raise RangeError(f"the McKean route needs s > 1, got {s}")
    if s < 2.0:
        logger.warning("McKean route used at s=%g below its intended range s >= 2", s)
    spec.require_usable()

    decay = (s - 0.5) ** 2
    peaks = sorted({float(n * l / (2.0 * s - 1.0))
                    for l in spec.lengths for n in (1, 2, 3)})[:100]
    upper = 4.0 * max(peaks) + 40.0 / decay
    f = _mckean_integrand(spec, s, power_cap)
    while f(upper) > 1e-16 * max(f(p) for p in peaks):
        upper *= 2.0
    value, _ = integrate_interval(f, 0.0, upper, quad, points=peaks)
    return (2.0 * s - 1.0) * value


def zeta_ratio_log(spec: LengthSpectrum, n: int, k_max: int = DEFAULT_K_MAX,
                   quad: QuadratureSettings = ZETA_QUADRATURE) -> float:
    """
    log Z_X(n) - log Z_X(2), checked against the integral of Z'/Z over [2, n].

    Raises:
        ConsistencyError: The two routes differ by more than 1e-6
    """
    if n < 2:
        raise DomainError(f"n must be at least 2, got {n}")
    if n == 2:
        return 0.0
    difference = (selberg_zeta_log(spec, float(n), k_max).log_value
                  - selberg_zeta_log(spec, 2.0, k_max).log_value)
    integral, _ = integrate_interval(
        lambda s: zeta_log_derivative_product(spec, s, k_max), 2.0, float(n), quad)
    if abs(difference - integral) > RATIO_TOL:
        raise ConsistencyError(
            f"log Z({n}) - log Z(2): difference {difference!r} vs integral {integral!r}")
    return difference


def estimate_zeta_prime_at_one(spec: LengthSpectrum, k_max: int = DEFAULT_K_MAX,
                               steps: Sequence[float] = (0.1, 0.05, 0.025)) -> ZetaPrimeEstimate:
    """
    Experimental: log Z'(1) by Richardson extrapolation of log(Z(1+h)/h).

    Z has a simple zero at s = 1, which a truncated product cannot see, so
    the error of this estimate is not controlled.
    """
    h1, h2, h3 = steps
    if not (h1 > h2 > h3 > 0 and abs(h1 - 2 * h2) < 1e-15 and abs(h2 - 2 * h3) < 1e-15):
        raise DomainError(f"steps must halve successively, got {tuple(steps)}")
    logger.warning("Z'(1) estimate is experimental and has uncontrolled error")
    samples = tuple((1.0 + h, selberg_zeta_log(spec, 1.0 + h, k_max).log_value)
                    for h in steps)
    f = [log_z - math.log(h) for h, (_, log_z) in zip(steps, samples)]
    first = 2.0 * f[1] - f[0]
    second = 2.0 * f[2] - f[1]
    return ZetaPrimeEstimate((4.0 * second - first) / 3.0, samples)


def ratio_lower_integral(n: int, t0: float,
                       quad: QuadratureSettings = ZETA_QUADRATURE) -> float:
    """
    Lower bound for log(Z(n)/Z(2)) from the heat trace bound HTr >= 1 - e^{-t/4} on [t0, inf).

    int_2^n (2s-1) [e^{-a t0}/a - e^{-(a+1/4) t0}/(a+1/4)] ds,  a = s(s-1)
    """
    if n < 2:
        raise DomainError(f"n must be at least 2, got {n}")
    if not t0 > 0:
        raise DomainError(f"t0 must be positive, got {t0}")

    def f(s: float) -> float:
        a = s * (s - 1.0)
        return (2.0 * s - 1.0) * (math.exp(-a * t0) / a - math.exp(-(a + 0.25) * t0) / (a + 0.25))

    if n == 2:
        return 0.0
    value, _ = integrate_interval(f, 2.0, float(n), quad)
    return value


def ratio_upper_integral(n: int, quad: QuadratureSettings = ZETA_QUADRATURE) -> float:
    """int_2^n (2s-1)/(s(s-1) - 3/4) ds, which equals log((4n^2 - 4n - 3)/5)."""
    if n < 2:
        raise DomainError(f"n must be at least 2, got {n}")
    if n == 2:
        return 0.0
    value, _ = integrate_interval(lambda s: (2.0 * s - 1.0) / (s * (s - 1.0) - 0.75),
                                  2.0, float(n), quad)
    return value
