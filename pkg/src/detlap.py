"""
Regularized Determinants

Barnes G at integers, the Glaisher-Kinkelin constant, zeta'(-1), the
constants c_n and C_{g,n}, and the assembly of log det* of the weight-n
hyperbolic Laplacian from a Selberg zeta value.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import mpmath
from scipy.special import bernoulli, gammaln

from .errors import DomainError, ExperimentalFeatureError, ParameterMismatchError
from .zeta import ZetaEvaluation, ZetaPrimeEstimate

logger = logging.getLogger(__name__)

EULER_MACLAURIN_N = 40
EULER_MACLAURIN_TERMS = 8
GLAISHER_METHODS = ("euler-maclaurin", "zeta-prime-two")


@dataclass(frozen=True)
class SpectralConstants:
    """
    Constants entering the determinant formula for genus g and weight n.

    Attributes:
        g (int): Genus
        n (int): Weight
        c_n (float): Weight constant
        log_C_gn (float): log C_{g,n} = -c_n * vol
        vol (float): Hyperbolic area 4*pi*(g - 1)
    """

    g: int
    n: int
    c_n: float
    log_C_gn: float
    vol: float


def log_barnes_g_int(m: int) -> float:
    """
    log G(m) for a positive integer m.

    G(m) = prod_{j=1}^{m-2} j!, so log G(m) = sum_{j=1}^{m-2} log Gamma(j + 1).
    """
    if m < 1:
        raise DomainError(f"Barnes G is only provided at positive integers, got {m}")
    return math.fsum(float(gammaln(j + 1)) for j in range(1, m - 1))


@lru_cache(maxsize=None)
def glaisher_log(method: str = "euler-maclaurin") -> float:
    """
    Natural log of the Glaisher-Kinkelin constant A.

    Args:
        method (str): "euler-maclaurin" sums k log k up to 40 with Bernoulli
            corrections; "zeta-prime-two" uses
            log A = (gamma + log 2pi - 6 zeta'(2)/pi^2) / 12 with mpmath.

    Returns:
        float: log A
    """
    if method == "euler-maclaurin":
        n = EULER_MACLAURIN_N
        partial = math.fsum(k * math.log(k) for k in range(2, n + 1))
        b = bernoulli(2 * EULER_MACLAURIN_TERMS)
        corrections = [b[2 * j] / (2 * j * (2 * j - 1) * (2 * j - 2)) * float(n) ** (2 - 2 * j)
                       for j in range(2, EULER_MACLAURIN_TERMS + 1)]
        main = (n * n / 2.0 + n / 2.0 + 1.0 / 12.0) * math.log(n) - n * n / 4.0
        return math.fsum([partial, -main] + corrections)
    if method == "zeta-prime-two":
        with mpmath.workdps(30):
            value = (mpmath.euler + mpmath.log(2 * mpmath.pi)
                     - 6 * mpmath.zeta(2, derivative=1) / mpmath.pi ** 2) / 12
            return float(value)
    raise DomainError(f"unknown method {method!r}; expected one of {GLAISHER_METHODS}")


@lru_cache(maxsize=None)
def zeta_prime_minus_one() -> float:
    """zeta'(-1) = 1/12 - log A."""
    return 1.0 / 12.0 - glaisher_log("euler-maclaurin")


def c_n_constant(n: int) -> float:
    """
    c_n for weight n >= 1.

    c_n = log G(2n-1)/2pi - (2n-3)/4pi log Gamma(2n-1) + (2n-1)^2/8pi
          - (2n-1) log(2pi)/8pi - zeta'(-1)/pi
    """
    if n < 1:
        raise DomainError(f"weight n must be at least 1, got {n}")
    m = 2 * n - 1
    return math.fsum([
        log_barnes_g_int(m) / (2.0 * math.pi),
        -(2 * n - 3) / (4.0 * math.pi) * float(gammaln(m)),
        m * m / (8.0 * math.pi),
        -m * math.log(2.0 * math.pi) / (8.0 * math.pi),
        -zeta_prime_minus_one() / math.pi,
    ])


def spectral_constants(g: int, n: int) -> SpectralConstants:
    if g < 2:
        raise DomainError(f"genus must be at least 2, got {g}")
    c_n = c_n_constant(n)
    vol = 4.0 * math.pi * (g - 1)
    return SpectralConstants(g, n, c_n, -c_n * vol, vol)


def log_det_laplacian(g: int, n: int, zeta_data: Union[ZetaEvaluation, ZetaPrimeEstimate, float],
                      experimental: bool = False) -> float:
    """
    log det* of the weight-n Laplacian on a genus-g surface.

    For n >= 2: log C_{g,n} + log Z(n) + 2(n + 1/3)(g - 1) log 2.
    For n = 1:  log C_{g,1} + log Z'(1) + (2(g - 1)/3 + 2) log 2, which needs
    an estimate of Z'(1) and experimental=True.

    Args:
        g (int): Genus
        n (int): Weight
        zeta_data: ZetaEvaluation at s = n or a bare log Z(n) (n >= 2);
            ZetaPrimeEstimate (n = 1)
        experimental (bool): Opt in to the n = 1 branch

    Returns:
        float: log det*
    """
    constants = spectral_constants(g, n)
    if n == 1:
        if not experimental:
            raise ExperimentalFeatureError(
                "the n = 1 determinant rests on an uncontrolled Z'(1) estimate; "
                "pass experimental=True")
        if not isinstance(zeta_data, ZetaPrimeEstimate):
            raise ParameterMismatchError("n = 1 needs a ZetaPrimeEstimate")
        logger.warning("n = 1 determinant uses an experimental Z'(1) estimate")
        power = 2.0 * (g - 1) / 3.0 + 2.0
        return constants.log_C_gn + zeta_data.log_value + power * math.log(2.0)

    if isinstance(zeta_data, ZetaPrimeEstimate):
        raise ParameterMismatchError(f"n = {n} needs log Z({n}), not a Z'(1) estimate")
    if isinstance(zeta_data, ZetaEvaluation):
        if abs(zeta_data.s - n) > 1e-12:
            raise ParameterMismatchError(
                f"zeta value was evaluated at s={zeta_data.s}, expected s={n}")
        log_z = zeta_data.log_value
    else:
        log_z = float(zeta_data)
    return constants.log_C_gn + log_z + 2.0 * (n + 1.0 / 3.0) * (g - 1) * math.log(2.0)
