"""
Heat Kernel and Heat Trace

The heat kernel of the hyperbolic plane, the non-identity part of the heat
trace of a compact surface from its length spectrum (Selberg trace
formula), the large-time lower bound for that trace, the threshold time
t0 where the identity term becomes small, and truncated periodization of
the kernel over a surface group.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np

from .config import load_settings
from .errors import DomainError, RangeError, SearchFailureError, WordBudgetExceeded
from .extended_log import ExtendedLog
from .length_spectrum import (ElementIndex, LengthSpectrum, free_word_count, key_radii,
                              word_levels)
from .moebius import Point, hyperbolic_distance
from .quadrature import DEFAULT_QUADRATURE, QuadratureSettings, integrate_interval
from .surface_group import GroupPresentation

logger = logging.getLogger(__name__)

GAUSSIAN_CUTOFF = 60.0  # integrand truncated where the Gaussian factor drops below e^-60
DEFAULT_POWER_CAP = 50


@dataclass(frozen=True)
class HeatTraceSample:
    """
    Non-identity heat trace HTr K_X(t) with its truncation bookkeeping.

    Attributes:
        t (float): Time
        value (float): Sum over the listed geodesics and powers
        tail_bound (float): Bound on the omitted mass (may be inf)
        tail_log_bound (ExtendedLog): Natural log of the omitted-mass bound
        power_cap (int): Largest power summed per geodesic
    """

    t: float
    value: float
    tail_bound: float
    tail_log_bound: ExtendedLog
    power_cap: int

    @property
    def upper_estimate(self) -> float:
        return self.value + self.tail_bound

    def satisfies_lower_bound(self, bound: float) -> bool:
        """Whether the summed value alone meets HTr >= bound; the tail is never credited."""
        return self.value >= bound


def _log_sinh(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    big = x > 20.0
    safe = np.where(big, 1.0, x)
    return np.where(big, x - math.log(2.0) + np.log1p(-np.exp(-2.0 * np.where(big, x, 1.0))),
                    np.log(np.sinh(safe)))


def heat_kernel_h_scaled(t: float, rho: float,
                         quad: QuadratureSettings = DEFAULT_QUADRATURE) -> float:
    """
    e^{t/4} K_H(t; rho).

    The substitution s = rho + sigma^2 removes the inverse square root at
    s = rho. The Gaussian e^{-rho^2/4t} is factored out of the integral.

    Args:
        t (float): Time, > 0
        rho (float): Distance, >= 0
        quad (QuadratureSettings): Tolerances

    Returns:
        float: Scaled kernel value
    """
    if not t > 0:
        raise DomainError(f"heat kernel time must be positive, got {t}")
    if not rho >= 0:
        raise DomainError(f"distance must be non-negative, got {rho}")

    log_front = 0.5 * math.log(2.0) - 1.5 * math.log(4.0 * math.pi * t) - rho * rho / (4.0 * t)
    if log_front < -745.0:
        return 0.0

    def integrand(sigma: float) -> float:
        if sigma == 0.0:
            return 0.0 if rho == 0.0 else 2.0 * rho / math.sqrt(math.sinh(rho))
        h = 0.5 * sigma * sigma
        s = rho + sigma * sigma
        gauss = -(2.0 * rho * sigma * sigma + sigma ** 4) / (4.0 * t)
        log_den = 0.5 * (math.log(2.0) + float(_log_sinh(rho + h)) + float(_log_sinh(h)))
        return s * 2.0 * sigma * math.exp(gauss - log_den)

    # Gaussian exponent (2 rho sigma^2 + sigma^4)/4t reaches GAUSSIAN_CUTOFF here.
    q = 4.0 * t * GAUSSIAN_CUTOFF
    sigma2 = -rho + math.sqrt(rho * rho + q)
    sigma_max = math.sqrt(sigma2)
    value, _ = integrate_interval(integrand, 0.0, sigma_max, quad)
    return math.exp(log_front) * value


def heat_kernel_h(t: float, rho: float, quad: QuadratureSettings = DEFAULT_QUADRATURE) -> float:
    """
    Heat kernel of the hyperbolic plane.

    K_H(t; rho) = sqrt(2) e^{-t/4} / (4 pi t)^{3/2}
                  * int_rho^inf s e^{-s^2/4t} / sqrt(cosh s - cosh rho) ds

    Args:
        t (float): Time, > 0
        rho (float): Hyperbolic distance, >= 0
        quad (QuadratureSettings): Quadrature tolerances

    Returns:
        float: Kernel density
    """
    scaled = heat_kernel_h_scaled(t, rho, quad)
    return scaled * math.exp(-t / 4.0)


def _trace_terms(lengths: np.ndarray, mults: np.ndarray, t: float, power_cap: int) -> np.ndarray:
    """Summands mult * l * e^{-(n l)^2/4t} / sinh(n l/2), shape (entries, powers)."""
    n = np.arange(1, power_cap + 1, dtype=float)
    x = lengths[:, None] * n[None, :]
    log_terms = -x * x / (4.0 * t) - x / 2.0 + math.log(2.0) - np.log(-np.expm1(-x))
    return (mults * lengths)[:, None] * np.exp(log_terms)


def heat_trace_prefactor(t: float) -> float:
    return math.exp(-t / 4.0) / (2.0 * math.sqrt(4.0 * math.pi * t))


def heat_trace_series(spec: LengthSpectrum, t: float, power_cap: int = DEFAULT_POWER_CAP) -> float:
    """Truncated geometric side without tail bookkeeping or stabilization checks."""
    if spec.is_empty:
        return 0.0
    terms = _trace_terms(spec.lengths, spec.multiplicities, t, power_cap)
    return heat_trace_prefactor(t) * math.fsum(terms.ravel())


def _log_power_tail(lengths, mults, t, power_cap) -> float:
    """Log bound on sum over n > power_cap of the per-geodesic terms."""
    n1 = power_cap + 1
    a = lengths * lengths / (4.0 * t)
    x = n1 * lengths
    log_each = (np.log(mults * lengths) + math.log(2.0) - x / 2.0 - np.log(-np.expm1(-x))
                - n1 * n1 * a - np.log(-np.expm1(-(2 * n1) * a)))
    return float(np.logaddexp.reduce(log_each))


def _log_primitive_tail(spec: LengthSpectrum, t: float) -> float:
    """
    Log bound on geodesics beyond the cutoff.

    Unit bins (u, u+1] hold at most e^{A+u+1} geodesics with
    A = 80 pi (g-1)/l_X; the summand is bounded by its decreasing majorant.
    """
    A = 80.0 * math.pi * (spec.genus - 1) / spec.systole
    u0 = spec.cutoff
    stop = max(u0, 2.0 * t) + 80.0
    us = np.arange(u0, stop + 1.0, 1.0)
    a = us * us / (4.0 * t)
    log_f = (np.log(us) - a + math.log(2.0) - us / 2.0 - np.log(-np.expm1(-us))
             - np.log(-np.expm1(-3.0 * a)))
    return float(np.logaddexp.reduce(A + us + 1.0 + log_f))


def heat_trace(spec: LengthSpectrum, t: float, power_cap: int = DEFAULT_POWER_CAP) -> HeatTraceSample:
    """
    Non-identity heat trace from the length spectrum.

    HTr K_X(t) = e^{-t/4} / (2 sqrt(4 pi t))
                 * sum_gamma sum_n l e^{-(n l)^2/4t} / sinh(n l/2)

    Args:
        spec (LengthSpectrum): Stabilized spectrum
        t (float): Time, > 0
        power_cap (int): Largest power per geodesic; at least 1

    Returns:
        HeatTraceSample: Value and truncation bound
    """
    if not t > 0:
        raise DomainError(f"time must be positive, got {t}")
    if power_cap < 1:
        raise DomainError(f"power_cap must be at least 1, got {power_cap}")
    spec.require_usable()

    value = heat_trace_series(spec, t, power_cap)
    log_pref = -t / 4.0 - math.log(2.0 * math.sqrt(4.0 * math.pi * t))
    log_tail = log_pref + float(np.logaddexp(
        _log_power_tail(spec.lengths, spec.multiplicities, t, power_cap),
        _log_primitive_tail(spec, t)))
    tail = math.exp(log_tail) if log_tail < 700.0 else math.inf
    return HeatTraceSample(t, value, tail, ExtendedLog.finite(log_tail), power_cap)


def identity_term(g: int, t: float) -> float:
    """Contribution 4 pi (g-1) K_H(t; 0) of the identity element."""
    return 4.0 * math.pi * (g - 1) * heat_kernel_h(t, 0.0)


def assembled_heat_trace(spec: LengthSpectrum, t: float,
                         power_cap: int = DEFAULT_POWER_CAP) -> float:
    """Identity term plus HTr: the geometric side of sum_k e^{-lambda_k t}."""
    return identity_term(spec.genus, t) + heat_trace(spec, t, power_cap).value


def heat_trace_lower_bound(g: int, t: float) -> float:
    """
    Lower bound 1 - 4 pi (g-1) K_H(t; 0) for HTr K_X(t), valid for t > 2.

    Raises:
        RangeError: t <= 2
    """
    if g < 2:
        raise DomainError(f"genus must be at least 2, got {g}")
    if not t > 2.0:
        raise RangeError(f"the heat trace lower bound needs t > 2, got {t}")
    return 1.0 - identity_term(g, t)


def find_t0(g: int, step: float = 0.5, window: float = 10.0, tol: float = 1e-6,
            t_max: float = 1e4) -> float:
    """
    Smallest t > 2 with K_H(t; 0) <= e^{-t/4} / (4 pi (g-1)).

    The inequality is checked in the scaled form 4 pi (g-1) e^{t/4} K_H(t;0) <= 1,
    must persist at unit steps over [t, t + window], and the crossing is
    refined by bisection to `tol`. When the inequality already holds just
    above 2, returns 2 + tol.

    Args:
        g (int): Genus, >= 2
        step (float): Coarse grid step
        window (float): Persistence window
        tol (float): Bisection resolution
        t_max (float): Search limit

    Returns:
        float: Threshold time t0 > 2
    """
    if g < 2:
        raise DomainError(f"genus must be at least 2, got {g}")
    volume = 4.0 * math.pi * (g - 1)

    def holds(t: float) -> bool:
        return volume * heat_kernel_h_scaled(t, 0.0) <= 1.0

    def persists(t: float) -> bool:
        return all(holds(t + j) for j in np.arange(1.0, window + 0.5, 1.0))

    first = 2.0 + tol
    if holds(first) and persists(first):
        return first

    lo, hi = first, 2.0 + step
    while not (holds(hi) and persists(hi)):
        lo, hi = hi, hi + step
        if hi > t_max:
            raise SearchFailureError(f"no t0 found below {t_max} for genus {g}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if holds(mid):
            hi = mid
        else:
            lo = mid
    logger.debug("t0(%d) = %.9f", g, hi)
    return hi


@dataclass(frozen=True)
class PeriodizedKernel:
    """Truncated periodized kernel with its convergence indicator."""

    value: float
    last_shell_increment: float
    depth: int
    element_count: int


def periodized_kernel(G: GroupPresentation, t: float, z: Point, w: Point, max_depth: int,
                      quad: QuadratureSettings = DEFAULT_QUADRATURE,
                      word_budget: Optional[int] = None) -> PeriodizedKernel:
    """
    Sum of K_H(t; d(z, gamma w)) over distinct group elements of word depth <= max_depth.

    Args:
        G (GroupPresentation): Surface group
        t (float): Time
        z (Point): First point
        w (Point): Second point
        max_depth (int): Word depth; 0 keeps the identity only
        quad (QuadratureSettings): Kernel quadrature tolerances
        word_budget (int): Overrides the configured word budget

    Returns:
        PeriodizedKernel: Sum, last-shell increment and element count
    """
    if max_depth < 0:
        raise DomainError(f"max_depth must be non-negative, got {max_depth}")
    budget = word_budget or load_settings().word_budget
    required = free_word_count(G.rank, max_depth)
    if required > budget:
        raise WordBudgetExceeded(required, budget)

    total = heat_kernel_h(t, hyperbolic_distance(z, w), quad)
    if max_depth == 0:
        return PeriodizedKernel(total, total, 0, 1)

    mats, spreads, depths = [np.eye(2)[None]], [np.eye(2)[None]], [np.zeros(1, dtype=int)]
    for depth, _, level, spread in word_levels(G.letter_matrices(), max_depth):
        mats.append(level)
        spreads.append(spread)
        depths.append(np.full(len(level), depth))
    mats = np.concatenate(mats)
    depths = np.concatenate(depths)
    # Words are stored shallowest first, so each element keeps its first spelling.
    index = ElementIndex(mats, key_radii(np.concatenate(spreads)), np.arange(len(mats)))
    _, labels = index.components(len(mats))
    _, first = np.unique(labels, return_index=True)
    first = np.sort(first)

    wz = w.to_complex()
    shells: Dict[int, List[float]] = {}
    for i in first[1:]:
        m = mats[i]
        image = (m[0, 0] * wz + m[0, 1]) / (m[1, 0] * wz + m[1, 1])
        rho = hyperbolic_distance(z, Point(image.real, image.imag))
        shells.setdefault(int(depths[i]), []).append(heat_kernel_h(t, rho, quad))
    increment = math.fsum(shells.get(max_depth, []))
    total += math.fsum(math.fsum(v) for v in shells.values())
    return PeriodizedKernel(total, increment, max_depth, len(first))
