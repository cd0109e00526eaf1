"""
Adaptive quadrature wrapper.

Thin layer over scipy.integrate.quad that turns QUADPACK warnings into
QuadratureError so that callers never silently use an unconverged value.
"""

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

from scipy import integrate

from .errors import QuadratureError


@dataclass(frozen=True)
class QuadratureSettings:
    """
    Tolerances passed to scipy.integrate.quad.

    Attributes:
        epsabs (float): Absolute error target
        epsrel (float): Relative error target
        limit (int): Maximum number of subintervals
    """

    epsabs: float = 1e-13
    epsrel: float = 1e-11
    limit: int = 400

    def tightened(self, factor: float = 0.5) -> "QuadratureSettings":
        """Return settings with both tolerances scaled by `factor`."""
        return QuadratureSettings(self.epsabs * factor, self.epsrel * factor, self.limit * 2)


DEFAULT_QUADRATURE = QuadratureSettings()


def integrate_interval(f: Callable[[float], float], a: float, b: float,
                       settings: QuadratureSettings = DEFAULT_QUADRATURE,
                       points: Optional[Sequence[float]] = None) -> Tuple[float, float]:
    """
    Integrate f over [a, b].

    Args:
        f (Callable): Integrand
        a (float): Lower limit
        b (float): Upper limit (finite)
        settings (QuadratureSettings): Error targets
        points (Sequence[float]): Interior break points, e.g. integrand peaks

    Returns:
        Tuple[float, float]: (value, estimated absolute error)
    """
    kwargs = {}
    if points:
        inner = sorted({p for p in points if a < p < b})
        if inner:
            kwargs["points"] = inner
    out = integrate.quad(f, a, b, epsabs=settings.epsabs, epsrel=settings.epsrel,
                         limit=settings.limit, full_output=1, **kwargs)
    value, error = out[0], out[1]
    if len(out) > 3:
        raise QuadratureError(f"quadrature on [{a:g}, {b:g}] did not converge: {out[3]}")
    return value, error
