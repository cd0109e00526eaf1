"""
Hyperbolic Plane Geometry

Points of the upper half-plane, orientation-preserving isometries as
unit-determinant 2x2 matrices up to sign, hyperbolic distance and the
trace classification of isometries.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Tuple

import mpmath
import numpy as np

from .errors import DomainError, NotHyperbolicError

TRACE_TOL = 1e-12
SIGN_TOL = 1e-12

# Products of two doubles are exact at 106 bits; the context is never mutated.
_EXACT = mpmath.MPContext()
_EXACT.prec = 160


@dataclass(frozen=True)
class Point:
    """A point x + iy of the upper half-plane."""

    x: float
    y: float

    def __post_init__(self):
        if not self.y > 0:
            raise DomainError(f"upper half-plane point needs y > 0, got y={self.y}")

    @classmethod
    def from_complex(cls, z: complex) -> "Point":
        return cls(z.real, z.imag)

    def to_complex(self) -> complex:
        return complex(self.x, self.y)


def _canonical_sign(entries: Tuple[float, float, float, float]) -> Tuple[float, float, float, float]:
    for v in entries:
        if abs(v) > SIGN_TOL:
            return entries if v > 0 else tuple(-e for e in entries)
    return entries


def exact_det(a: float, b: float, c: float, d: float) -> float:
    """ad - bc of float entries without cancellation in the subtraction."""
    mpf = _EXACT.mpf
    return float(mpf(a) * mpf(d) - mpf(b) * mpf(c))


def det_tolerance(a: float, b: float, c: float, d: float) -> float:
    """Unit-determinant tolerance for a matrix of this size; rounding grows with the entries squared."""
    return TRACE_TOL * max(1.0, a * a + b * b + c * c + d * d)


@dataclass(frozen=True)
class MoebiusElement:
    """
    Element of PSL(2,R) stored as a canonical SL(2,R) representative.

    Use MoebiusElement.normalized to build one from arbitrary positive
    determinant entries; the plain constructor checks the invariants.
    """

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        det = exact_det(self.a, self.b, self.c, self.d)
        if abs(det - 1.0) > det_tolerance(self.a, self.b, self.c, self.d):
            raise DomainError(f"determinant {det!r} is not 1")
        entries = (self.a, self.b, self.c, self.d)
        if _canonical_sign(entries) != entries:
            raise DomainError("matrix is not in canonical sign")

    @classmethod
    def normalized(cls, a: float, b: float, c: float, d: float) -> "MoebiusElement":
        """
        Scale to unit determinant and pick the canonical sign.

        Args:
            a, b, c, d (float): Row-major entries with positive determinant

        Returns:
            MoebiusElement: Canonical representative
        """
        det = exact_det(a, b, c, d)
        if not det > 0:
            raise DomainError(f"matrix with determinant {det!r} is not in GL+(2,R)")
        s = math.sqrt(det)
        a, b, c, d = _canonical_sign((a / s, b / s, c / s, d / s))
        # One correction step absorbs the rounding left by the division.
        det = exact_det(a, b, c, d)
        if abs(det - 1.0) > det_tolerance(a, b, c, d):
            s = math.sqrt(det)
            a, b, c, d = a / s, b / s, c / s, d / s
        return cls(float(a), float(b), float(c), float(d))

    @classmethod
    def from_array(cls, m: np.ndarray) -> "MoebiusElement":
        m = np.asarray(m, dtype=float).reshape(2, 2)
        return cls.normalized(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    @classmethod
    def identity(cls) -> "MoebiusElement":
        return cls(1.0, 0.0, 0.0, 1.0)

    def as_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    def as_tuple(self) -> Tuple[float, float, float, float]:
        return (self.a, self.b, self.c, self.d)

    @property
    def trace(self) -> float:
        return self.a + self.d

    def __matmul__(self, other: "MoebiusElement") -> "MoebiusElement":
        return MoebiusElement.normalized(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> "MoebiusElement":
        return MoebiusElement.normalized(self.d, -self.b, -self.c, self.a)

    def power(self, m: int) -> "MoebiusElement":
        """Repeated product; negative m uses the inverse."""
        base = self if m >= 0 else self.inverse()
        result = MoebiusElement.identity()
        for _ in range(abs(m)):
            result = result @ base
        return result

    def act(self, z: Point) -> Point:
        w = z.to_complex()
        image = (self.a * w + self.b) / (self.c * w + self.d)
        return Point.from_complex(image)

    def is_identity(self, tol: float = 1e-9) -> bool:
        return max(abs(self.a - 1.0), abs(self.b), abs(self.c), abs(self.d - 1.0)) <= tol


class IsometryKind(Enum):
    IDENTITY = "identity"
    ELLIPTIC = "elliptic"
    PARABOLIC = "parabolic"
    HYPERBOLIC = "hyperbolic"


@dataclass(frozen=True)
class IsometryClass:
    """Trace classification; length is 0 unless the kind is hyperbolic."""

    kind: IsometryKind
    length: float = 0.0


def length_from_trace(trace: float) -> float:
    """
    Translation length 2*arccosh(|tr|/2).

    Written as 2*log((|t| + sqrt((|t|-2)(|t|+2)))/2) to keep precision
    for traces close to 2.
    """
    t = abs(trace)
    return 2.0 * math.log((t + math.sqrt((t - 2.0) * (t + 2.0))) / 2.0)


def hyperbolic_distance(z: Point, w: Point) -> float:
    """
    Hyperbolic distance in the upper half-plane.

    Uses sinh(d/2) = |z - w| / (2 sqrt(y v)), equivalent to
    cosh^2(d/2) = |z - conj(w)|^2 / (4 y v) but accurate at short range.

    Args:
        z (Point): First point
        w (Point): Second point

    Returns:
        float: Distance d >= 0
    """
    for p in (z, w):
        if not isinstance(p, Point):
            raise DomainError(f"expected a Point, got {type(p).__name__}")
    chord = math.hypot(z.x - w.x, z.y - w.y)
    return 2.0 * math.asinh(chord / (2.0 * math.sqrt(z.y * w.y)))


def classify(g: MoebiusElement) -> IsometryClass:
    """Classify an isometry by its trace."""
    if g.is_identity(TRACE_TOL):
        return IsometryClass(IsometryKind.IDENTITY)
    t = abs(g.trace)
    if t > 2.0 + TRACE_TOL:
        return IsometryClass(IsometryKind.HYPERBOLIC, length_from_trace(t))
    if abs(t - 2.0) <= TRACE_TOL:
        return IsometryClass(IsometryKind.PARABOLIC)
    return IsometryClass(IsometryKind.ELLIPTIC)


def translation_length_power(g: MoebiusElement, m: int) -> float:
    """
    Length of g**m, i.e. m times the translation length of g.

    Args:
        g (MoebiusElement): Hyperbolic element
        m (int): Positive power

    Returns:
        float: Translation length of g**m
    """
    if m < 1:
        raise DomainError(f"power must be a positive integer, got {m}")
    cls = classify(g)
    if cls.kind is not IsometryKind.HYPERBOLIC:
        raise NotHyperbolicError(f"element is {cls.kind.value}, not hyperbolic")
    return m * cls.length
