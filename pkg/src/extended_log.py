"""
Saturating log-scale scalar.

Envelope values such as exp(exp(160*pi/ell)) overflow even on a log scale.
ExtendedLog keeps the natural log when it is representable and otherwise
records the inner exponent that overflowed.
"""

import math
from dataclasses import dataclass
from enum import Enum
from functools import total_ordering
from typing import Iterable, Tuple

import numpy as np

from .errors import SchemaError

SATURATION_EXPONENT = 700.0


class LogState(Enum):
    FINITE = "finite"
    SATURATED = "sat"


@total_ordering
@dataclass(frozen=True)
class ExtendedLog:
    """
    A natural-log value, or a marker for a log too large to represent.

    Saturated values compare above every finite value and among themselves
    by their inner exponent.
    """

    state: LogState
    value: float

    @classmethod
    def finite(cls, log_value: float) -> "ExtendedLog":
        if math.isnan(log_value):
            raise ValueError("ExtendedLog cannot hold NaN")
        return cls(LogState.FINITE, float(log_value))

    @classmethod
    def saturated(cls, inner_exponent: float) -> "ExtendedLog":
        return cls(LogState.SATURATED, float(inner_exponent))

    @classmethod
    def from_exp_sum(cls, offset: float, terms: Iterable[Tuple[float, float]],
                     threshold: float = SATURATION_EXPONENT) -> "ExtendedLog":
        """
        Build log(offset_term) where the log equals offset + sum(w * exp(b)).

        Args:
            offset (float): Additive part of the log
            terms (Iterable): Pairs (b, w) with w > 0
            threshold (float): Saturate when any b exceeds this

        Returns:
            ExtendedLog: Finite log, or saturated at the largest exponent
        """
        terms = list(terms)
        exponents = [b for b, _ in terms]
        if exponents and max(exponents) > threshold:
            return cls.saturated(max(exponents))
        total = math.fsum([offset] + [w * math.exp(b) for b, w in terms])
        if math.isinf(total):
            return cls.saturated(max(exponents))
        return cls.finite(total)

    @property
    def is_saturated(self) -> bool:
        return self.state is LogState.SATURATED

    @property
    def log_value(self) -> float:
        if self.is_saturated:
            raise ValueError("saturated ExtendedLog has no finite log value")
        return self.value

    @property
    def inner_exponent(self) -> float:
        if not self.is_saturated:
            raise ValueError("finite ExtendedLog has no inner exponent")
        return self.value

    def _key(self) -> Tuple[int, float]:
        return (1 if self.is_saturated else 0, self.value)

    def __lt__(self, other):
        if isinstance(other, (int, float)):
            other = ExtendedLog.finite(other)
        if not isinstance(other, ExtendedLog):
            return NotImplemented
        return self._key() < other._key()

    def __le__(self, other):
        if isinstance(other, (int, float)):
            other = ExtendedLog.finite(other)
        if not isinstance(other, ExtendedLog):
            return NotImplemented
        return self._key() <= other._key()

    def __add__(self, shift: float) -> "ExtendedLog":
        """Multiply the underlying quantity by exp(shift)."""
        if self.is_saturated:
            return self
        return ExtendedLog.finite(self.value + shift)

    def log_add(self, other: "ExtendedLog") -> "ExtendedLog":
        """Log of the sum of the two underlying quantities."""
        if self.is_saturated or other.is_saturated:
            inner = max(x.value for x in (self, other) if x.is_saturated)
            return ExtendedLog.saturated(inner)
        return ExtendedLog.finite(float(np.logaddexp(self.value, other.value)))

    def bounds(self, log_x: float) -> bool:
        """True when log_x <= self; always true for saturated values."""
        return self.is_saturated or log_x <= self.value

    def to_wire(self) -> str:
        return f"{self.state.value}:{self.value:.17g}"

    @classmethod
    def from_wire(cls, text: str) -> "ExtendedLog":
        tag, _, number = text.partition(":")
        try:
            state = LogState(tag)
            value = float(number)
        except ValueError:
            raise SchemaError(f"not an ExtendedLog wire value: {text!r}") from None
        return cls(state, value)

    def __str__(self) -> str:
        return self.to_wire()

