"""
Magnitudes stored as natural logarithms.

Every growth quantity (maximum modulus, maximum term, iterated radii) leaves
the float range almost immediately, so magnitudes travel as ``log`` values and
complex numbers as ``(log|z|, arg z)`` pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import total_ordering

import numpy as np

TWO_PI = 2.0 * math.pi


def wrap_phase(phase: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    w = math.remainder(phase, TWO_PI)
    if w <= -math.pi:
        w += TWO_PI
    return w


def log_of(value: float) -> float:
    """Natural log of a nonnegative magnitude, ``-inf`` for zero."""
    if value < 0:
        raise ValueError(f"magnitude must be nonnegative, got {value}")
    return -math.inf if value == 0 else math.log(value)


@total_ordering
@dataclass(frozen=True)
class LogScalar:
    """A nonnegative extended real represented by its natural logarithm."""

    log_value: float

    @classmethod
    def from_value(cls, value: float) -> LogScalar:
        return cls(log_of(value))

    @classmethod
    def zero(cls) -> LogScalar:
        return cls(-math.inf)

    @property
    def value(self) -> float:
        """The plain float (may overflow to ``inf``)."""
        try:
            return math.exp(self.log_value)
        except OverflowError:
            return math.inf

    @property
    def is_zero(self) -> bool:
        return self.log_value == -math.inf

    def __mul__(self, other: LogScalar) -> LogScalar:
        return LogScalar(self.log_value + other.log_value)

    def __truediv__(self, other: LogScalar) -> LogScalar:
        if other.is_zero:
            raise ZeroDivisionError("division by a zero LogScalar")
        return LogScalar(self.log_value - other.log_value)

    def __add__(self, other: LogScalar) -> LogScalar:
        return LogScalar(float(np.logaddexp(self.log_value, other.log_value)))

    def __pow__(self, exponent: float) -> LogScalar:
        if self.is_zero:
            return self if exponent > 0 else LogScalar(0.0)
        return LogScalar(self.log_value * exponent)

    def __lt__(self, other: LogScalar) -> bool:
        return self.log_value < other.log_value

    def __repr__(self) -> str:
        return f"LogScalar(exp({self.log_value!r}))"


@dataclass(frozen=True)
class LogComplex:
    """The complex number ``exp(log_mag) * exp(i*phase)``."""

    log_mag: float
    phase: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "phase", wrap_phase(self.phase) if math.isfinite(self.phase) else 0.0)

    @classmethod
    def from_complex(cls, z: complex) -> LogComplex:
        if z == 0:
            return cls(-math.inf, 0.0)
        return cls(math.log(abs(z)), math.atan2(z.imag, z.real))

    @property
    def modulus(self) -> LogScalar:
        return LogScalar(self.log_mag)

    @property
    def is_zero(self) -> bool:
        return self.log_mag == -math.inf

    def to_complex(self) -> complex:
        """Plain complex value; raises OverflowError outside the float range."""
        if self.is_zero:
            return 0j
        m = math.exp(self.log_mag)
        return complex(m * math.cos(self.phase), m * math.sin(self.phase))

    def __mul__(self, other: LogComplex) -> LogComplex:
        return LogComplex(self.log_mag + other.log_mag, self.phase + other.phase)
