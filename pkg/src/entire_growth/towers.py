"""
Level-tagged logarithms for quantities like ``log R_n`` that outgrow floats.

``Tower(level, value)`` stands for the positive number ``X`` with
``log^(level) X = value`` (``level = 0`` is the plain float). Values are kept
at the lowest level whose float is finite and meaningful. Only order
comparisons and the handful of operations used by the sequence recurrences
are supported; at level >= 2 additive constants and positive scale factors
are below float resolution and leave the value unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import total_ordering

import numpy as np

#: a level-``l`` value above this cannot be exponentiated into a finite float
_EXP_SAFE = 709.0


@total_ordering
@dataclass(frozen=True)
class Tower:
    level: int
    value: float

    def __post_init__(self):
        level, value = self.level, self.value
        if level < 0:
            raise ValueError("level must be nonnegative")
        while level > 0 and value <= _EXP_SAFE:
            value = math.exp(value)
            level -= 1
        object.__setattr__(self, "level", level)
        object.__setattr__(self, "value", float(value))

    @classmethod
    def of(cls, x) -> Tower:
        return x if isinstance(x, Tower) else cls(0, float(x))

    def to_float(self) -> float:
        """Plain value; ``inf`` when above the float range."""
        return self.value if self.level == 0 else math.inf

    def log(self) -> Tower:
        if self.level == 0:
            if self.value <= 0:
                raise ValueError("log of a nonpositive tower")
            return Tower(0, math.log(self.value))
        # log^(l-1)(log X) = v
        return Tower(self.level - 1, self.value)

    def exp(self) -> Tower:
        if self.level == 0 and self.value < 0:
            return Tower(0, math.exp(self.value))
        return Tower(self.level + 1, self.value)

    def scale(self, c: float) -> Tower:
        """``c * X`` for ``c > 0``."""
        if c <= 0:
            raise ValueError("scale factor must be positive")
        if self.level == 0:
            v = self.value * c
            if math.isfinite(v):
                return Tower(0, v)
            return Tower(1, math.log(self.value) + math.log(c))
        if self.level == 1:
            return Tower(1, self.value + math.log(c))
        return self

    def add_const(self, a: float) -> Tower:
        """``X + a``; the result must stay positive above level 0."""
        if self.level == 0:
            v = self.value + a
            if math.isfinite(v):
                return Tower(0, v)
            return Tower(1, float(np.logaddexp(math.log(self.value), math.log(a))))
        if self.level == 1:
            # log(X + a) = v + log1p(a e^{-v})
            return Tower(1, self.value + math.log1p(a * math.exp(-self.value)))
        return self

    def add(self, other: Tower) -> Tower:
        """Sum of two positive towers."""
        a, b = (self, other) if self >= other else (other, self)
        if a.level == 0:
            return Tower(0, a.value).add_const(b.value)
        if a.level == 1:
            lb = b.value if b.level == 1 else math.log(b.value)
            return Tower(1, float(np.logaddexp(a.value, lb)))
        return a

    def _at_level(self, level: int) -> float:
        """Value of ``log^(level) X`` for ``level >= self.level``; ``-inf`` once nonpositive."""
        v = self.value
        for _ in range(level - self.level):
            if v <= 0:
                return -math.inf
            v = math.log(v)
        return v

    def _cmp_values(self, other: Tower) -> tuple[float, float]:
        lvl = max(self.level, other.level)
        return self._at_level(lvl), other._at_level(lvl)

    def __eq__(self, other):
        if not isinstance(other, Tower):
            return NotImplemented
        a, b = self._cmp_values(other)
        return a == b

    def __lt__(self, other: Tower) -> bool:
        a, b = self._cmp_values(other)
        return a < b

    def __hash__(self):
        return hash((self.level, self.value))

    def to_dict(self) -> dict:
        return {"level": self.level, "value": self.value}

    def __repr__(self):
        return f"Tower(level={self.level}, value={self.value!r})"
