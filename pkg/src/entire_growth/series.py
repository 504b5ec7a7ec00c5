"""
Entire functions presented as coefficient oracles.

A series knows, for every index ``n``, the log-modulus and argument of its
coefficient ``a_n``, an exact value for extended-precision summation, and a
bound on consecutive term ratios that drives the ratio-test truncation.
Builtin families also carry a closed form used for iteration.
"""

from __future__ import annotations

import cmath
import csv
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
from scipy.special import gammaln

from .logdomain import LogComplex

EXPLICIT = "explicit-finite-list"
BUILTIN = "builtin-analytic-family"


class CoefficientSeries:
    """Base class for coefficient oracles.

    Subclasses enumerate their nonzero coefficients through *support
    positions*: position ``j`` maps to the ``j``-th nonzero index. Dense
    families use the identity map.
    """

    identifier: str = "series"
    kind: str = BUILTIN
    transcendental: bool = True
    #: number of support positions, ``None`` for infinitely many
    support_size: int | None = None

    def support(self, j: np.ndarray) -> np.ndarray:
        return np.asarray(j, dtype=np.int64)

    def support_upto(self, n_max: int) -> np.ndarray:
        """All nonzero indices ``<= n_max`` (ascending)."""
        return np.arange(n_max + 1, dtype=np.int64)

    def log_abs(self, n: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def phase(self, n: np.ndarray) -> np.ndarray:
        return np.zeros(np.shape(n))

    def exact(self, n: int):
        """Exact coefficient as a ``Fraction`` (real) or ``complex``."""
        raise NotImplementedError

    def log_ratio_bound(self, j: np.ndarray, log_r: float) -> np.ndarray:
        """Log of a bound ``q`` with ``t[j'+1] <= q * t[j']`` for every ``j' >= j``.

        ``t`` are the term moduli ``|a_n| r**n`` along support positions.
        ``+inf`` where no bound is available.
        """
        return np.full(np.shape(j), math.inf)

    def closed_form(self, z: np.ndarray) -> np.ndarray | None:
        """Vectorised closed-form evaluation, or ``None`` if unavailable."""
        return None

    @property
    def has_closed_form(self) -> bool:
        return type(self).closed_form is not CoefficientSeries.closed_form

    def coeff_log(self, k: int) -> LogComplex | None:
        """``a_k`` in log form, ``None`` when the coefficient is zero."""
        if k < 0:
            raise ValueError("coefficient index must be nonnegative")
        n = np.array([k], dtype=np.int64)
        la = float(self.log_abs(n)[0])
        if la == -math.inf:
            return None
        return LogComplex(la, float(self.phase(n)[0]))

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.identifier}>"


def _alternating_phase(n: np.ndarray) -> np.ndarray:
    return np.where(np.asarray(n) % 2 == 1, math.pi, 0.0)


class ExpSeries(CoefficientSeries):
    """``exp(z) = sum z**n / n!``."""

    identifier = "exp"

    def log_abs(self, n):
        return -gammaln(np.asarray(n, dtype=float) + 1.0)

    def exact(self, n):
        return Fraction(1, math.factorial(n))

    def log_ratio_bound(self, j, log_r):
        return log_r - np.log(np.asarray(j, dtype=float) + 1.0)

    def closed_form(self, z):
        return np.exp(z)


class CosSqrtSeries(CoefficientSeries):
    """``cos(sqrt(z)) = sum (-1)**n z**n / (2n)!`` (independent of the branch)."""

    identifier = "cos_sqrt"

    def log_abs(self, n):
        return -gammaln(2.0 * np.asarray(n, dtype=float) + 1.0)

    def phase(self, n):
        return _alternating_phase(n)

    def exact(self, n):
        return Fraction((-1) ** n, math.factorial(2 * n))

    def log_ratio_bound(self, j, log_r):
        j = np.asarray(j, dtype=float)
        return log_r - np.log((2.0 * j + 1.0) * (2.0 * j + 2.0))

    def closed_form(self, z):
        return np.cos(np.sqrt(z))


class GapSquaresSeries(CoefficientSeries):
    """Lacunary series ``sum_{k>=1} z**(k*k) / (k*k)!``."""

    identifier = "gap_squares"

    def support(self, j):
        j = np.asarray(j, dtype=np.int64)
        return (j + 1) * (j + 1)

    def support_upto(self, n_max):
        return self.support(np.arange(math.isqrt(max(n_max, 0))))

    def log_abs(self, n):
        n = np.asarray(n, dtype=np.int64)
        root = np.floor(np.sqrt(n.astype(float)) + 0.5).astype(np.int64)
        square = (root * root == n) & (n >= 1)
        return np.where(square, -gammaln(n.astype(float) + 1.0), -math.inf)

    def exact(self, n):
        k = math.isqrt(n)
        if n >= 1 and k * k == n:
            return Fraction(1, math.factorial(n))
        return Fraction(0)

    def log_ratio_bound(self, j, log_r):
        # Consecutive log-ratios d_j are nonincreasing once (j+2)**2 >= r.
        j = np.asarray(j, dtype=np.int64)
        n0 = (j + 1) ** 2
        n1 = (j + 2) ** 2
        d = (n1 - n0) * log_r - (gammaln(n1 + 1.0) - gammaln(n0 + 1.0))
        settled = 2.0 * np.log((j + 2).astype(float)) >= log_r
        return np.where(settled, d, math.inf)


@dataclass(eq=False)
class BakerSeries(CoefficientSeries):
    """``sin(sqrt z)/sqrt z + z + a`` with real ``a``.

    ``sin(w)/w`` is even in ``w`` so the function is entire and the choice of
    square-root branch is immaterial; the principal branch is used.
    """

    a: float = 10.0
    kind: str = field(default=BUILTIN, init=False)

    @property
    def identifier(self):
        return f"baker(a={_fmt_real(self.a)})"

    def log_abs(self, n):
        n = np.asarray(n, dtype=np.int64)
        out = -gammaln(2.0 * n.astype(float) + 2.0)
        out = np.where(n == 1, math.log(5.0 / 6.0), out)
        a0 = abs(1.0 + self.a)
        out = np.where(n == 0, math.log(a0) if a0 > 0 else -math.inf, out)
        return out

    def phase(self, n):
        n = np.asarray(n, dtype=np.int64)
        out = _alternating_phase(n)
        out = np.where(n == 1, 0.0, out)
        return np.where(n == 0, 0.0 if 1.0 + self.a >= 0 else math.pi, out)

    def exact(self, n):
        if n == 0:
            return Fraction(1) + Fraction(self.a)
        if n == 1:
            return Fraction(5, 6)
        return Fraction((-1) ** n, math.factorial(2 * n + 1))

    def log_ratio_bound(self, j, log_r):
        j = np.asarray(j, dtype=float)
        bound = log_r - np.log((2.0 * j + 2.0) * (2.0 * j + 3.0))
        return np.where(j >= 2, bound, math.inf)

    def closed_form(self, z):
        z = np.asarray(z, dtype=complex)
        w = np.sqrt(z)
        small = np.abs(z) < 1e-6
        safe_w = np.where(small, 1.0, w)
        sinc = np.where(small, 1.0 - z / 6.0 + z * z / 120.0, np.sin(safe_w) / safe_w)
        return sinc + z + self.a


class Polynomial(CoefficientSeries):
    """A finite coefficient list; every index past the list is zero."""

    kind = EXPLICIT
    transcendental = False

    def __init__(self, coefficients, identifier: str | None = None):
        c = np.asarray(coefficients, dtype=complex)
        nz = np.flatnonzero(c != 0)
        if nz.size == 0:
            raise ValueError("the zero polynomial has no growth invariants")
        self.coefficients = c[: nz[-1] + 1]
        self._nonzero = nz.astype(np.int64)
        self.support_size = int(nz.size)
        self.degree = int(nz[-1])
        self.identifier = identifier or f"poly({','.join(_fmt_complex(x) for x in self.coefficients)})"

    def support(self, j):
        return self._nonzero[np.asarray(j, dtype=np.int64)]

    def support_upto(self, n_max):
        return self._nonzero[self._nonzero <= n_max]

    def _get(self, n):
        n = np.asarray(n, dtype=np.int64)
        inside = (n >= 0) & (n <= self.degree)
        return np.where(inside, self.coefficients[np.clip(n, 0, self.degree)], 0)

    def log_abs(self, n):
        a = np.abs(self._get(n))
        with np.errstate(divide="ignore"):
            return np.log(a)

    def phase(self, n):
        return np.angle(self._get(n))

    def exact(self, n):
        if n > self.degree:
            return Fraction(0)
        c = complex(self.coefficients[n])
        return Fraction(c.real) if c.imag == 0 else c

    def closed_form(self, z):
        return np.polyval(self.coefficients[::-1], np.asarray(z, dtype=complex))


def monomial(c: complex, n: int) -> Polynomial:
    if n < 0:
        raise ValueError("monomial degree must be nonnegative")
    coeffs = np.zeros(n + 1, dtype=complex)
    coeffs[n] = c
    return Polynomial(coeffs, identifier=f"monomial(c={_fmt_complex(c)},n={n})")


def constant(c: complex) -> Polynomial:
    return Polynomial([c], identifier=f"constant(c={_fmt_complex(c)})")


def _fmt_real(x: float) -> str:
    return f"{x:g}" if float(x).is_integer() else repr(float(x))


def _fmt_complex(c) -> str:
    c = complex(c)
    if c.imag == 0:
        return _fmt_real(c.real)
    return str(c).strip("()")


_CALL = re.compile(r"^\s*(\w+)\s*(?:\((.*)\))?\s*$")


def _kwargs(text: str) -> dict[str, str]:
    out = {}
    for part in filter(None, (p.strip() for p in (text or "").split(","))):
        key, sep, value = part.partition("=")
        if not sep:
            raise ValueError(f"expected key=value, got {part!r}")
        out[key.strip()] = value.strip()
    return out


def parse_function(ident: str) -> CoefficientSeries:
    """Build a series from its identifier string.

    Accepted: ``exp``, ``cos_sqrt``, ``gap_squares``, ``baker(a=<real>)``,
    ``monomial(c=<complex>,n=<int>)``, ``constant(c=<complex>)`` and
    ``csv:<path>`` for explicit coefficient files.
    """
    ident = ident.strip()
    if ident.startswith("csv:"):
        return load_coefficients_csv(ident[4:])
    m = _CALL.match(ident)
    if not m:
        raise ValueError(f"unrecognised function identifier {ident!r}")
    name, args = m.group(1), _kwargs(m.group(2))
    try:
        if name == "exp" and not args:
            return ExpSeries()
        if name == "cos_sqrt" and not args:
            return CosSqrtSeries()
        if name == "gap_squares" and not args:
            return GapSquaresSeries()
        if name == "baker" and set(args) <= {"a"}:
            return BakerSeries(a=float(args.get("a", 10.0)))
        if name == "monomial" and set(args) == {"c", "n"}:
            return monomial(complex(args["c"].replace(" ", "")), int(args["n"]))
        if name == "constant" and set(args) == {"c"}:
            return constant(complex(args["c"].replace(" ", "")))
    except ValueError as exc:
        raise ValueError(f"bad arguments in {ident!r}: {exc}") from None
    raise ValueError(f"unrecognised function identifier {ident!r}")


def load_coefficients_csv(path) -> Polynomial:
    """Read ``(k, re_ak, im_ak)`` or ``(k, log_mag, phase)`` rows."""
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{path}: no coefficient rows")
    cols = set(rows[0])
    entries: dict[int, complex] = {}
    for row in rows:
        k = int(row["k"])
        if k < 0:
            raise ValueError(f"{path}: negative index {k}")
        if {"re_ak", "im_ak"} <= cols:
            entries[k] = complex(float(row["re_ak"]), float(row["im_ak"]))
        elif {"log_mag", "phase"} <= cols:
            lm = float(row["log_mag"])
            entries[k] = 0j if lm == -math.inf else cmath.rect(math.exp(lm), float(row["phase"]))
        else:
            raise ValueError(f"{path}: need columns k,re_ak,im_ak or k,log_mag,phase")
    coeffs = np.zeros(max(entries) + 1, dtype=complex)
    for k, v in entries.items():
        coeffs[k] = v
    return Polynomial(coeffs, identifier=f"csv:{path}")
