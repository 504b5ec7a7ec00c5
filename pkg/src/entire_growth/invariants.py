"""
Growth invariants: maximum term, central index, maximum and minimum modulus,
sampled growth profiles, and order / lower order / type estimates.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import GrowthError, InsufficientSamples, UndefinedForZeroOrder
from .evaluation import DEFAULT_CEILING, DEFAULT_TOL, circle_values, truncate
from .series import CoefficientSeries

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
DEFAULT_SAMPLES = 1024
DEFAULT_REFINE_TOL = 1e-10
#: |f| below this on a circle is reported as a zero (log L = -inf)
ZERO_THRESHOLD = 1e-300
DEFAULT_TAIL_FRACTION = 0.5
#: |trend| of log(log M / r**rho) beyond which the type is called minimal / maximal
DEFAULT_TYPE_BAND = 0.25
#: half-width around rho = 1/2 treated as "order exactly 1/2"
DEFAULT_BOUNDARY_TOL = 0.05


def max_term(f: CoefficientSeries, log_r: float, *, ceiling: float = DEFAULT_CEILING) -> tuple[float, int]:
    """``(log mu(r), nu(r))``; ties in the maximum go to the largest index."""
    t = truncate(f, log_r, math.log(DEFAULT_TOL), ceiling)
    return t.log_mu, t.nu


def golden_section(fn, a: float, b: float, tol: float, maximize: bool = False, max_iter: int = 200):
    """Golden-section search on ``[a, b]`` with an absolute stopping width ``tol``.

    Returns ``(x, fn(x))`` for the best point evaluated.
    """
    sign = -1.0 if maximize else 1.0
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = sign * fn(c), sign * fn(d)
    best = (c, fc) if fc <= fd else (d, fd)
    for _ in range(max_iter):
        if b - a < tol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = sign * fn(c)
            if fc < best[1]:
                best = (c, fc)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = sign * fn(d)
            if fd < best[1]:
                best = (d, fd)
    return best[0], sign * best[1]


def _circle_extremum(f, log_r, angular_samples, refine_tol, maximize, ceiling):
    if angular_samples < 64:
        raise ValueError("angular_samples must be at least 64")
    thetas = 2.0 * math.pi * np.arange(angular_samples) / angular_samples
    mode = "max" if maximize else "min"
    vals, _, _ = circle_values(f, log_r, thetas, refine=mode, ceiling=ceiling)
    i = int(np.argmax(vals) if maximize else np.argmin(vals))
    best = float(vals[i])
    if not maximize and best == -math.inf:
        return best
    h = 2.0 * math.pi / angular_samples

    def g(theta):
        return float(circle_values(f, log_r, [theta], refine=mode, ceiling=ceiling)[0][0])

    _, refined = golden_section(g, thetas[i] - h, thetas[i] + h, refine_tol, maximize)
    return max(best, refined) if maximize else min(best, refined)


def max_modulus(f: CoefficientSeries, log_r: float, angular_samples: int = DEFAULT_SAMPLES,
                refine_tol: float = DEFAULT_REFINE_TOL, *, ceiling: float = DEFAULT_CEILING) -> float:
    """``log M(r, f)`` by a uniform angular scan followed by golden-section refinement."""
    return _circle_extremum(f, log_r, angular_samples, refine_tol, True, ceiling)


def min_modulus(f: CoefficientSeries, log_r: float, angular_samples: int = DEFAULT_SAMPLES,
                refine_tol: float = DEFAULT_REFINE_TOL, *, ceiling: float = DEFAULT_CEILING) -> float:
    """``log L(r, f)``; ``-inf`` when the circle (numerically) passes through a zero."""
    v = _circle_extremum(f, log_r, angular_samples, refine_tol, False, ceiling)
    return -math.inf if v < math.log(ZERO_THRESHOLD) else v


# ----------------------------------------------------------------------------
# profiles


@dataclass(frozen=True)
class GrowthSample:
    log_r: float
    log_M: float
    log_L: float
    log_mu: float
    nu: int
    valid: bool = True
    error: str = ""


@dataclass(frozen=True)
class Grid:
    """Geometric radius grid, uniform in ``log r``."""

    log_r_min: float
    log_r_max: float
    points: int

    def __post_init__(self):
        if self.points < 2 or not self.log_r_max > self.log_r_min:
            raise ValueError(f"degenerate grid {self}")

    @classmethod
    def parse(cls, text: str) -> Grid:
        """``"lo:hi:points"`` in log r."""
        lo, hi, pts = text.split(":")
        return cls(float(lo), float(hi), int(pts))

    def __str__(self):
        return f"{self.log_r_min!r}:{self.log_r_max!r}:{self.points}"

    @property
    def log_r(self) -> np.ndarray:
        return np.linspace(self.log_r_min, self.log_r_max, self.points)


@dataclass
class GrowthProfile:
    grid: Grid
    samples: list[GrowthSample]
    function: str = ""

    def column(self, name: str, valid_only: bool = True) -> np.ndarray:
        rows = [s for s in self.samples if s.valid or not valid_only]
        return np.array([getattr(s, name) for s in rows], dtype=float)

    @property
    def valid_samples(self) -> list[GrowthSample]:
        return [s for s in self.samples if s.valid]

    def to_csv(self, path) -> None:
        from .serialize import fmt_float

        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["log_r", "log_M", "log_L", "log_mu", "nu", "valid"])
            for s in self.samples:
                w.writerow([fmt_float(s.log_r), fmt_float(s.log_M), fmt_float(s.log_L),
                            fmt_float(s.log_mu), s.nu, int(s.valid)])


def profile_sample(f: CoefficientSeries, log_r: float, with_min: bool = True,
                   angular_samples: int = DEFAULT_SAMPLES) -> GrowthSample:
    try:
        log_mu, nu = max_term(f, log_r)
        log_M = max_modulus(f, log_r, angular_samples)
        log_L = min_modulus(f, log_r, angular_samples) if with_min else math.nan
    except (GrowthError, ValueError, OverflowError) as exc:
        return GrowthSample(log_r, math.nan, math.nan, math.nan, -1, False, f"{type(exc).__name__}: {exc}")
    return GrowthSample(float(log_r), log_M, log_L, log_mu, nu)


def _sample_job(args):
    return profile_sample(*args)


def growth_profile(f: CoefficientSeries, grid: Grid, *, with_min: bool = True,
                   angular_samples: int = DEFAULT_SAMPLES, workers: int = 1) -> GrowthProfile:
    """Sample ``log M``, ``log L``, ``log mu`` and ``nu`` at every grid radius.

    Failing radii are kept as invalid samples. With ``workers > 1`` the radii
    are farmed out to processes; the result is identical to the sequential run.
    """
    jobs = [(f, float(x), with_min, angular_samples) for x in grid.log_r]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            samples = list(pool.map(_sample_job, jobs))
    else:
        samples = [_sample_job(j) for j in jobs]
    return GrowthProfile(grid, samples, f.identifier)


# ----------------------------------------------------------------------------
# order and type


@dataclass(frozen=True)
class OrderEstimate:
    rho: float
    lam: float
    diagnostics: dict = field(default_factory=dict)


@dataclass(frozen=True)
class TypeEstimate:
    sigma_type: float
    type_class: str
    diagnostics: dict = field(default_factory=dict)


@dataclass(frozen=True)
class GrowthExponents:
    rho: float
    lam: float
    sigma_type: float | None
    type_class: str | None
    tail_window: float
    residuals: dict = field(default_factory=dict)
    transcendental: bool = True

    def __post_init__(self):
        if self.lam > self.rho:
            raise ValueError("lower order exceeds order")

    def to_dict(self) -> dict:
        return {"rho": self.rho, "lambda": self.lam, "sigma": self.sigma_type,
                "type_class": self.type_class, "window": self.tail_window,
                "residuals": self.residuals, "transcendental": self.transcendental}


def _tail(profile: GrowthProfile, tail_fraction: float):
    pts = [s for s in profile.valid_samples]
    if len(pts) < 16:
        raise InsufficientSamples(f"{len(pts)} valid samples, need at least 16")
    if not 0 < tail_fraction <= 1:
        raise ValueError("tail_fraction must lie in (0, 1]")
    start = int(math.floor(len(pts) * (1.0 - tail_fraction)))
    tail = [s for s in pts[start:] if s.log_r > 0 and s.log_M > 0]
    if len(tail) < 4:
        raise InsufficientSamples("fewer than 4 tail samples with r > 1 and M > 1")
    return tail


def estimate_order(profile: GrowthProfile, tail_fraction: float = DEFAULT_TAIL_FRACTION) -> OrderEstimate:
    """Order as the sup, lower order as the inf, of ``log log M / log r`` over the tail window.

    Polynomial growth (central index frozen across the window and ``log M``
    affine in ``log r`` with slope equal to it) is reported as order 0.
    """
    tail = _tail(profile, tail_fraction)
    x = np.array([s.log_r for s in tail])
    lM = np.array([s.log_M for s in tail])
    nus = np.array([s.nu for s in tail])
    ratio = np.log(lM) / x
    slope, intercept = np.polyfit(x, np.log(lM), 1)
    resid = np.log(lM) - (slope * x + intercept)
    deg_slope = np.polyfit(x, lM, 1)[0]
    polynomial = bool(nus.min() == nus.max() and abs(deg_slope - nus[0]) <= 0.05)
    diag = {
        "ratio_sup": float(ratio.max()),
        "ratio_inf": float(ratio.min()),
        "fit_slope": float(slope),
        "fit_intercept": float(intercept),
        "fit_max_residual": float(np.abs(resid).max()),
        "tail_points": int(len(tail)),
        "polynomial_growth": polynomial,
    }
    if polynomial:
        return OrderEstimate(0.0, 0.0, diag)
    rho = float(ratio.max())
    return OrderEstimate(rho, float(min(ratio.min(), rho)), diag)


def estimate_type(profile: GrowthProfile, rho: float, tail_fraction: float = DEFAULT_TAIL_FRACTION,
                  band: float = DEFAULT_TYPE_BAND) -> TypeEstimate:
    """Type ``sup log M / r**rho`` over the tail window, with a trend-based class.

    The class comes from the least-squares slope of ``log(log M / r**rho)``
    against ``log r``: below ``-band`` minimal, above ``band`` maximal, mean
    otherwise. A heuristic: finite data cannot settle a lim sup.
    """
    if not (0 < rho < math.inf):
        raise UndefinedForZeroOrder(f"type needs finite positive order, got rho = {rho}")
    tail = _tail(profile, tail_fraction)
    x = np.array([s.log_r for s in tail])
    lt = np.log(np.array([s.log_M for s in tail])) - rho * x
    trend = float(np.polyfit(x, lt, 1)[0])
    sup = float(np.exp(lt.max()))
    diag = {"trend": trend, "sigma_sup": sup, "band": band}
    if trend < -band:
        return TypeEstimate(0.0, "minimal", diag)
    if trend > band:
        return TypeEstimate(math.inf, "maximal", diag)
    return TypeEstimate(sup, "mean", diag)


def growth_exponents(profile: GrowthProfile, tail_fraction: float = DEFAULT_TAIL_FRACTION,
                     transcendental: bool = True) -> GrowthExponents:
    order = estimate_order(profile, tail_fraction)
    residuals = dict(order.diagnostics)
    sigma = cls = None
    if 0 < order.rho < math.inf:
        t = estimate_type(profile, order.rho, tail_fraction)
        sigma, cls = t.sigma_type, t.type_class
        residuals.update({f"type_{k}": v for k, v in t.diagnostics.items()})
    return GrowthExponents(order.rho, order.lam, sigma, cls, tail_fraction, residuals, transcendental)


@dataclass(frozen=True)
class CorollaryVerdict:
    qualifies: bool
    clause: str
    report: str


def classify_corollary(exponents: GrowthExponents, boundary_tol: float = DEFAULT_BOUNDARY_TOL) -> CorollaryVerdict:
    """Order below 1/2, or order 1/2 of minimal type.

    An estimate within ``boundary_tol`` of 1/2 counts as order 1/2, since
    finite-grid order estimates carry that much bias.
    """
    rho = exponents.rho
    note = "" if exponents.transcendental else " (not transcendental: polynomial input)"
    if rho < 0.5 - boundary_tol:
        return CorollaryVerdict(True, "order<1/2", f"rho = {rho:.6g} < 1/2{note}")
    if abs(rho - 0.5) <= boundary_tol:
        if exponents.type_class == "minimal":
            return CorollaryVerdict(True, "order=1/2,minimal", f"rho ~ 1/2 and minimal type{note}")
        return CorollaryVerdict(False, "order=1/2,not-minimal",
                                f"rho ~ 1/2 with {exponents.type_class} type{note}")
    return CorollaryVerdict(False, "order>1/2", f"rho = {rho:.6g} > 1/2{note}")
