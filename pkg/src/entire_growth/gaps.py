"""
Gap structure of exponent sequences and the minimum-modulus hypothesis.

Fabry gaps (``n_k / k -> oo``) and Fejér gaps (``sum 1/n_k < oo``) are
asymptotic properties, so the verdicts here are heuristics computed from a
finite prefix; every report carries the raw tables for auditing.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientExponents
from .invariants import DEFAULT_SAMPLES, Grid, GrowthProfile, growth_profile
from .series import CoefficientSeries

HOLDS, FAILS, INCONCLUSIVE = "holds", "fails", "inconclusive"
CONSISTENT, VIOLATES = "consistent-with-hypothesis", "violates"

#: density at the largest radius must stay below this for a consistent verdict
DEFAULT_DENSITY_THRESHOLD = 0.3
#: trailing fraction of the density curve that must be nonincreasing
DEFAULT_TREND_WINDOW = 0.25


def exponent_sequence(f: CoefficientSeries, scan_bound: int) -> list[int]:
    """Indices ``k <= scan_bound`` with ``a_k != 0``."""
    if scan_bound < 1:
        raise ValueError("scan_bound must be at least 1")
    k = np.arange(scan_bound + 1)
    return [int(i) for i in k[np.isfinite(f.log_abs(k))]]


def _positive(exponents) -> np.ndarray:
    e = np.asarray([n for n in exponents if n > 0], dtype=float)
    if np.any(np.diff(e) <= 0):
        raise ValueError("exponents must be strictly increasing")
    if e.size < 4:
        raise InsufficientExponents(f"need at least 4 positive exponents, got {e.size}")
    return e


@dataclass(frozen=True)
class FabryResult:
    verdict: str
    ratios: list[float]
    note: str = "heuristic: n_k/k -> oo cannot be decided from finitely many exponents"


@dataclass(frozen=True)
class FejerResult:
    verdict: str
    partial_sums: list[float]
    decay_exponent: float
    note: str = "heuristic: convergence of sum 1/n_k judged from the fitted decay of its increments"


def fabry_check(exponents, growth_factor: float = 4.0, flat_tol: float = 0.05) -> FabryResult:
    """Tabulate ``n_k / k`` (zero exponent dropped, ``k`` counted from 1).

    ``holds`` when the ratios strictly increase and the last exceeds
    ``growth_factor`` times the first; ``fails`` when the fitted trend is flat
    to within ``flat_tol`` of the mean ratio.
    """
    e = _positive(exponents)
    k = np.arange(1, e.size + 1)
    ratios = e / k
    if np.all(np.diff(ratios) > 0) and ratios[-1] > growth_factor * ratios[0]:
        verdict = HOLDS
    else:
        slope = np.polyfit(k, ratios, 1)[0]
        verdict = FAILS if abs(slope) * e.size <= flat_tol * ratios.mean() else INCONCLUSIVE
    return FabryResult(verdict, ratios.tolist())


def fejer_check(exponents, decay: float = 1.5, divergent: float = 1.1) -> FejerResult:
    """Partial sums of ``1/n_k`` and a power-law fit ``1/n_k ~ C k**-p``.

    ``holds`` when ``p >= decay``; ``fails`` when ``p <= divergent``
    (harmonic-like increments); ``inconclusive`` in between.
    """
    e = _positive(exponents)
    inc = 1.0 / e
    k = np.arange(1, e.size + 1)
    p = -float(np.polyfit(np.log(k), np.log(inc), 1)[0])
    if p >= decay:
        verdict = HOLDS
    elif p <= divergent:
        verdict = FAILS
    else:
        verdict = INCONCLUSIVE
    return FejerResult(verdict, np.cumsum(inc).tolist(), p)


@dataclass(frozen=True)
class GapReport:
    exponents: list[int]
    fabry_ratios: list[float]
    fejer_partial_sums: list[float]
    fabry_verdict: str
    fejer_verdict: str

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def gap_report(f: CoefficientSeries, scan_bound: int = 400) -> GapReport:
    exps = exponent_sequence(f, scan_bound)
    try:
        fab = fabry_check(exps)
        fej = fejer_check(exps)
    except InsufficientExponents:
        pos = [n for n in exps if n > 0]
        return GapReport(exps, [n / (i + 1) for i, n in enumerate(pos)],
                         np.cumsum([1.0 / n for n in pos]).tolist(), INCONCLUSIVE, INCONCLUSIVE)
    return GapReport(exps, fab.ratios, fej.partial_sums, fab.verdict, fej.verdict)


# ----------------------------------------------------------------------------
# the hypothesis log L > (1 - eps) log M outside a set of logarithmic density zero


@dataclass
class HypothesisReport:
    epsilon: float
    grid: Grid
    log_r: list[float]
    exceptional: list[bool]
    excluded: list[bool]
    log_density: list[float]
    verdict: str
    threshold: float = DEFAULT_DENSITY_THRESHOLD
    notes: list[str] = field(default_factory=list)

    @property
    def final_density(self) -> float:
        return self.log_density[-1]

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "grid": str(self.grid),
            "flags": [int(b) for b in self.exceptional],
            "excluded": [int(b) for b in self.excluded],
            "log_r": self.log_r,
            "density": self.log_density,
            "final_density": self.final_density,
            "threshold": self.threshold,
            "verdict": self.verdict,
            "notes": self.notes,
        }

    def to_csv(self, path) -> None:
        from .serialize import fmt_float

        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["log_r", "exceptional"])
            for x, b in zip(self.log_r, self.exceptional):
                w.writerow([fmt_float(x), int(b)])


def exceptional_flags(profile: GrowthProfile, epsilon: float):
    """Per-radius membership in ``E = {r : log L <= (1-eps) log M}``.

    Invalid samples count as exceptional; radii with ``log M <= 0`` are
    excluded (never exceptional).
    """
    flags, excluded = [], []
    for s in profile.samples:
        if not s.valid or math.isnan(s.log_L):
            flags.append(True)
            excluded.append(False)
        elif s.log_M <= 0:
            flags.append(False)
            excluded.append(True)
        else:
            flags.append(bool(s.log_L <= (1.0 - epsilon) * s.log_M))
            excluded.append(False)
    return flags, excluded


def log_density_curve(log_r, flags) -> list[float]:
    """Running ``(1/log(R/r0)) * int_{E cap [r0,R]} dt/t`` by the trapezoid rule in ``log t``."""
    x = np.asarray(log_r, dtype=float)
    ind = np.asarray(flags, dtype=float)
    cum = np.concatenate(([0.0], np.cumsum(0.5 * (ind[1:] + ind[:-1]) * np.diff(x))))
    span = x - x[0]
    dens = np.empty_like(x)
    dens[0] = ind[0]
    dens[1:] = cum[1:] / span[1:]
    return np.clip(dens, 0.0, 1.0).tolist()


def hypothesis_from_profile(profile: GrowthProfile, epsilon: float,
                            threshold: float = DEFAULT_DENSITY_THRESHOLD,
                            trend_window: float = DEFAULT_TREND_WINDOW) -> HypothesisReport:
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    flags, excluded = exceptional_flags(profile, epsilon)
    log_r = [s.log_r for s in profile.samples]
    dens = log_density_curve(log_r, flags)
    w = max(2, int(math.ceil(len(dens) * trend_window)))
    tail = np.asarray(dens[-w:])
    steps = np.diff(tail)
    nonincreasing = bool(np.all(steps <= 1e-12))
    nondecreasing = bool(np.all(steps >= -1e-12))
    if dens[-1] < threshold and nonincreasing:
        verdict = CONSISTENT
    elif dens[-1] >= threshold and nondecreasing:
        verdict = VIOLATES
    else:
        verdict = INCONCLUSIVE
    notes = [f"density threshold {threshold} and trailing window {trend_window} are conventions"]
    bad = sum(not s.valid for s in profile.samples)
    if bad:
        notes.append(f"{bad} radii failed to evaluate and were counted as exceptional")
    return HypothesisReport(epsilon, profile.grid, log_r, flags, excluded, dens, verdict, threshold, notes)


def hypothesis_check(f: CoefficientSeries, epsilon: float, grid: Grid, *,
                     threshold: float = DEFAULT_DENSITY_THRESHOLD,
                     trend_window: float = DEFAULT_TREND_WINDOW,
                     angular_samples: int = DEFAULT_SAMPLES, workers: int = 1) -> HypothesisReport:
    profile = growth_profile(f, grid, angular_samples=angular_samples, workers=workers)
    return hypothesis_from_profile(profile, epsilon, threshold, trend_window)
