"""
Orbit classification, escape-time fields and a boundedness probe for their
connected components.

All of this is a desk-scale proxy for the Fatou and Julia sets: an orbit is
"escaping" once ``log|f^n(z)|`` passes a threshold while still increasing,
"bounded" when it never leaves a disk for the whole budget, and
"indeterminate" otherwise. Builtin families iterate through their closed
forms (principal square root for Baker's function); other series fall back
to direct series evaluation.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import GrowthError
from .evaluation import eval_log
from .series import BakerSeries, CoefficientSeries

BOUNDED, ESCAPING, INDETERMINATE = 0, 1, 2
CLASS_NAMES = {BOUNDED: "bounded", ESCAPING: "escaping", INDETERMINATE: "indeterminate"}
CLASS_CODES = {v: k for k, v in CLASS_NAMES.items()}

DEFAULT_ESCAPE_LOG = 50.0
DEFAULT_BOUNDED_RADIUS = 100.0
DEFAULT_MAX_ITER = 200
CONFIRM_WINDOW = 3
MAX_RESOLUTION = 2048
#: the float image of f is unusable beyond this log-magnitude
_LOG_FLOAT_MAX = 700.0


def _step(f: CoefficientSeries, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """One application of ``f``; returns the new points and their log-magnitudes."""
    with np.errstate(all="ignore"):
        if f.has_closed_form:
            w = f.closed_form(z)
            return w, np.log(np.abs(w))
        out = np.empty_like(z)
        lm = np.empty(z.shape)
        for i, zi in enumerate(z):
            try:
                v = eval_log(f, math.log(abs(zi)) if zi != 0 else -math.inf, float(np.angle(zi)))
            except (GrowthError, ValueError):
                out[i], lm[i] = np.nan, np.nan
                continue
            lm[i] = v.log_mag
            out[i] = v.to_complex() if v.log_mag < _LOG_FLOAT_MAX else complex(math.inf, 0)
        return out, lm


def _iterate(f, z0, max_iter, escape_log, bounded_radius):
    """Vectorised orbit classification; returns (class, steps, final log|z|)."""
    z = np.asarray(z0, dtype=complex).ravel().copy()
    m = z.size
    cls = np.full(m, INDETERMINATE, dtype=np.int8)
    steps = np.full(m, -1, dtype=np.int64)
    with np.errstate(divide="ignore"):
        lm = np.log(np.abs(z))
    hist = np.tile(lm, (CONFIRM_WINDOW + 1, 1))
    left = np.zeros(m, dtype=bool)
    broken = np.zeros(m, dtype=bool)
    active = np.ones(m, dtype=bool)
    log_rb = math.log(bounded_radius)
    for n in range(1, max_iter + 1):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        w, lw = _step(f, z[idx])
        z[idx], lm[idx] = w, lw
        hist[:-1, idx] = hist[1:, idx]
        hist[-1, idx] = lw
        bad = np.isnan(lw) | (np.isinf(lw) & (lw > 0))
        with np.errstate(invalid="ignore"):
            rising = np.all(np.diff(hist[:, idx], axis=0) > 0, axis=0)
        rising &= n >= CONFIRM_WINDOW
        esc = ~bad & (lw > escape_log) & rising
        cls[idx[esc]] = ESCAPING
        steps[idx[esc]] = n
        broken[idx[bad & ~esc]] = True
        left[idx] |= ~(lw <= log_rb)
        active[idx[esc | bad]] = False
    done = cls != ESCAPING
    cls[done & ~left & ~broken] = BOUNDED
    return cls, steps, lm


@dataclass(frozen=True)
class OrbitRecord:
    start: complex
    classification: str
    steps_taken: int
    final_log_mag: float

    def to_dict(self) -> dict:
        return {"start": [self.start.real, self.start.imag], "classification": self.classification,
                "steps_taken": self.steps_taken, "final_log_mag": self.final_log_mag}


def _check_budgets(max_iter, escape_log, bounded_radius):
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    if bounded_radius <= 0 or escape_log <= math.log(bounded_radius):
        raise ValueError("escape threshold must exceed log(bounded_radius)")


def iterate_orbit(f: CoefficientSeries, z0: complex, max_iter: int = DEFAULT_MAX_ITER,
                  escape_log_threshold: float = DEFAULT_ESCAPE_LOG,
                  bounded_radius: float = DEFAULT_BOUNDED_RADIUS) -> OrbitRecord:
    """Classify the orbit of ``z0``.

    ``steps_taken`` is the escape step for escaping orbits and the full
    budget otherwise.
    """
    _check_budgets(max_iter, escape_log_threshold, bounded_radius)
    cls, steps, lm = _iterate(f, [z0], max_iter, escape_log_threshold, bounded_radius)
    c = int(cls[0])
    return OrbitRecord(complex(z0), CLASS_NAMES[c], int(steps[0]) if c == ESCAPING else max_iter, float(lm[0]))


# ----------------------------------------------------------------------------
# escape fields


@dataclass(frozen=True)
class Window:
    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def __post_init__(self):
        if not (self.re_max > self.re_min and self.im_max > self.im_min):
            raise ValueError("window must be nondegenerate")

    @classmethod
    def parse(cls, text: str) -> Window:
        """``re_min:re_max:im_min:im_max``."""
        parts = [float(p) for p in text.split(":")]
        if len(parts) != 4:
            raise ValueError(f"window must be re_min:re_max:im_min:im_max, got {text!r}")
        return cls(*parts)

    def __str__(self):
        return ":".join(repr(float(v)) for v in (self.re_min, self.re_max, self.im_min, self.im_max))

    def centers(self, width: int, height: int) -> np.ndarray:
        """Pixel centres, row 0 at the top (largest imaginary part)."""
        dx = (self.re_max - self.re_min) / width
        dy = (self.im_max - self.im_min) / height
        x = self.re_min + (np.arange(width) + 0.5) * dx
        y = self.im_max - (np.arange(height) + 0.5) * dy
        return x[None, :] + 1j * y[:, None]


@dataclass
class EscapeField:
    window: Window
    resolution: tuple[int, int]
    classes: np.ndarray
    steps: np.ndarray
    max_iter: int
    escape_log_threshold: float
    bounded_radius: float
    function: str = ""
    notes: list[str] = field(default_factory=list)

    def counts(self) -> dict:
        return {name: int(np.sum(self.classes == code)) for code, name in CLASS_NAMES.items()}

    def to_pgm(self, path) -> None:
        """Plain (P2) greymap: bounded 0, indeterminate 32, escaping 64..255 (faster is brighter)."""
        w, h = self.resolution
        img = np.zeros((h, w), dtype=np.int64)
        img[self.classes == INDETERMINATE] = 32
        esc = self.classes == ESCAPING
        frac = np.clip(self.steps / float(self.max_iter), 0.0, 1.0)
        img[esc] = 255 - np.round(191 * frac[esc]).astype(np.int64)
        with open(path, "w") as fh:
            fh.write(f"P2\n{w} {h}\n255\n")
            for row in img:
                fh.write(" ".join(str(int(v)) for v in row) + "\n")

    def to_csv(self, path) -> None:
        from .serialize import fmt_float

        z = self.window.centers(*self.resolution)
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(["x", "y", "class", "steps"])
            for zi, c, s in zip(z.ravel(), self.classes.ravel(), self.steps.ravel()):
                wr.writerow([fmt_float(zi.real), fmt_float(zi.imag), CLASS_NAMES[int(c)], int(s)])

    def to_dict(self) -> dict:
        return {"window": str(self.window), "resolution": list(self.resolution), "max_iter": self.max_iter,
                "escape_log_threshold": self.escape_log_threshold, "bounded_radius": self.bounded_radius,
                "function": self.function, "counts": self.counts(), "notes": self.notes}


def _field_rows(args):
    f, rows, max_iter, escape_log, bounded_radius = args
    cls, steps, _ = _iterate(f, rows, max_iter, escape_log, bounded_radius)
    return cls.reshape(rows.shape), steps.reshape(rows.shape)


def escape_field(f: CoefficientSeries, window: Window, resolution: tuple[int, int],
                 max_iter: int = DEFAULT_MAX_ITER, escape_log_threshold: float = DEFAULT_ESCAPE_LOG,
                 bounded_radius: float = DEFAULT_BOUNDED_RADIUS, workers: int = 1,
                 max_resolution: int = MAX_RESOLUTION) -> EscapeField:
    """Classify the orbit of every pixel centre; parallel runs split by rows."""
    w, h = resolution
    if not (1 <= w <= max_resolution and 1 <= h <= max_resolution):
        raise ValueError(f"resolution must lie within 1..{max_resolution} per axis")
    _check_budgets(max_iter, escape_log_threshold, bounded_radius)
    z = window.centers(w, h)
    if workers > 1:
        blocks = np.array_split(z, min(workers * 4, h), axis=0)
        jobs = [(f, b, max_iter, escape_log_threshold, bounded_radius) for b in blocks]
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_field_rows, jobs))
        cls = np.concatenate([p[0] for p in parts], axis=0)
        steps = np.concatenate([p[1] for p in parts], axis=0)
    else:
        cls, steps = _field_rows((f, z, max_iter, escape_log_threshold, bounded_radius))
    notes = []
    if isinstance(f, BakerSeries):
        notes.append("closed form uses the principal square root (cut on the negative real axis)")
    return EscapeField(window, (w, h), cls, steps, max_iter, escape_log_threshold, bounded_radius,
                       f.identifier, notes)


# ----------------------------------------------------------------------------
# components


@dataclass(frozen=True)
class Component:
    label: int
    pixels: int
    bbox: tuple[int, int, int, int]
    touches: tuple[str, ...]

    @property
    def possibly_unbounded(self) -> bool:
        return bool(self.touches)

    def to_dict(self) -> dict:
        return {"label": self.label, "pixels": self.pixels, "bbox": list(self.bbox),
                "touches": list(self.touches), "possibly_unbounded": self.possibly_unbounded}


@dataclass
class ComponentReport:
    selector: str
    components: list[Component]
    note: str = "possibly unbounded means touching the window edge at this window and resolution"

    @property
    def unbounded_flags(self) -> list[bool]:
        return [c.possibly_unbounded for c in self.components]

    def to_dict(self) -> dict:
        return {"selector": self.selector, "count": len(self.components),
                "components": [c.to_dict() for c in self.components], "note": self.note}


def component_probe(source, selector: str = "bounded") -> ComponentReport:
    """4-connected components of the pixels in one class.

    ``source`` is an EscapeField or a 2-D array of class codes. Labels follow
    raster order of each component's first pixel.
    """
    if selector not in ("bounded", "escaping"):
        raise ValueError("selector must be 'bounded' or 'escaping'")
    classes = source.classes if isinstance(source, EscapeField) else np.asarray(source)
    mask = classes == CLASS_CODES[selector]
    labels, count = ndimage.label(mask)
    h, w = mask.shape
    comps = []
    for lab, sl in enumerate(ndimage.find_objects(labels), start=1):
        rows, cols = sl
        touches = []
        if cols.start == 0:
            touches.append("left")
        if cols.stop == w:
            touches.append("right")
        if rows.start == 0:
            touches.append("top")
        if rows.stop == h:
            touches.append("bottom")
        pixels = int(np.sum(labels[sl] == lab))
        comps.append(Component(lab, pixels, (rows.start, rows.stop - 1, cols.start, cols.stop - 1), tuple(touches)))
    return ComponentReport(selector, comps)


# ----------------------------------------------------------------------------
# Baker's function on the positive real axis


@dataclass
class SegmentReport:
    a: float
    x0: float
    seeds: list[float]
    increasing: list[bool]
    escaping: list[bool]
    max_divergence: list[float]
    tracking: list[bool]
    divergence_factor: float
    track_steps: int

    @property
    def passed(self) -> int:
        return sum(i and e for i, e in zip(self.increasing, self.escaping))

    @property
    def pass_fraction(self) -> float:
        return self.passed / len(self.seeds)

    def to_dict(self) -> dict:
        return {"a": self.a, "x0": self.x0, "seeds": self.seeds, "increasing": self.increasing,
                "escaping": self.escaping, "max_divergence": self.max_divergence, "tracking": self.tracking,
                "divergence_factor": self.divergence_factor, "track_steps": self.track_steps,
                "passed": self.passed, "pass_fraction": self.pass_fraction}


def baker_segment_check(a: float = 10.0, x0: float = 100.0, count: int = 16, perturbation: float = 1e-3,
                        spacing: float = 1.0, max_iter: int = 2000, escape_log_threshold: float = math.log(1e4),
                        track_steps: int = 20, divergence_factor: float = 10.0) -> SegmentReport:
    """Real orbits of ``sin(sqrt z)/sqrt z + z + a`` from ``x0, x0 + spacing, ...``.

    Each orbit must increase strictly at every step until it escapes. As a
    normality proxy the orbit of ``x + i*perturbation`` must stay within
    ``divergence_factor * perturbation`` of the real orbit for
    ``track_steps`` steps.
    """
    if a <= 0 or x0 <= 0:
        raise ValueError("need a > 0 and x0 > 0")
    f = BakerSeries(a)
    seeds = [x0 + k * spacing for k in range(count)]
    increasing, escaping, diverg, tracking = [], [], [], []
    for x in seeds:
        path = [x]
        z = np.array([complex(x)])
        for _ in range(max_iter):
            z, lm = _step(f, z)
            path.append(float(z[0].real))
            if not np.isfinite(lm[0]) or lm[0] > escape_log_threshold:
                break
        path = np.array(path)
        increasing.append(bool(np.all(np.diff(path) > 0)))
        rec = iterate_orbit(f, x, max_iter, escape_log_threshold, bounded_radius=math.exp(escape_log_threshold - 1.0))
        escaping.append(rec.classification == "escaping")
        zr = np.array([complex(x), complex(x, perturbation)])
        dev = 0.0
        for _ in range(track_steps):
            zr, _ = _step(f, zr)
            dev = max(dev, abs(zr[1] - zr[0]) / perturbation)
        diverg.append(float(dev))
        tracking.append(bool(dev <= divergence_factor))
    return SegmentReport(a, x0, seeds, increasing, escaping, diverg, tracking, divergence_factor, track_steps)
