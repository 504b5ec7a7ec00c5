"""
The iterated radii ``R_n, S_n`` and numerical checks of the growth inequalities
used to build them.

Sequences live in log space as :class:`~entire_growth.towers.Tower` values,
because ``R_{n+1} = M(R_n^{1/(2 alpha)})`` leaves the float range after one or
two steps. Growth beyond the exact-evaluation ceiling comes from a fitted
``log M(r) = sigma_hat * r**rho_hat`` model and is labelled as such.

Checks that hold "for sufficiently large r" are reported with the first grid
radius (or index) from which they hold through the end of the computed range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (FitRejected, NotFound, NotSatisfiedOnGrid, SeedTooSmall,
                     TruncationUnavailable, UndefinedForZeroLowerOrder)
from .evaluation import DEFAULT_CEILING
from .invariants import (DEFAULT_TAIL_FRACTION, GrowthExponents, GrowthProfile, Grid,
                         estimate_order, max_modulus, max_term, min_modulus)
from .series import CoefficientSeries
from .towers import Tower

EXACT, FITTED = "exact-series", "fitted-model"
HALF, QUARTER = "half-alpha", "quarter-alpha"
MAX_STEPS = 12
DEFAULT_OVERLAP_TOL = 0.05
DEFAULT_SIGMA_TOL = 1e-8
#: relative slack for comparisons that are exact identities in real arithmetic
_SLACK = 1e-12


def _le(a: float, b: float) -> bool:
    return a <= b + _SLACK * (1.0 + abs(a) + abs(b))


def _first_holding(flags) -> int | None:
    """Index of the first entry from which every flag is true, else None."""
    start = None
    for i, ok in enumerate(flags):
        if ok and start is None:
            start = i
        elif not ok:
            start = None
    return start


# ----------------------------------------------------------------------------
# growth curves


@dataclass(frozen=True)
class GrowthCurve:
    """``log r -> log M(r)`` either by direct evaluation or from a fitted model."""

    mode: str
    log_sigma_hat: float = 0.0
    rho_hat: float = 1.0
    valid_range: tuple[float, float] = (-math.inf, math.inf)
    f: CoefficientSeries | None = None
    overlap_max_dev: float | None = None
    overlap_tol: float = DEFAULT_OVERLAP_TOL

    @classmethod
    def model(cls, log_sigma_hat: float, rho_hat: float) -> GrowthCurve:
        if rho_hat <= 0:
            raise FitRejected("model exponent must be positive")
        return cls(FITTED, float(log_sigma_hat), float(rho_hat))

    @classmethod
    def exact(cls, f: CoefficientSeries, ceiling: float = DEFAULT_CEILING) -> GrowthCurve:
        return cls(EXACT, valid_range=(-math.inf, ceiling), f=f)

    @property
    def sigma_hat(self) -> float:
        return math.exp(self.log_sigma_hat)

    def __call__(self, log_r) -> Tower:
        """``log M`` at ``log r`` (both as towers)."""
        y = Tower.of(log_r)
        if self.mode == FITTED:
            # log log M = log sigma_hat + rho_hat * log r
            if y.level == 0:
                return Tower(0, self.log_sigma_hat + self.rho_hat * y.value).exp()
            return y.scale(self.rho_hat).add_const(self.log_sigma_hat).exp()
        if y.level > 0 or y.value > self.valid_range[1]:
            raise TruncationUnavailable(f"log r beyond the exact ceiling {self.valid_range[1]}")
        return Tower(0, max_modulus(self.f, y.value, ceiling=self.valid_range[1]))

    def to_dict(self) -> dict:
        d = {"mode": self.mode}
        if self.mode == FITTED:
            d.update(log_sigma_hat=self.log_sigma_hat, sigma_hat=self.sigma_hat, rho_hat=self.rho_hat,
                     overlap_max_dev=self.overlap_max_dev, overlap_tol=self.overlap_tol)
        else:
            d.update(function=self.f.identifier, ceiling=self.valid_range[1])
        return d


def fit_growth_curve(f: CoefficientSeries | None, profile: GrowthProfile,
                     tail_fraction: float = DEFAULT_TAIL_FRACTION,
                     tol: float = DEFAULT_OVERLAP_TOL) -> GrowthCurve:
    """Least-squares line through ``(log r, log log M)`` on the tail window.

    Raises FitRejected for polynomial growth, nonpositive fitted order, or when
    the line misses some tail point by more than ``tol`` in ``log log M``.
    """
    order = estimate_order(profile, tail_fraction)
    if order.diagnostics.get("polynomial_growth") or not (0 < order.rho < math.inf):
        raise FitRejected(f"order estimate {order.rho} does not support a power-law model")
    slope = order.diagnostics["fit_slope"]
    intercept = order.diagnostics["fit_intercept"]
    dev = order.diagnostics["fit_max_residual"]
    if slope <= 0:
        raise FitRejected(f"fitted exponent {slope} is not positive")
    if dev > tol:
        raise FitRejected(f"overlap disagreement {dev:.3g} exceeds {tol}")
    return GrowthCurve(FITTED, float(intercept), float(slope), f=None, overlap_max_dev=float(dev),
                       overlap_tol=tol)


# ----------------------------------------------------------------------------
# R_n, S_n


@dataclass
class SequencePair:
    alpha: float
    variant: str
    log_R: list[Tower]
    log_S: list[Tower]
    property2: list[bool]
    general: list[bool]
    n1: int | None
    verified: bool
    curve: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha, "variant": self.variant,
            "log_R": [t.to_dict() for t in self.log_R],
            "log_S": [t.to_dict() for t in self.log_S],
            "property2_holds": self.property2, "general_holds": self.general,
            "n1": self.n1, "verified": self.verified, "curve": self.curve, "notes": self.notes,
        }


def _pair_flags(alpha: float, log_R: list[Tower], log_S: list[Tower]):
    p2, gen = [], []
    for R, S in zip(log_R, log_S):
        p2.append(S <= R.scale(1.0 / (2 * alpha)))
        gen.append(S.add_const(math.log(2.0)) <= R.scale(1.0 / (4 * alpha)))
    return p2, gen


def build_sequences(curve: GrowthCurve, alpha: float, log_R1: float, log_S1: float,
                    n_max: int = 6, variant: str = HALF) -> SequencePair:
    """Iterate ``log R_{n+1} = curve(log R_n / c)`` and ``log S_{n+1} = curve(log S_n)``.

    ``c`` is ``2 alpha`` for the half-alpha variant and ``4 alpha`` for the
    quarter-alpha one. With an exact-mode curve the iteration stops (with a
    note) once a radius leaves the exact range.
    """
    if alpha <= 1:
        raise ValueError("alpha must exceed 1")
    if log_R1 <= 0 or log_S1 <= 0:
        raise ValueError("seeds must satisfy log R_1 > 0 and log S_1 > 0")
    if not 1 <= n_max <= MAX_STEPS:
        raise ValueError(f"n_max must lie in [1, {MAX_STEPS}]")
    if variant not in (HALF, QUARTER):
        raise ValueError(f"unknown variant {variant!r}")
    c = 2 * alpha if variant == HALF else 4 * alpha
    log_R, log_S = [Tower(0, log_R1)], [Tower(0, log_S1)]
    notes = []
    for n in range(1, n_max):
        try:
            r_next = curve(log_R[-1].scale(1.0 / c))
            s_next = curve(log_S[-1])
        except TruncationUnavailable as exc:
            notes.append(f"stopped after n = {n}: {exc}")
            break
        if n == 1 and r_next < log_R[0]:
            raise SeedTooSmall(f"log R_2 < log R_1 for log R_1 = {log_R1}: seed below the growth fixed point")
        log_R.append(r_next)
        log_S.append(s_next)
    p2, gen = _pair_flags(alpha, log_R, log_S)
    own = p2 if variant == HALF else gen
    start = _first_holding(own)
    if curve.mode == FITTED:
        notes.append("values beyond the first term come from the fitted model")
    return SequencePair(alpha, variant, log_R, log_S, p2, gen,
                        None if start is None else start + 1, start is not None,
                        curve.to_dict(), notes)


# ----------------------------------------------------------------------------
# the Wiman-Valiron inequalities behind the constants K, K''


@dataclass
class WVConstants:
    K: float
    K_witness_log_s: float | None
    log_s0: float
    log_s1: float
    log_K2: float
    table: list[dict]

    @property
    def K2(self) -> float:
        return math.exp(self.log_K2)

    def seed_ok(self, f: CoefficientSeries, log_R1: float, alpha: float) -> bool:
        """``mu(R_1^{1/(4 alpha)}) >= K''``."""
        return max_term(f, log_R1 / (4 * alpha))[0] >= self.log_K2

    def to_dict(self) -> dict:
        return {"K": self.K, "K_witness_log_s": self.K_witness_log_s, "log_s0": self.log_s0,
                "log_s1": self.log_s1, "log_K2": self.log_K2, "table": self.table}


def verify_wiman_valiron(f: CoefficientSeries, grid: Grid) -> WVConstants:
    """Find ``K`` and the thresholds ``s0, s1`` on ``grid``.

    The maximum-term bound ``log mu(2r) <= nu(2r) log 2r + K`` and the
    squared-radius bound ``log mu(r) + nu(r) log r <= log M(r^2)``.
    ``K`` is the least value ``log mu(s) >= 2`` over grid radii ``s`` making
    the maximum-term bound hold on a tail of the grid (2 when no grid radius reaches it).
    """
    x = grid.log_r
    if 2 * x[-1] > DEFAULT_CEILING:
        raise TruncationUnavailable("r^2 exceeds the exact ceiling on this grid")
    l2 = math.log(2.0)
    mu = [max_term(f, xi) for xi in x]
    mu2 = [max_term(f, xi + l2) for xi in x]
    lm_sq = [max_modulus(f, 2 * xi) for xi in x]

    eq2 = [_le(lm + nu * xi, m2) for xi, (lm, nu), m2 in zip(x, mu, lm_sq)]
    s1 = _first_holding(eq2)

    eq1_gap = [lm2 - nu2 * (xi + l2) for xi, (lm2, nu2) in zip(x, mu2)]
    candidates = sorted({(lm, xi) for xi, (lm, _) in zip(x, mu) if lm >= 2.0})
    if not candidates:
        candidates = [(2.0, None)]
    K = witness = s0 = None
    for k, xs in candidates:
        start = _first_holding([_le(g, k) for g in eq1_gap])
        if start is not None:
            K, witness, s0 = k, xs, start
            break

    table = []
    for i, xi in enumerate(x):
        table.append({"log_r": float(xi), "eq1_lhs_minus_nu_log2r": eq1_gap[i],
                      "eq1_holds": None if K is None else _le(eq1_gap[i], K),
                      "eq2_lhs": mu[i][0] + mu[i][1] * xi, "eq2_rhs": lm_sq[i], "eq2_holds": eq2[i]})
    if K is None:
        worst = max(range(len(x)), key=lambda i: (eq1_gap[i] > candidates[-1][0], x[i]))
        raise NotSatisfiedOnGrid("the maximum-term bound fails for every candidate K on this grid", table,
                                 witness=float(x[worst]))
    if s1 is None:
        bad = max(i for i, ok in enumerate(eq2) if not ok)
        raise NotSatisfiedOnGrid("the squared-radius bound does not hold on a tail of this grid", table, witness=float(x[bad]))
    return WVConstants(float(K), None if witness is None else float(witness), float(x[s0]), float(x[s1]),
                       2 * l2 + float(K), table)


# ----------------------------------------------------------------------------
# the l_n, k_n, a_n construction and the concluding inequality


@dataclass(frozen=True)
class Lemma1Record:
    n: int
    log_S: float
    a_n: float
    l_n: float
    k_n: float
    b: float
    b_n: float
    log_radius: float
    nu_radius: int
    nu_b: int
    near_jump: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _jump_near(f, log_b: float, width: float = 1e-6) -> bool:
    return max_term(f, log_b - width)[1] != max_term(f, log_b + width)[1]


def lemma1_construct(f: CoefficientSeries, pair: SequencePair, b_target: float,
                     iterations: int = 80) -> tuple[list[Lemma1Record], list[str]]:
    """Build ``l_n, k_n, a_n`` for each usable index of a quarter-alpha pair.

    ``l_n`` solves ``(8 S_n)^{2 l_n} = b_target`` exactly. Because ``a_n``
    depends on ``k_n`` through ``nu((8 S_n)^{2 k_n})``, ``k_n`` is the
    largest ``k <= l_n`` with ``k <= a_n(k)``: equal to ``l_n`` when
    ``a_n(l_n) >= l_n``, otherwise located by bisection (``a_n(k)`` is
    nonincreasing in ``k``). Returns the records and skip notices.
    """
    if b_target <= 1:
        raise ValueError("b_target must exceed 1 (otherwise l_n <= 0)")
    if pair.variant != QUARTER:
        raise ValueError("the construction uses the quarter-alpha sequences")
    alpha = pair.alpha
    log_b = math.log(b_target)
    records, notes = [], []
    for n, (R, S) in enumerate(zip(pair.log_R, pair.log_S), start=1):
        if R.level or S.level:
            notes.append(f"n = {n}: radii above the float range, skipped")
            continue
        log_S = S.value
        log_8S = math.log(8.0) + log_S
        l_n = log_b / (2.0 * log_8S)
        try:
            nu_R = max_term(f, R.value / (4 * alpha))[1]
            lm4 = max_modulus(f, math.log(4.0) + 2.0 * log_S)
        except TruncationUnavailable as exc:
            notes.append(f"n = {n}: {exc}")
            continue
        if lm4 <= 0:
            notes.append(f"n = {n}: log M(4 S_n^2) <= 0, a_n undefined")
            continue
        b_n = nu_R / lm4**2

        def a_of(k):
            nu_k = max_term(f, 2.0 * k * log_8S)[1]
            return math.inf if nu_k == 0 else b_n / nu_k

        if a_of(l_n) >= l_n:
            k_n = l_n
        else:
            lo, hi = 0.0, l_n
            for _ in range(iterations):
                mid = 0.5 * (lo + hi)
                if mid <= a_of(mid):
                    lo = mid
                else:
                    hi = mid
            k_n = lo
        a_n = a_of(k_n)
        if not k_n <= a_n:
            raise AssertionError(f"k_n > a_n at n = {n}")
        log_radius = 2.0 * k_n * log_8S
        records.append(Lemma1Record(n, log_S, a_n, l_n, k_n, b_target, b_n, log_radius,
                                    max_term(f, log_radius)[1], max_term(f, log_b)[1], _jump_near(f, log_b)))
    return records, notes


def verify_conclusion_ineq(f: CoefficientSeries, records: list[Lemma1Record], alpha: float) -> dict:
    """``nu(2 S_n) <= a_n nu((8 S_n)^{2 k_n}) log (8 S_n)^{2 k_n} / (4 alpha)`` per record."""
    rows = []
    for rec in records:
        lhs = max_term(f, math.log(2.0) + rec.log_S)[1]
        nu_k = max_term(f, rec.log_radius)[1]
        rhs = 0.0 if nu_k == 0 else rec.a_n * nu_k * rec.log_radius / (4 * alpha)
        rows.append({"n": rec.n, "lhs": float(lhs), "rhs": float(rhs), "holds": _le(lhs, rhs)})
    start = _first_holding([r["holds"] for r in rows])
    if start is None:
        raise NotSatisfiedOnGrid("inequality fails at the last computed index", rows,
                                 witness=rows[-1]["n"] if rows else None)
    return {"n1": rows[start]["n"], "rows": rows}


# ----------------------------------------------------------------------------
# radius inequalities along the argument


def _passing_table(x, lhs, rhs, holds, what):
    rows = [{"log_r": float(a), "lhs": float(b), "rhs": float(c), "holds": bool(h)}
            for a, b, c, h in zip(x, lhs, rhs, holds)]
    start = _first_holding(holds)
    if start is None:
        bad = max((i for i, h in enumerate(holds) if not h), default=len(holds) - 1)
        raise NotSatisfiedOnGrid(f"{what} does not hold on a tail of this grid", rows,
                                 witness=float(x[bad]))
    return {"first_log_r": float(x[start]), "rows": rows}


def verify_lemma2(f: CoefficientSeries, m: float, grid: Grid) -> dict:
    """``M(u log u) >= [ (1/(2m)) M(u)^{1/(2m)} log M(u) ]^m`` with ``u = r^{1/(2m)}``.

    Compared as logarithms: ``log M(u log u)`` against
    ``m [log M(u)/(2m) + log log M(u) - log 2m]``. Radii where ``u log u <= 0``
    or ``log M(u) <= 0`` count as failures.
    """
    if m <= 1:
        raise ValueError("m must exceed 1")
    x = grid.log_r
    lhs, rhs, holds = [], [], []
    for xi in x:
        log_u = xi / (2 * m)
        lm_u = max_modulus(f, log_u)
        if log_u <= 0 or lm_u <= 0:
            lhs.append(math.nan)
            rhs.append(math.nan)
            holds.append(False)
            continue
        left = max_modulus(f, log_u + math.log(log_u))
        right = m * (lm_u / (2 * m) + math.log(lm_u) - math.log(2 * m))
        lhs.append(left)
        rhs.append(right)
        holds.append(_le(right, left))
    return _passing_table(x, lhs, rhs, holds, "the u log u inequality")


def find_sigma_step1(f: CoefficientSeries, log_r: float, alpha: float, tol: float = DEFAULT_SIGMA_TOL,
                     scan: int = 32, max_iter: int = 200) -> float:
    """``log sigma`` in ``[log r, alpha log r]`` with ``L(sigma) = M(r)``.

    A uniform scan brackets the first sign change of
    ``g = log L(sigma) - log M(r)``; bisection then runs until the bracket
    is narrower than ``tol`` and ``|g| <= tol`` at the returned point.
    """
    if alpha <= 1:
        raise ValueError("alpha must exceed 1")
    if log_r <= 0:
        raise ValueError("need r > 1")
    target = max_modulus(f, log_r)

    def g(y):
        return min_modulus(f, y) - target

    g_lo = g(log_r)
    if g_lo >= 0:
        return float(log_r)
    ys = np.linspace(log_r, alpha * log_r, scan + 1)
    a = float(log_r)
    b = None
    for y in ys[1:]:
        gy = g(float(y))
        if gy >= 0:
            b = float(y)
            break
        a = float(y)
    if b is None:
        raise NotFound(f"log L stays below log M(r) on [{log_r}, {alpha * log_r}]")
    best, gbest = b, g(b)
    for _ in range(max_iter):
        if b - a < tol and abs(gbest) <= tol:
            break
        mid = 0.5 * (a + b)
        if mid in (a, b):
            break
        gm = g(mid)
        if abs(gm) < abs(gbest) or b - a >= tol:
            best, gbest = mid, gm
        if gm >= 0:
            b = mid
        else:
            a = mid
    return float(best)


def verify_step2ii(f: CoefficientSeries, alpha: float, grid: Grid) -> dict:
    """``log M(r^{2 alpha}) >= 2 alpha log M(r)`` on ``grid``."""
    if alpha <= 1:
        raise ValueError("alpha must exceed 1")
    x = grid.log_r
    lhs = [max_modulus(f, 2 * alpha * xi) for xi in x]
    rhs = [2 * alpha * max_modulus(f, xi) for xi in x]
    holds = [_le(b, a) for a, b in zip(lhs, rhs)]
    return _passing_table(x, lhs, rhs, holds, "the power inequality")


@dataclass(frozen=True)
class CircleTriple:
    n: int
    log_T: Tower
    log_T1: Tower
    log_T2: Tower
    T1_mode: str
    ordered: bool

    def to_dict(self) -> dict:
        return {"n": self.n, "log_T": self.log_T.to_dict(), "log_T1": self.log_T1.to_dict(),
                "log_T2": self.log_T2.to_dict(), "T1_mode": self.T1_mode, "ordered": self.ordered}


def circle_triple(pair: SequencePair, curve: GrowthCurve, n: int, alpha: float | None = None,
                  f: CoefficientSeries | None = None, epsilon: float = 0.1,
                  exact_cap: float = DEFAULT_CEILING) -> CircleTriple:
    """Radii of the circles ``T_n``, ``T_n^1``, ``T_n^2`` (as ``log`` towers).

    ``log T_n^1 = log sigma_n`` with ``sigma_n`` the radius with ``L(sigma_n) = M(rho_n)`` for
    ``rho_n = (1/(2 alpha)) R_n^{1/(2 alpha)} log R_n``. It is computed
    exactly when ``f`` is given and ``rho_n^alpha`` is in range; otherwise
    the fitted model gives ``L(sigma) ~ (1 - epsilon) M(sigma)``, i.e.
    ``log sigma_n = log rho_n - log(1 - epsilon) / rho_hat``.
    """
    if not 1 <= n <= len(pair.log_R):
        raise IndexError(f"n = {n} outside the computed range 1..{len(pair.log_R)}")
    alpha = pair.alpha if alpha is None else alpha
    R, S = pair.log_R[n - 1], pair.log_S[n - 1]
    # log rho_n = log R_n / (2 alpha) + log log R_n - log 2 alpha
    log_rho = R.scale(1.0 / (2 * alpha)).add(R.log()).add_const(-math.log(2 * alpha))
    log_T2 = log_rho.scale(alpha)
    mode = "model-estimate"
    log_T1 = None
    if f is not None and log_rho.level == 0 and alpha * log_rho.value <= exact_cap:
        try:
            log_T1 = Tower(0, find_sigma_step1(f, log_rho.value, alpha))
            mode = EXACT
        except (NotFound, TruncationUnavailable):
            log_T1 = None
    if log_T1 is None:
        # an exact-mode curve has no fitted exponent; fall back to order one
        rho_hat = curve.rho_hat if curve.mode == FITTED else 1.0
        mode = "model-estimate" if curve.mode == FITTED else "order-one-estimate"
        log_T1 = log_rho.add_const(-math.log1p(-epsilon) / rho_hat)
    ordered = bool(S < log_T1 <= log_T2)
    return CircleTriple(n, S, log_T1, log_T2, mode, ordered)


# ----------------------------------------------------------------------------
# the special case 0 < lambda <= rho < oo


def special_case_seeds(exponents: GrowthExponents, alpha: float, curve: GrowthCurve | None = None,
                       log_R1: float | None = None, log_S1: float | None = None,
                       n_max: int = 6) -> dict:
    """``n_{lambda,rho}`` and the induction inequality ``log S_n/(2 alpha) <= log R_n/(16 alpha^4 n)``."""
    rho, lam = exponents.rho, exponents.lam
    if lam <= 0 or not math.isfinite(rho):
        raise UndefinedForZeroLowerOrder(f"need 0 < lambda <= rho < oo, got lambda = {lam}, rho = {rho}")
    n_lr = int(math.floor(rho / lam)) + 1
    out = {"n_lambda_rho": n_lr, "rho": rho, "lambda": lam, "rows": []}
    if curve is None or log_R1 is None or log_S1 is None:
        return out
    pair = build_sequences(curve, alpha, log_R1, log_S1, n_max, HALF)
    for n, (R, S) in enumerate(zip(pair.log_R, pair.log_S), start=1):
        lhs = S.scale(1.0 / (2 * alpha))
        rhs = R.scale(1.0 / (16 * alpha**4 * n_lr))
        out["rows"].append({"n": n, "lhs": lhs.to_dict(), "rhs": rhs.to_dict(), "holds": lhs <= rhs})
    out["seed_condition"] = out["rows"][0]["holds"]
    return out
