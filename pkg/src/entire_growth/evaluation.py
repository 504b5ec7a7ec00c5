"""
Truncated power-series evaluation on circles ``|z| = r``.

Terms are normalised by the maximum term before summation, so nothing
overflows. Each float sum carries a rigorous-in-spirit absolute error bound;
samples whose relative error is too large (heavy cancellation, e.g. ``exp`` on
the negative axis) are re-summed with exact coefficients in ``gmpy2``
arithmetic at adaptively chosen precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import gmpy2
import numpy as np

from .errors import TruncationUnavailable
from .logdomain import LogComplex
from .series import CoefficientSeries

#: largest ``log r`` at which series evaluation is attempted
DEFAULT_CEILING = 700.0
#: largest number of nonzero terms the truncation walk may visit
DEFAULT_MAX_TERMS = 2_000_000
DEFAULT_TOL = 1e-12
#: float sums with a worse relative error bound are recomputed in multiprecision
RELIABLE_REL_ERR = 1e-10

_EPS = np.finfo(float).eps
_CHUNK = 1 << 21


@dataclass(frozen=True)
class Terms:
    """The retained terms of a truncated series at one radius."""

    n: np.ndarray  # nonzero indices kept, ascending
    log_abs: np.ndarray
    phase: np.ndarray
    log_term: np.ndarray  # log|a_n| + n log r
    log_mu: float
    nu: int
    N: int  # truncation index
    log_tail: float  # log of the tail bound (absolute, same scale as log_mu)


def _check_radius(log_r: float, ceiling: float) -> None:
    if not math.isfinite(log_r):
        raise ValueError(f"log_r must be finite, got {log_r}")
    if log_r > ceiling:
        raise TruncationUnavailable(
            f"log r = {log_r:g} exceeds the exact-evaluation ceiling {ceiling:g}"
        )


def _tie_mask(t: np.ndarray, la: np.ndarray, n: np.ndarray, log_r: float, log_mu: float) -> np.ndarray:
    slack = 1e-12 * (1.0 + np.abs(la) + np.abs(n * log_r))
    return t >= log_mu - slack


@lru_cache(maxsize=4096)
def _truncate_cached(f: CoefficientSeries, log_r: float, log_tol: float,
                     ceiling: float, max_terms: int) -> Terms:
    _check_radius(log_r, ceiling)
    if f.support_size is not None:
        j = np.arange(f.support_size)
        n = f.support(j)
        la = f.log_abs(n)
        t = la + n * log_r
        log_tail = -math.inf
    else:
        chunks_n, chunks_la, chunks_t = [], [], []
        start, block = 0, 256
        running = -math.inf
        stop = None
        while stop is None:
            if start >= max_terms:
                raise TruncationUnavailable(
                    f"{f.identifier}: more than {max_terms} terms needed at log r = {log_r:g}"
                )
            j = np.arange(start, min(start + block, max_terms))
            n = f.support(j)
            la = f.log_abs(n)
            t = la + n * log_r
            q = f.log_ratio_bound(j, log_r)
            prefix = np.maximum.accumulate(np.concatenate(([running], t)))[:-1]
            with np.errstate(invalid="ignore", divide="ignore"):
                tail = t - np.log1p(-np.exp(np.minimum(q, 0.0)))
                ok = (q < 0) & (tail < log_tol + prefix) & (j >= 1)
            hits = np.flatnonzero(ok)
            if hits.size:
                h = int(hits[0])
                stop = h
                log_tail = float(tail[h])
                n, la, t = n[:h], la[:h], t[:h]
            chunks_n.append(n)
            chunks_la.append(la)
            chunks_t.append(t)
            if t.size:
                running = max(running, float(np.max(t)))
            start += j.size
            block = min(block * 2, 1 << 18)
        n = np.concatenate(chunks_n)
        la = np.concatenate(chunks_la)
        t = np.concatenate(chunks_t)
    if not np.any(np.isfinite(t)):
        raise ValueError(f"{f.identifier} has no nonzero coefficients")
    keep = np.isfinite(la)
    n, la, t = n[keep], la[keep], t[keep]
    log_mu = float(np.max(t))
    nu = int(n[_tie_mask(t, la, n, log_r, log_mu)].max())
    ph = f.phase(n)
    for arr in (n, la, ph, t):
        arr.setflags(write=False)
    return Terms(n=n, log_abs=la, phase=ph, log_term=t, log_mu=log_mu, nu=nu,
                 N=int(n[-1]), log_tail=log_tail)


def truncate(f: CoefficientSeries, log_r: float, log_tol: float = math.log(DEFAULT_TOL),
             ceiling: float = DEFAULT_CEILING, max_terms: int = DEFAULT_MAX_TERMS) -> Terms:
    """Terms of ``f`` at radius ``exp(log_r)`` with tail below ``exp(log_tol) * mu``."""
    return _truncate_cached(f, float(log_r), float(log_tol), float(ceiling), int(max_terms))


def truncation_index(f: CoefficientSeries, log_r: float, tol: float = DEFAULT_TOL, *,
                     ceiling: float = DEFAULT_CEILING, max_terms: int = DEFAULT_MAX_TERMS) -> int:
    """Smallest index ``N`` whose tail ``sum_{k>N} |a_k| r**k`` is provably below ``tol * mu(r)``."""
    if not 0 < tol < 1:
        raise ValueError("tol must lie in (0, 1)")
    return truncate(f, log_r, math.log(tol), ceiling, max_terms).N


# ----------------------------------------------------------------------------
# float summation


def _float_sum(terms: Terms, thetas: np.ndarray, log_tol: float):
    """Normalised sums ``S(theta) = sum w_k e^{i(phi_k + n_k theta)}`` and error bounds."""
    w = np.exp(terms.log_term - terms.log_mu)
    # dropping tiny leading terms costs at most 1e-3 of the tail budget
    floor = math.exp(log_tol) * 1e-3 / max(len(w), 1)
    keep = w > floor
    dropped = float(w[~keep].sum())
    w, n, ph = w[keep], terms.n[keep].astype(float), terms.phase[keep]
    thetas = np.asarray(thetas, dtype=float)
    out = np.empty(thetas.shape, dtype=complex)
    rows = max(1, _CHUNK // max(len(w), 1))
    for s in range(0, thetas.size, rows):
        th = thetas[s:s + rows]
        arg = ph[None, :] + th[:, None] * n[None, :]
        out[s:s + rows] = np.exp(1j * arg) @ w
    wsum = float(w.sum())
    round_err = _EPS * (4.0 * wsum + np.abs(thetas) * float(w @ n)) * 2.0
    tail = math.exp(terms.log_tail - terms.log_mu) if terms.log_tail > -math.inf else 0.0
    err = round_err + tail + dropped
    return out, err


# ----------------------------------------------------------------------------
# multiprecision summation

_coeff_cache: dict = {}


def _mp_coeffs(f: CoefficientSeries, n: np.ndarray, prec: int) -> list:
    """Exact coefficients rounded to ``prec`` bits, cached per family and precision."""
    if len(_coeff_cache) > 64:
        _coeff_cache.clear()
    table = _coeff_cache.setdefault((f.identifier, prec), {})
    out = []
    for k in n.tolist():
        v = table.get(k)
        if v is None:
            c = f.exact(k)
            if isinstance(c, complex):
                v = gmpy2.mpc(c, precision=prec)
            else:
                v = gmpy2.mpc(gmpy2.mpfr(gmpy2.mpq(c.numerator, c.denominator), prec), precision=prec)
            table[k] = v
        out.append(v)
    return out


def clear_caches() -> None:
    """Drop memoised truncations and multiprecision coefficient tables."""
    _truncate_cached.cache_clear()
    _coeff_cache.clear()


def _mp_sum(f: CoefficientSeries, n: np.ndarray, log_r: float, theta: float, prec: int):
    prec = 256 * (prec // 256 + 1)
    coeffs = _mp_coeffs(f, n, prec)
    with gmpy2.context(gmpy2.get_context(), precision=prec):
        r = gmpy2.exp(gmpy2.mpfr(log_r))
        th = gmpy2.mpfr(theta)
        z = gmpy2.mpc(r * gmpy2.cos(th), r * gmpy2.sin(th))
        idx = n.tolist()
        acc = coeffs[-1]
        prev = idx[-1]
        for k, c in zip(reversed(idx[:-1]), reversed(coeffs[:-1])):
            gap = prev - k
            acc = acc * (z if gap == 1 else z ** gap) + c
            prev = k
        if prev:
            acc = acc * z ** prev
        mag = abs(acc)
        if mag == 0:
            return -math.inf, 0.0, prec
        return float(gmpy2.log(mag)), float(gmpy2.phase(acc)), prec


def _precise_value(f, log_r, theta, log_tol, ceiling, max_terms, log_guess, rel=RELIABLE_REL_ERR):
    """Evaluate one point in multiprecision until the relative error is below ``rel``.

    ``log_guess`` estimates ``log|f|``; each failed attempt doubles the
    number of nats of cancellation the precision and truncation allow for.
    """
    base = truncate(f, log_r, log_tol, ceiling, max_terms)
    lost = max(base.log_mu - log_guess, 20.0)
    log_mag, phase = -math.inf, 0.0
    for _ in range(12):
        target = base.log_mu - lost
        need_tol = max(math.log(rel) + target - base.log_mu - 2.0, -1e6)
        terms = truncate(f, log_r, min(log_tol, need_tol), ceiling, max_terms)
        prec = int(96 + (terms.log_mu - target) / math.log(2.0) + 2 * math.log2(len(terms.n) + 1))
        log_mag, phase, prec = _mp_sum(f, terms.n, log_r, theta, prec)
        # Horner roundoff is at most ~ 2^-prec * len**2 * mu
        log_round = -prec * math.log(2.0) + 2.0 * math.log(len(terms.n) + 2) + 2.0 + terms.log_mu
        log_err = float(np.logaddexp(log_round, terms.log_tail))
        if log_mag > -math.inf and log_err <= math.log(rel) + log_mag:
            return log_mag, phase
        if log_mag > -math.inf:
            lost = max(2.0 * lost, base.log_mu - log_mag + 20.0)
        else:
            lost *= 2.0
            if prec > 1 << 14:
                break
    return log_mag, phase


# ----------------------------------------------------------------------------
# public evaluation


def circle_values(f: CoefficientSeries, log_r: float, thetas, tol: float = DEFAULT_TOL, *,
                  refine=None, ceiling: float = DEFAULT_CEILING,
                  max_terms: int = DEFAULT_MAX_TERMS):
    """``log|f|`` and ``arg f`` at ``r e^{i theta}`` for an array of angles.

    ``refine`` selects which unreliable samples are recomputed in
    multiprecision: ``"all"`` (default), ``"max"``, ``"min"`` or ``"none"``.
    Returns ``(log_mag, phase, log_err)`` where ``log_err`` is the log of the
    absolute error bound still attached to each value.
    """
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    log_tol = math.log(tol)
    terms = truncate(f, log_r, log_tol, ceiling, max_terms)
    sums, err = _float_sum(terms, thetas, log_tol)
    err = np.broadcast_to(err, thetas.shape).astype(float)
    mag = np.abs(sums)
    with np.errstate(divide="ignore"):
        log_mag = np.log(mag) + terms.log_mu
        log_err = np.log(err) + terms.log_mu
    phase = np.angle(sums)
    refine = refine or "all"
    bad = ~(err <= RELIABLE_REL_ERR * mag)
    if refine == "none" or not bad.any():
        return log_mag, phase, log_err
    with np.errstate(divide="ignore"):
        upper = np.log(mag + err) + terms.log_mu
        lower = np.log(np.maximum(mag - err, 0.0)) + terms.log_mu
    candidates = bad.copy()
    good = ~bad
    if refine == "max" and good.any():
        candidates &= upper >= lower[good].max()
    elif refine == "min" and good.any():
        candidates &= lower <= upper[good].min()
    log_mag = log_mag.copy()
    phase = phase.copy()
    log_err = log_err.copy()
    prev_i, prev_lm = -2, -math.inf
    for i in np.flatnonzero(candidates):
        guess = float(upper[i])
        if i == prev_i + 1 and prev_lm > -math.inf:
            guess = min(guess, prev_lm + 3.0)
        lm, ph = _precise_value(f, log_r, float(thetas[i]), log_tol, ceiling, max_terms, guess)
        prev_i, prev_lm = i, lm
        log_mag[i], phase[i] = lm, ph
        log_err[i] = lm + math.log(RELIABLE_REL_ERR) if lm > -math.inf else -math.inf
    return log_mag, phase, log_err


def eval_log(f: CoefficientSeries, log_r: float, theta: float, tol: float = DEFAULT_TOL, *,
             ceiling: float = DEFAULT_CEILING, max_terms: int = DEFAULT_MAX_TERMS) -> LogComplex:
    """``f(r e^{i theta})`` in log form, summed without overflow."""
    if not 0 < tol < 1:
        raise ValueError("tol must lie in (0, 1)")
    lm, ph, _ = circle_values(f, log_r, [theta], tol, ceiling=ceiling, max_terms=max_terms)
    return LogComplex(float(lm[0]), float(ph[0]))


def eval_point(f: CoefficientSeries, z: complex, tol: float = DEFAULT_TOL) -> LogComplex:
    """Series evaluation at an arbitrary point."""
    if z == 0:
        c = f.coeff_log(0)
        return c if c is not None else LogComplex(-math.inf, 0.0)
    return eval_log(f, math.log(abs(z)), math.atan2(z.imag, z.real), tol)
