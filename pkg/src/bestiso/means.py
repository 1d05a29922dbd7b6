"""Weighted L_p means of a finite multiset, for every exponent the regressions use.

A level set of an optimal L_p isotonic regression takes a value in the
weighted L_p mean of its data, so each regression family in this package
bottoms out in one of these functions.  Products of powers are always
evaluated as weighted log-sums, with ``0 * ln 0 = 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .exceptions import ConvergenceError

__all__ = [
    "WeightedSet",
    "MeanResult",
    "median_interval",
    "lower_median",
    "wmean_p",
    "wmean_down1",
    "wmean_up1",
    "wmean_p_sub1",
    "wmean_0",
    "wmean_inf",
    "wmean_1_inf",
    "wmean_1_0",
    "wmean_neg_p",
    "bisect_increasing",
]

MAX_ITER = 200
REL_FLOOR = 1e-12
HALF_RTOL = 1e-12


@dataclass(frozen=True)
class WeightedSet:
    values: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).ravel()
        weights = (
            np.ones_like(values) if self.weights is None
            else np.asarray(self.weights, dtype=float).ravel()
        )
        if values.size == 0:
            raise ValueError("weighted set is empty")
        if values.shape != weights.shape:
            raise ValueError("values and weights differ in length")
        if np.any(weights <= 0) or not np.all(np.isfinite(weights)):
            raise ValueError("weights must be finite and strictly positive")
        if not np.all(np.isfinite(values)):
            raise ValueError("values must be finite")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "weights", weights)

    @property
    def total(self) -> float:
        return float(self.weights.sum())

    def distinct(self) -> tuple[np.ndarray, np.ndarray]:
        """Sorted distinct values with their summed weights."""
        vals, inv = np.unique(self.values, return_inverse=True)
        wts = np.zeros(len(vals))
        np.add.at(wts, inv.ravel(), self.weights)
        return vals, wts


def as_set(s, weights=None) -> WeightedSet:
    if isinstance(s, WeightedSet):
        return s
    if hasattr(s, "values") and hasattr(s, "weights") and weights is None:
        return WeightedSet(s.values, s.weights)
    return WeightedSet(np.asarray(s, dtype=float), weights)


@dataclass(frozen=True)
class MeanResult:
    """A mean that is a point, a closed interval ``(lo, hi)`` or a finite set of points."""

    kind: str
    payload: object

    @classmethod
    def point(cls, x: float) -> "MeanResult":
        return cls("point", float(x))

    @classmethod
    def interval(cls, lo: float, hi: float) -> "MeanResult":
        if lo > hi:
            raise ValueError("interval has lo > hi")
        if lo == hi:
            return cls.point(lo)
        return cls("interval", (float(lo), float(hi)))

    @classmethod
    def finite_set(cls, xs) -> "MeanResult":
        xs = tuple(sorted({float(x) for x in xs}))
        if not xs:
            raise ValueError("finite-set mean must be nonempty")
        return cls("set", xs)

    @property
    def bounds(self) -> tuple[float, float]:
        if self.kind == "point":
            return self.payload, self.payload
        if self.kind == "interval":
            return self.payload
        return self.payload[0], self.payload[-1]

    @property
    def is_unique(self) -> bool:
        return self.kind == "point" or (self.kind == "set" and len(self.payload) == 1)

    def points(self) -> tuple[float, ...]:
        if self.kind == "point":
            return (self.payload,)
        if self.kind == "interval":
            return self.payload
        return self.payload

    def __contains__(self, x) -> bool:
        if self.kind == "set":
            return float(x) in self.payload
        lo, hi = self.bounds
        return lo <= x <= hi

    def to_json(self):
        if self.kind == "point":
            return self.payload
        return list(self.payload)


def _half_sign(x: float, total: float) -> int:
    """Sign of ``x - total/2`` with a relative tolerance."""
    d = 2.0 * x - total
    if abs(d) <= HALF_RTOL * total:
        return 0
    return 1 if d > 0 else -1


def _median_indices(wts: np.ndarray) -> tuple[int, int]:
    total = float(wts.sum())
    cum = np.cumsum(wts)
    lo = next(k for k in range(len(wts)) if _half_sign(cum[k], total) >= 0)
    tail = total - cum + wts
    hi = max(k for k in range(len(wts)) if _half_sign(tail[k], total) >= 0)
    return lo, hi


def median_interval(s, weights=None) -> MeanResult:
    """The set of weighted L1 means: the unique weighted median or ``[a, b]``.

    >>> median_interval([1, 2, 3, 4])
    MeanResult(kind='interval', payload=(2.0, 3.0))
    """
    vals, wts = as_set(s, weights).distinct()
    lo, hi = _median_indices(wts)
    return MeanResult.interval(vals[lo], vals[hi])


def lower_median(values, weights=None) -> float:
    return median_interval(values, weights).bounds[0]


def bisect_increasing(fn: Callable[[float], float], lo: float, hi: float, tol: float) -> float:
    """Root of an increasing function on ``(lo, hi)`` by bisection.

    Only interior points are evaluated, so ``fn`` may diverge at the ends.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    for _ in range(MAX_ITER):
        mid = 0.5 * (lo + hi)
        if hi - lo <= max(tol, REL_FLOOR * max(abs(lo), abs(hi), 1.0)):
            return mid
        val = fn(mid)
        if val == 0:
            return mid
        if val > 0:
            hi = mid
        else:
            lo = mid
    raise ConvergenceError(f"bisection did not reach tol={tol} within {MAX_ITER} steps")


def _lp_slope(vals, wts, q):
    """Derivative of ``sum w |y - v|^(q+1)`` divided by ``q + 1``.

    Split into the sign count plus ``expm1`` corrections so exponents
    barely above 1 keep their relative precision.
    """
    def slope(y):
        d = y - vals
        ws = wts * np.sign(d)
        with np.errstate(divide="ignore"):
            # a zero distance gives expm1(-inf) = -1, multiplied by a zero sign
            t = np.expm1(q * np.log(np.abs(d)))
        return float(ws.sum() + ws @ t)
    return slope


def wmean_p(s, p: float, tol: float = 1e-12, weights=None) -> float:
    """Unique weighted L_p mean for ``p > 1``, by bisection on the derivative."""
    if not p > 1:
        raise ValueError("wmean_p needs p > 1")
    vals, wts = as_set(s, weights).distinct()
    if len(vals) == 1:
        return float(vals[0])
    return bisect_increasing(_lp_slope(vals, wts, p - 1.0), vals[0], vals[-1], tol)


def _jackson_balance(vals, wts, a, b):
    left = vals <= a
    right = vals >= b
    lv, lw = vals[left], wts[left]
    rv, rw = vals[right], wts[right]

    def balance(c):
        return float(np.sum(lw * np.log(c - lv)) - np.sum(rw * np.log(rv - c)))
    return balance


def wmean_down1(s, tol: float = 1e-12, weights=None) -> float:
    """Limit of ``wmean_p`` as ``p`` decreases to 1 (Jackson's median).

    A unique weighted median is returned as is.  Otherwise the median
    interval is ``[a, b]`` and the answer is the root in ``(a, b)`` of
    ``sum_{y<=a} w ln(c - y) = sum_{y>=b} w ln(y - c)``.
    """
    vals, wts = as_set(s, weights).distinct()
    lo, hi = _median_indices(wts)
    if lo == hi:
        return float(vals[lo])
    a, b = float(vals[lo]), float(vals[hi])
    return bisect_increasing(_jackson_balance(vals, wts, a, b), a, b, tol)


def _xlogx_sum(wts, dist):
    nz = dist > 0
    return float(np.sum(wts[nz] * dist[nz] * np.log(dist[nz])))


def _power_gap(wts, c, d, eps):
    """``sum w c^(1-eps) - sum w d^(1-eps)`` without the (equal) L1 parts."""
    def part(dist):
        nz = dist > 0
        terms = wts[nz] * dist[nz] * np.expm1(-eps * np.log(dist[nz]))
        return float(np.sum(terms)), float(np.sum(np.abs(terms)))
    gc, sc = part(c)
    gd, sd = part(d)
    return gc - gd, sc + sd


def wmean_up1(s, eps_schedule: Sequence[float] = (1e-3, 1e-4, 1e-5, 1e-6), weights=None) -> MeanResult:
    """Limit of the L_p means as ``p`` increases to 1.

    The limit is always a weighted median data value.  When the median is
    not unique the two candidates ``a < b`` are ranked by
    ``T(x) = sum w |y - x| ln |y - x|``; the larger ``T`` has the smaller
    ``sum w |y - x|^(1 - eps)`` for small ``eps`` and wins.  Exact ties fall
    back to evaluating that objective directly along ``eps_schedule``; if it
    still cannot separate them both are returned.
    """
    vals, wts = as_set(s, weights).distinct()
    lo, hi = _median_indices(wts)
    if lo == hi:
        return MeanResult.point(vals[lo])
    a, b = float(vals[lo]), float(vals[hi])
    c, d = np.abs(vals - a), np.abs(vals - b)
    ta, tb = _xlogx_sum(wts, c), _xlogx_sum(wts, d)
    if abs(ta - tb) > 1e-12 * (abs(ta) + abs(tb) + 1.0):
        return MeanResult.point(a if ta > tb else b)
    for eps in eps_schedule:
        gap, scale = _power_gap(wts, c, d, eps)
        if abs(gap) > 1e-12 * scale:
            return MeanResult.point(a if gap < 0 else b)
    return MeanResult.finite_set([a, b])


def _argmins(scores: np.ndarray, rtol: float = 1e-12) -> np.ndarray:
    best = scores.min()
    return np.flatnonzero(scores <= best + rtol * max(abs(best), 1e-300))


def wmean_p_sub1(s, p: float, weights=None) -> MeanResult:
    """All minimisers of ``sum w |y - v|^p`` for ``0 < p < 1``.

    The objective is concave between consecutive data values, so only data
    values need to be tried.
    """
    if not 0 < p < 1:
        raise ValueError("wmean_p_sub1 needs 0 < p < 1")
    vals, wts = as_set(s, weights).distinct()
    scores = np.array([np.sum(wts * np.abs(vals - y) ** p) for y in vals])
    return MeanResult.finite_set(vals[_argmins(scores)])


def wmean_0(s, weights=None) -> MeanResult:
    """Values carrying the largest total weight."""
    vals, wts = as_set(s, weights).distinct()
    top = wts.max()
    return MeanResult.finite_set(vals[wts >= top * (1 - 1e-12)])


def _inf_balance(vals, wts):
    def balance(y):
        return float(np.max(wts * (y - vals)) - np.max(wts * (vals - y)))
    return balance


def wmean_inf(s, tol: float = 1e-12, weights=None) -> float:
    """Unique minimiser of ``max w |y - v|``.

    Bisection brackets the crossing of the two one-sided maxima; the result
    is then snapped to the weighted mean of the active pair when that lies
    inside the final bracket.
    """
    ws = as_set(s, weights)
    # a max-type objective: repeated values must not pool their weights
    vals, wts = ws.values, ws.weights
    lo, hi = float(vals.min()), float(vals.max())
    if lo == hi:
        return lo
    y = bisect_increasing(_inf_balance(vals, wts), lo, hi, tol)
    lo_k = int(np.argmax(wts * (y - vals)))
    hi_k = int(np.argmax(wts * (vals - y)))
    pair = (wts[lo_k] * vals[lo_k] + wts[hi_k] * vals[hi_k]) / (wts[lo_k] + wts[hi_k])
    if abs(pair - y) <= 2 * max(tol, REL_FLOOR * max(abs(y), 1.0)):
        return float(pair)
    return y


def wmean_1_inf(s, tol: float = 1e-12, weights=None) -> float:
    """The L1 mean with least L-infinity error: ``wmean_inf`` clamped into the median interval."""
    ws = as_set(s, weights)
    lo, hi = median_interval(ws).bounds
    return float(min(max(wmean_inf(ws, tol), lo), hi))


def wmean_1_0(s, weights=None) -> MeanResult:
    """Among the weighted-median data values, those of largest weight."""
    vals, wts = as_set(s, weights).distinct()
    lo, hi = _median_indices(wts)
    cand, cw = vals[lo:hi + 1], wts[lo:hi + 1]
    return MeanResult.finite_set(cand[cw >= cw.max() * (1 - 1e-12)])


def neg_exponent(p: float):
    """Exponent ``1/p`` used for a negative ``p``; an int when ``1/p`` is integral."""
    q = 1.0 / p
    r = round(q)
    return int(r) if abs(q - r) <= 1e-9 * max(1.0, abs(q)) else q


def neg_power_score(errors, weights, p: float) -> tuple:
    """Score ``(Z, S)`` of errors under a negative exponent; larger is better.

    ``Z`` is the weight of exact fits (each an infinite term) and ``S`` is
    ``sum_{e > 0} w e^(1/p)``.  The exponent is ``1/p`` so that ``p -> 0-``
    sends it to ``-inf`` and the smallest errors dominate, which is the limit
    in which the ranking agrees with lex-zero.  For integral ``1/p`` the
    score is exact (``Fraction``), since at deep exponents the secondary
    terms fall far below double precision; otherwise ``S`` is returned as a
    float log-sum.
    """
    errors = np.abs(np.asarray(errors, dtype=float)).ravel()
    weights = np.asarray(weights, dtype=float).ravel()
    q = neg_exponent(p)
    zero = errors == 0
    if isinstance(q, int):
        z = sum((Fraction(x) for x in weights[zero]), Fraction(0))
        s = sum((Fraction(x) * Fraction(e) ** q for e, x in zip(errors[~zero], weights[~zero])), Fraction(0))
        return z, s
    z = float(weights[zero].sum())
    nz = ~zero
    if not np.any(nz):
        return z, -math.inf
    logs = np.log(weights[nz]) + q * np.log(errors[nz])
    top = logs.max()
    return z, float(top + math.log(np.sum(np.exp(logs - top))))


def combine_neg_scores(a: tuple, b: tuple) -> tuple:
    if isinstance(a[1], Fraction) or isinstance(b[1], Fraction):
        return a[0] + b[0], a[1] + b[1]
    return a[0] + b[0], float(np.logaddexp(a[1], b[1]))


def score_better(a: tuple, b: tuple, rtol: float = 1e-12) -> int:
    """Compare two ``(Z, S)`` scores: -1 if ``a`` is better, 0 tie, 1 worse."""
    for x, y in zip(a, b):
        if x == y:
            continue
        if isinstance(x, float) and isinstance(y, float) and math.isfinite(x) and math.isfinite(y):
            if abs(x - y) <= rtol * max(abs(x), abs(y), 1.0):
                continue
        return -1 if x > y else 1
    return 0


def wmean_neg_p(s, p: float, candidates=None, weights=None) -> MeanResult:
    """Candidates maximising exact-fit weight, then ``sum w |y - v|^(1/p)``.

    ``p`` must be negative; see :func:`neg_power_score` for the exponent.
    ``candidates`` defaults to the distinct data values.
    """
    if not p < 0:
        raise ValueError("wmean_neg_p needs p < 0")
    ws = as_set(s, weights)
    cand = np.unique(ws.values) if candidates is None else np.unique(np.asarray(candidates, dtype=float))
    if cand.size == 0:
        raise ValueError("no candidates given")
    scores = [neg_power_score(ws.values - c, ws.weights, p) for c in cand]
    best = scores[0]
    for sc in scores[1:]:
        if score_better(sc, best) < 0:
            best = sc
    return MeanResult.finite_set([c for c, sc in zip(cand, scores) if score_better(sc, best) == 0])
