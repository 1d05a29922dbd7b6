"""L0 (Hamming) isotonic regression on linear orders.

Besides the minimum-error witness this module holds a small dynamic program
over candidate value grids.  It is exact for any score whose ordering is
preserved when the same errors are added to both sides, which covers the
separable L_p sums, the lexical error curves and the negative-exponent
scores; the lex-infinity oracle in :mod:`bestiso.linf` reuses it too.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import BudgetExceededError, StabilizationError
from .graph import (
    ErrorCurve,
    _as_fw,
    compare_lex_0,
    compare_lex_inf,
)
from .means import combine_neg_scores, neg_power_score, score_better

__all__ = [
    "candidate_grid",
    "GridSolution",
    "isotonic_grid_dp",
    "l0_error_linear",
    "lex0_regression_linear",
    "strict_up0_oracle",
    "strict_down0_oracle",
    "DEFAULT_NEG_P_SCHEDULE",
]

DEFAULT_NEG_P_SCHEDULE = (-0.5, -0.1, -0.02, -0.01)
DEFAULT_CAP = 64
DEFAULT_BUDGET = 2_000_000


def candidate_grid(values, mode: str = "data", extra=()) -> np.ndarray:
    """Sorted distinct candidate values.

    ``mode="data"`` uses the distinct data values; ``"augmented"`` adds the
    midpoint of every pair of consecutive distinct values.  ``extra`` values
    are merged in either way.
    """
    vals = np.unique(np.concatenate([np.asarray(values, dtype=float).ravel(),
                                     np.asarray(extra, dtype=float).ravel()]))
    if mode == "augmented" and vals.size > 1:
        vals = np.unique(np.concatenate([vals, 0.5 * (vals[:-1] + vals[1:])]))
    elif mode != "data" and mode != "augmented":
        raise ValueError(f"unknown grid mode {mode!r}")
    return vals


# Scores: cost(err, w) of one vertex, combine, and compare
# returning -1 when the first argument is strictly better.

class _Separable:
    def __init__(self, p: float, rtol: float = 1e-10):
        if p < 0 or (0 < p < 1e-300):
            raise ValueError("separable score needs p >= 0")
        self.p, self.rtol = p, rtol

    def cost(self, err, w):
        if self.p == 0:
            return w if err > 0 else 0.0
        return w * err ** self.p

    @staticmethod
    def combine(a, b):
        return a + b

    def compare(self, a, b):
        if abs(a - b) <= self.rtol * max(abs(a), abs(b), 1e-300):
            return 0
        return -1 if a < b else 1


class _Curve:
    def __init__(self, kind: str, grain, weighted: bool = False):
        self.compare = compare_lex_0 if kind == "lex0" else compare_lex_inf
        self.grain = grain
        self.weighted = weighted

    def cost(self, err, w):
        if self.weighted:
            return ErrorCurve.from_errors([w * err], None, self.grain)
        return ErrorCurve.from_errors([err], [w], self.grain)

    @staticmethod
    def combine(a, b):
        return a.merge(b)


class _NegPower:
    def __init__(self, p: float):
        if not p < 0:
            raise ValueError("negative-power score needs p < 0")
        self.p = p

    def cost(self, err, w):
        return neg_power_score(np.array([err]), np.array([w]), self.p)

    combine = staticmethod(combine_neg_scores)

    @staticmethod
    def compare(a, b):
        return score_better(a, b, rtol=1e-10)


def _make_score(score: str, p, grain, weighted):
    if score == "separable":
        if p is None:
            raise ValueError("separable score needs p")
        return _Separable(p)
    if score in ("lex0", "lexinf"):
        return _Curve(score, grain, weighted)
    if score == "negp":
        return _NegPower(-0.1 if p is None else p)
    raise ValueError(f"unknown score {score!r}")


@dataclass
class GridSolution:
    """Optimal score and the co-optimal assignments found (capped)."""

    score: object
    assignments: list = field(default_factory=list)
    truncated: bool = False

    def as_set(self) -> set[tuple[float, ...]]:
        return {tuple(float(x) for x in g) for g in self.assignments}


def isotonic_grid_dp(
    fw,
    grid=None,
    score: str = "separable",
    *,
    p: float | None = None,
    grain: float | None = None,
    weighted: bool = False,
    cap: int = DEFAULT_CAP,
    budget: int = DEFAULT_BUDGET,
) -> GridSolution:
    """Exact optimum over all nondecreasing assignments with values on ``grid``.

    ``score`` is one of ``"separable"`` (minimise ``sum w |f-g|^p``, ``p=0``
    counting mismatches), ``"lex0"`` / ``"lexinf"`` (lexical error curves) or
    ``"negp"`` (negative exponent ``p``).  Up to ``cap`` co-optimal
    assignments are returned; ``truncated`` flags that more exist.
    """
    fw = _as_fw(fw)
    grid = candidate_grid(fw.values) if grid is None else np.unique(np.asarray(grid, dtype=float))
    n, k = fw.n, grid.size
    if n * k > budget:
        raise BudgetExceededError(f"n*|grid| = {n * k} exceeds budget {budget}")
    sc = _make_score(score, p, grain, weighted)
    f, w = fw.values, fw.weights

    prev = None
    back: list[list[list[int]]] = []
    for i in range(n):
        costs = [sc.cost(abs(f[i] - g), w[i]) for g in grid]
        if prev is None:
            cur = costs
            back.append([[] for _ in range(k)])
        else:
            cur, links = [], []
            best, arg = None, []
            for j in range(k):
                if best is None or (c := sc.compare(prev[j], best)) < 0:
                    best, arg = prev[j], [j]
                elif c == 0:
                    arg = arg + [j]
                cur.append(sc.combine(best, costs[j]))
                links.append(arg)
            back.append(links)
        prev = cur

    best, ends = None, []
    for j in range(k):
        if best is None or (c := sc.compare(prev[j], best)) < 0:
            best, ends = prev[j], [j]
        elif c == 0:
            ends.append(j)

    out: list[np.ndarray] = []
    truncated = False
    stack = [(n - 1, j, ()) for j in reversed(ends)]
    while stack:
        i, j, tail = stack.pop()
        path = (j,) + tail
        if i == 0:
            if len(out) >= cap:
                truncated = True
                break
            out.append(grid[list(path)])
            continue
        for jj in reversed(back[i][j]):
            stack.append((i - 1, jj, path))
    return GridSolution(best, out, truncated)


class _MaxFenwick:
    """Prefix maximum with argmax over ranks."""

    def __init__(self, size: int):
        self.val = [0.0] * (size + 1)
        self.arg = [-1] * (size + 1)

    def update(self, i: int, v: float, a: int):
        i += 1
        while i < len(self.val):
            if v > self.val[i]:
                self.val[i], self.arg[i] = v, a
            i += i & -i

    def query(self, i: int) -> tuple[float, int]:
        i += 1
        best, arg = 0.0, -1
        while i > 0:
            if self.val[i] > best:
                best, arg = self.val[i], self.arg[i]
            i -= i & -i
        return best, arg


def l0_error_linear(fw) -> tuple[float, np.ndarray]:
    """Minimum L0 error on a linear order and an isotonic witness attaining it.

    The kept vertices form a maximum-weight nondecreasing subsequence; the
    rest are clamped into the range allowed by their kept neighbours and a
    running maximum keeps the result isotonic.
    """
    fw = _as_fw(fw)
    f, w = fw.values, fw.weights
    ranks = np.searchsorted(np.unique(f), f)
    tree = _MaxFenwick(int(ranks.max()) + 1)
    best = np.zeros(fw.n)
    parent = np.full(fw.n, -1)
    for i in range(fw.n):
        b, a = tree.query(int(ranks[i]))
        best[i], parent[i] = b + w[i], a
        tree.update(int(ranks[i]), best[i], i)
    end = int(np.argmax(best))
    kept = []
    while end >= 0:
        kept.append(end)
        end = int(parent[end])
    kept.reverse()

    lo = np.full(fw.n, -np.inf)
    hi = np.full(fw.n, np.inf)
    lo[kept] = hi[kept] = f[kept]
    lo = np.maximum.accumulate(lo)
    hi = np.minimum.accumulate(hi[::-1])[::-1]
    g = np.maximum.accumulate(np.clip(f, lo, hi))
    return float(fw.total_weight - best.max()), g


def lex0_regression_linear(fw, grid=None, *, grain: float | None = None, cap: int = DEFAULT_CAP) -> GridSolution:
    """All lex-zero optimal isotonic assignments over ``grid`` (default: data values)."""
    return isotonic_grid_dp(fw, grid, "lex0", grain=grain, cap=cap)


def strict_up0_oracle(fw, grid=None, p_schedule=DEFAULT_NEG_P_SCHEDULE, *, cap: int = DEFAULT_CAP) -> GridSolution:
    """Optimiser set of the negative-exponent objective as ``p`` rises to 0.

    Each ``p`` maximises exact-fit weight and then ``sum w |f-g|^(1/p)``.
    The optimiser sets for the last two schedule entries must agree, else
    :class:`StabilizationError` is raised.
    """
    if len(p_schedule) < 2 or any(q >= 0 for q in p_schedule):
        raise ValueError("need at least two negative exponents")
    sols = [isotonic_grid_dp(fw, grid, "negp", p=q, cap=cap) for q in p_schedule]
    if sols[-1].as_set() != sols[-2].as_set():
        raise StabilizationError(
            f"optimisers differ between p={p_schedule[-2]} and p={p_schedule[-1]}"
        )
    return sols[-1]


def strict_down0_oracle(fw, grid=None, p: float = 0.01, *, cap: int = DEFAULT_CAP) -> GridSolution:
    """Minimisers of ``sum w |f-g|^p`` for small ``0 < p < 1``."""
    if not 0 < p < 1:
        raise ValueError("strict_down0_oracle needs 0 < p < 1")
    return isotonic_grid_dp(fw, grid, "separable", p=p, cap=cap)
