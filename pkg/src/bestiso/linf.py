"""Lex-infinity (equivalently strict L-infinity) isotonic regression on dags."""
from __future__ import annotations

import itertools

import numpy as np

from .graph import (
    Dag,
    ViolatorRecord,
    _as_fw,
    _violator_arrays,
    level_sets,
    transitive_closure,
)
from .l0 import candidate_grid, isotonic_grid_dp
from .means import wmean_inf

__all__ = [
    "lex_inf_regression",
    "naive_inf_regression",
    "minimax_bound",
    "lex_inf_oracle_linear",
    "check_level_set_trimming",
]


def _violators_from_records(records):
    recs = list(records)
    if not recs:
        empty = np.zeros(0)
        return empty.astype(np.intp), empty.astype(np.intp), empty, empty, empty
    u = np.array([r.pred for r in recs], dtype=np.intp)
    v = np.array([r.succ for r in recs], dtype=np.intp)
    mean = np.array([r.pair_mean for r in recs])
    err = np.array([r.mean_err for r in recs])
    pw = np.array([r.pair_weight for r in recs])
    return u, v, mean, err, pw


def lex_inf_regression(closure: Dag, fw, violators: list[ViolatorRecord] | None = None) -> np.ndarray:
    """Lex-infinity isotonic regression of ``(f, w)`` on a dag.

    Violating pairs are processed by decreasing ``mean_err`` (ties: larger
    pair weight first, then by vertex index).  A pair whose endpoints are
    both still free fixes them to the pair's weighted mean unless one of them
    already hits a bound, in which case it is clamped to that bound; every
    fixed value then tightens the bounds of its successors or predecessors.
    Vertices never fixed this way receive ``f`` clamped into their bounds.

    ``closure`` must contain every comparable pair as an edge; a dag that is
    not flagged as closed is closed first.
    """
    fw = _as_fw(fw)
    if not closure.closed:
        closure = transitive_closure(closure)
    if closure.n != fw.n:
        raise ValueError("weighted function and dag differ in size")
    n = fw.n
    if violators is None:
        u, v, mean, err, pw = _violator_arrays(closure.edges[:, 0], closure.edges[:, 1], fw)
    else:
        u, v, mean, err, pw = _violators_from_records(violators)
    order = np.lexsort((v, u, -pw, -err))

    low = np.full(n, -np.inf)
    up = np.full(n, np.inf)
    value = np.full(n, np.nan)
    fixed = [False] * n
    free = n
    for k in order.tolist():
        p, s = int(u[k]), int(v[k])
        if fixed[p] or fixed[s]:
            continue
        x = mean[k]
        if x >= up[p]:
            value[p] = up[p]
            fixed[p] = True
        if x <= low[s]:
            value[s] = low[s]
            fixed[s] = True
        if not fixed[p] and not fixed[s]:
            value[p] = value[s] = x
            fixed[p] = fixed[s] = True
        if fixed[p]:
            free -= 1
            idx = closure.successors(p)
            low[idx] = np.maximum(low[idx], value[p])
        if fixed[s]:
            free -= 1
            idx = closure.predecessors(s)
            up[idx] = np.minimum(up[idx], value[s])
        if free == 0:
            break

    f = fw.values
    todo = np.isnan(value)
    value[todo] = np.where(f[todo] >= up[todo], up[todo],
                           np.where(f[todo] <= low[todo], low[todo], f[todo]))
    return value


def naive_inf_regression(closure: Dag, f) -> np.ndarray:
    """Midpoint of the largest value at-or-below and the smallest value at-or-above each vertex.

    An L-infinity optimal regression of unweighted data, though generally
    not the lex-infinity one.
    """
    f = np.asarray(f, dtype=float)
    if not closure.closed:
        closure = transitive_closure(closure)
    if closure.n != f.size:
        raise ValueError("data and dag differ in size")
    out = np.empty_like(f)
    for x in range(f.size):
        below = f[closure.predecessors(x)]
        above = f[closure.successors(x)]
        hi = max(f[x], below.max()) if below.size else f[x]
        lo = min(f[x], above.min()) if above.size else f[x]
        out[x] = 0.5 * (hi + lo)
    return out


def minimax_bound(violators) -> float:
    """Largest ``mean_err`` over violating pairs, the optimal weighted L-infinity error."""
    return max((r.mean_err for r in violators), default=0.0)


def lex_inf_oracle_linear(fw, max_n: int = 9, *, weighted: bool = True, grain: float = 1e-9) -> np.ndarray:
    """Brute-force lex-infinity regression of a short chain.

    Candidates are the data values and every pairwise weighted mean; the
    grid dynamic program then returns the lexically smallest isotonic
    assignment.  With ``weighted=True`` errors are ranked by ``w |f - g|``.
    """
    fw = _as_fw(fw)
    if fw.n > max_n:
        raise ValueError(f"oracle limited to n <= {max_n}, got {fw.n}")
    f, w = fw.values, fw.weights
    pairs = [
        (w[i] * f[i] + w[j] * f[j]) / (w[i] + w[j])
        for i, j in itertools.combinations(range(fw.n), 2)
    ]
    grid = candidate_grid(f, extra=pairs)
    sol = isotonic_grid_dp(fw, grid, "lexinf", grain=grain, weighted=weighted, cap=1)
    return sol.assignments[0]


def check_level_set_trimming(g, fw, dag: Dag, tol: float = 1e-9) -> bool:
    """True iff every level set of ``g`` sits at the weighted L-infinity mean of its data."""
    fw = _as_fw(fw)
    g = np.asarray(g, dtype=float)
    for members in level_sets(g, dag, tol=tol):
        target = wmean_inf(fw.values[members], weights=fw.weights[members], tol=tol * 1e-3)
        value = g[members[0]]
        if abs(value - target) > tol * max(1.0, abs(target)):
            return False
    return True
