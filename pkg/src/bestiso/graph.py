"""Order structures, violating pairs and error bookkeeping.

Everything in this module is a pure function of its arguments.  Orders are
given either as an explicit :class:`Dag` or implicitly as points under
coordinate-wise domination.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .exceptions import CycleError

__all__ = [
    "WeightedFunction",
    "Dag",
    "ViolatorRecord",
    "ErrorCurve",
    "build_dag",
    "chain",
    "transitive_closure",
    "domination_closure",
    "violating_pairs",
    "domination_pairs",
    "is_isotonic",
    "lp_error",
    "error_curve",
    "compare_lex_inf",
    "compare_lex_0",
    "level_sets",
]


@dataclass(frozen=True)
class WeightedFunction:
    """Values ``f(v)`` and strictly positive weights ``w(v)`` on vertices ``0..n-1``."""

    values: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).ravel()
        weights = np.asarray(self.weights, dtype=float).ravel()
        if values.size == 0:
            raise ValueError("a weighted function needs at least one vertex")
        if values.shape != weights.shape:
            raise ValueError(
                f"values and weights differ in length ({values.size} != {weights.size})"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("values must be finite")
        if not np.all(np.isfinite(weights)) or np.any(weights <= 0):
            raise ValueError("weights must be finite and strictly positive")
        values.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def from_values(cls, values, weights=None) -> "WeightedFunction":
        values = np.asarray(values, dtype=float)
        if weights is None:
            weights = np.ones_like(values)
        return cls(values, weights)

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())

    def restrict(self, idx) -> "WeightedFunction":
        idx = np.asarray(idx, dtype=np.intp)
        return WeightedFunction(self.values[idx], self.weights[idx])


def _as_fw(fw) -> WeightedFunction:
    if isinstance(fw, WeightedFunction):
        return fw
    return WeightedFunction.from_values(fw)


def _csr(n: int, src: np.ndarray, dst: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    order = np.argsort(src, kind="stable")
    indptr = np.zeros(n + 1, dtype=np.intp)
    np.add.at(indptr, src + 1, 1)
    return np.cumsum(indptr), dst[order]


class Dag:
    """Directed acyclic graph on vertices ``0..n-1``; an edge ``(u, v)`` means u precedes v.

    Successor and predecessor lists are stored in CSR form, and a topological
    order is computed on construction (which also rejects cycles).
    """

    def __init__(self, n: int, edges, *, closed: bool = False):
        n = int(n)
        if n < 0:
            raise ValueError("vertex count must be nonnegative")
        edges = np.asarray(edges, dtype=np.intp).reshape(-1, 2)
        if edges.size and (edges.min() < 0 or edges.max() >= n):
            raise ValueError(f"edge endpoint out of range [0, {n})")
        if np.any(edges[:, 0] == edges[:, 1]):
            raise CycleError("self-loop in edge list")
        edges = np.unique(edges, axis=0) if edges.size else edges
        self.n = n
        self.edges = edges
        self.closed = closed
        src, dst = edges[:, 0], edges[:, 1]
        self._succ_ptr, self._succ = _csr(n, src, dst)
        self._pred_ptr, self._pred = _csr(n, dst, src)
        self.topological_order = self._toposort()
        for arr in (self.edges, self._succ, self._pred, self.topological_order):
            arr.setflags(write=False)

    def _toposort(self) -> np.ndarray:
        indeg = np.diff(self._pred_ptr).copy()
        stack = list(np.flatnonzero(indeg == 0)[::-1])
        order = []
        while stack:
            u = stack.pop()
            order.append(u)
            for v in self.successors(u):
                indeg[v] -= 1
                if indeg[v] == 0:
                    stack.append(v)
        if len(order) != self.n:
            raise CycleError("edge list contains a directed cycle")
        return np.asarray(order, dtype=np.intp)

    @property
    def m(self) -> int:
        return len(self.edges)

    def successors(self, v: int) -> np.ndarray:
        return self._succ[self._succ_ptr[v]:self._succ_ptr[v + 1]]

    def predecessors(self, v: int) -> np.ndarray:
        return self._pred[self._pred_ptr[v]:self._pred_ptr[v + 1]]

    def edge_set(self) -> set[tuple[int, int]]:
        return {(int(u), int(v)) for u, v in self.edges}

    def __repr__(self) -> str:
        return f"Dag(n={self.n}, m={self.m}, closed={self.closed})"


def build_dag(n: int, edges: Iterable[Sequence[int]]) -> Dag:
    """Validate an edge list and return a :class:`Dag`.

    Raises :class:`CycleError` on a directed cycle and ``ValueError`` on an
    out-of-range vertex index.
    """
    return Dag(n, list(edges))


def chain(n: int) -> Dag:
    """The linear order ``0 < 1 < ... < n-1`` given by its covering edges."""
    idx = np.arange(n - 1, dtype=np.intp)
    return Dag(n, np.column_stack([idx, idx + 1]))


def _reachability(dag: Dag) -> np.ndarray:
    reach = np.zeros((dag.n, dag.n), dtype=bool)
    for u in dag.topological_order[::-1]:
        succ = dag.successors(u)
        if succ.size:
            row = reach[u]
            row[succ] = True
            for s in succ:
                row |= reach[s]
    return reach


def transitive_closure(dag: Dag) -> Dag:
    """Return the dag with an edge ``(u, v)`` for every path ``u -> v``.

    Reachability rows are OR-ed together in reverse topological order, which
    costs O(n*m) bit operations.
    """
    if dag.closed:
        return dag
    src, dst = np.nonzero(_reachability(dag))
    return Dag(dag.n, np.column_stack([src, dst]), closed=True)


def _domination_matrix(points: np.ndarray) -> np.ndarray:
    le = np.all(points[:, None, :] <= points[None, :, :], axis=2)
    eq = np.all(points[:, None, :] == points[None, :, :], axis=2)
    return le & ~eq


def _as_points(points) -> np.ndarray:
    try:
        pts = np.asarray(points, dtype=float)
    except ValueError as exc:
        raise ValueError("points must all have the same dimension") from exc
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2 or pts.shape[1] < 1:
        raise ValueError("points must be an (n, d) array with d >= 1")
    return pts


def domination_closure(points) -> Dag:
    """The (already transitive) domination order on points as a closed :class:`Dag`.

    ``p`` precedes ``q`` when ``p <= q`` in every coordinate and the points
    differ.  Duplicate points are therefore incomparable.
    """
    pts = _as_points(points)
    src, dst = np.nonzero(_domination_matrix(pts))
    return Dag(len(pts), np.column_stack([src, dst]), closed=True)


@dataclass(frozen=True)
class ViolatorRecord:
    pred: int
    succ: int
    pair_mean: float
    mean_err: float
    pair_weight: float


def _violator_arrays(src, dst, fw: WeightedFunction):
    """Vectorised violator construction over candidate pairs ``src[k] < dst[k]``."""
    f, w = fw.values, fw.weights
    mask = f[src] > f[dst]
    u, v = src[mask], dst[mask]
    wu, wv = w[u], w[v]
    pw = wu + wv
    mean = (wu * f[u] + wv * f[v]) / pw
    # symmetric form of w_u |f_u - mean| == w_v |f_v - mean|
    err = wu * wv * (f[u] - f[v]) / pw
    return u, v, mean, err, pw


def _records(arrays) -> list[ViolatorRecord]:
    return [
        ViolatorRecord(int(u), int(v), float(x), float(e), float(pw))
        for u, v, x, e, pw in zip(*arrays)
    ]


def violating_pairs(closure: Dag, fw) -> list[ViolatorRecord]:
    """All pairs ``u < v`` of a transitively closed dag with ``f(u) > f(v)``."""
    fw = _as_fw(fw)
    if fw.n != closure.n:
        raise ValueError("weighted function and dag differ in size")
    return _records(_violator_arrays(closure.edges[:, 0], closure.edges[:, 1], fw))


def domination_pairs(points, fw) -> list[ViolatorRecord]:
    """Violating pairs under domination ordering, by O(n^2) pairwise comparison."""
    fw = _as_fw(fw)
    pts = _as_points(points)
    if len(pts) != fw.n:
        raise ValueError("number of points differs from the weighted function size")
    src, dst = np.nonzero(_domination_matrix(pts))
    return _records(_violator_arrays(src, dst, fw))


def is_isotonic(g, dag: Dag, tol: float = 0.0) -> bool:
    g = np.asarray(g, dtype=float)
    if dag.m == 0:
        return True
    return bool(np.all(g[dag.edges[:, 0]] <= g[dag.edges[:, 1]] + tol))


def lp_error(fw, g, p: float, tol: float = 0.0) -> float:
    """Weighted error of ``g`` against ``f``.

    ``p == 0`` counts the weight of mismatches (``|f - g| > tol``), finite
    positive ``p`` gives ``sum w |f - g|^p`` with no root taken, and
    ``p == inf`` gives ``max w |f - g|``.
    """
    fw = _as_fw(fw)
    g = np.asarray(g, dtype=float)
    if g.shape != fw.values.shape:
        raise ValueError("regression and data differ in length")
    if p < 0 or np.isnan(p):
        raise ValueError("p must be 0, positive or inf; negative exponents live in bestiso.l0")
    diff = np.abs(fw.values - g)
    if p == 0:
        return float(fw.weights[diff > tol].sum())
    if np.isinf(p):
        return float(np.max(fw.weights * diff))
    return float(np.sum(fw.weights * diff ** p))


@dataclass(frozen=True)
class ErrorCurve:
    """Aggregated pointwise errors: strictly increasing magnitudes with their total weight."""

    magnitudes: tuple[float, ...]
    weights: tuple[float, ...]
    total: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "total", float(sum(self.weights)))

    @classmethod
    def from_errors(cls, errors, weights=None, grain: float | None = None) -> "ErrorCurve":
        errors = np.abs(np.asarray(errors, dtype=float)).ravel()
        weights = np.ones_like(errors) if weights is None else np.asarray(weights, dtype=float).ravel()
        if grain:
            errors = np.round(errors / grain) * grain
        mags, inv = np.unique(errors, return_inverse=True)
        sums = np.zeros(len(mags))
        np.add.at(sums, inv.ravel(), weights)
        return cls(tuple(mags.tolist()), tuple(sums.tolist()))

    def merge(self, other: "ErrorCurve") -> "ErrorCurve":
        """Multiset union of the underlying errors."""
        acc = dict(zip(self.magnitudes, self.weights))
        for m, w in zip(other.magnitudes, other.weights):
            acc[m] = acc.get(m, 0.0) + w
        mags = sorted(acc)
        return ErrorCurve(tuple(mags), tuple(acc[m] for m in mags))

    def weight_at_or_above(self, alpha: float) -> float:
        return sum(w for m, w in zip(self.magnitudes, self.weights) if m >= alpha)

    def weight_at_or_below(self, alpha: float) -> float:
        return sum(w for m, w in zip(self.magnitudes, self.weights) if m <= alpha)

    def as_pairs(self) -> list[tuple[float, float]]:
        return list(zip(self.magnitudes, self.weights))


EMPTY_CURVE = ErrorCurve((), ())


def error_curve(fw, g, grain: float | None = None, weighted: bool = False) -> ErrorCurve:
    """Error curve of regression ``g``.

    Magnitudes are ``|f - g|`` and each vertex contributes its weight.  With
    ``weighted=True`` magnitudes are the weighted errors ``w |f - g|`` and each
    vertex counts once, which is the ordering under which the lex-infinity
    regression of weighted data is minimal.  ``grain`` rounds magnitudes to a
    multiple of itself so analytically equal errors aggregate together.
    """
    fw = _as_fw(fw)
    g = np.asarray(g, dtype=float)
    if g.shape != fw.values.shape:
        raise ValueError("regression and data differ in length")
    err = np.abs(fw.values - g)
    if weighted:
        return ErrorCurve.from_errors(fw.weights * err, None, grain)
    return ErrorCurve.from_errors(err, fw.weights, grain)


def _check_totals(a: ErrorCurve, b: ErrorCurve, tol: float) -> float:
    scale = max(a.total, b.total, 1.0)
    if abs(a.total - b.total) > tol * scale:
        raise ValueError(f"error curves cover different total weight ({a.total} vs {b.total})")
    return tol * scale


def _scan(ma, wa, mb, wb, eps, descending):
    """Walk both curves from one end and compare cumulative weights.

    Returns -1 when ``a`` accumulates less weight first (descending scan) or
    more weight first (ascending scan), i.e. -1 always means ``a`` is better.
    """
    i = len(ma) - 1 if descending else 0
    j = len(mb) - 1 if descending else 0
    step = -1 if descending else 1
    ca = cb = 0.0

    def live(k, n):
        return 0 <= k < n

    while live(i, len(ma)) or live(j, len(mb)):
        cands = []
        if live(i, len(ma)):
            cands.append(ma[i])
        if live(j, len(mb)):
            cands.append(mb[j])
        m = max(cands) if descending else min(cands)
        if descending and m <= 0:
            break
        while live(i, len(ma)) and ma[i] == m:
            ca += wa[i]
            i += step
        while live(j, len(mb)) and mb[j] == m:
            cb += wb[j]
            j += step
        if abs(ca - cb) > eps:
            better = ca < cb if descending else ca > cb
            return -1 if better else 1
    return 0


def compare_lex_inf(a: ErrorCurve, b: ErrorCurve, tol: float = 1e-12) -> int:
    """Lex-infinity comparison: -1 if ``a`` precedes ``b``, 0 if tied, 1 otherwise.

    Distinct positive magnitudes are scanned from the largest down; the first
    threshold at which the weight at-or-above differs decides.
    """
    eps = _check_totals(a, b, tol)
    return _scan(a.magnitudes, a.weights, b.magnitudes, b.weights, eps, True)


def compare_lex_0(a: ErrorCurve, b: ErrorCurve, tol: float = 1e-12) -> int:
    """Lex-zero comparison: the curve holding more weight at small errors wins.

    Magnitudes are scanned upward from zero; at the first threshold where the
    weight at-or-below differs, the larger side precedes.
    """
    eps = _check_totals(a, b, tol)
    return _scan(a.magnitudes, a.weights, b.magnitudes, b.weights, eps, False)


def level_sets(g, dag: Dag, tol: float = 0.0) -> list[list[int]]:
    """Maximal weakly connected vertex sets on which ``g`` is constant (within ``tol``)."""
    g = np.asarray(g, dtype=float)
    parent = list(range(dag.n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in dag.edges:
        if abs(g[u] - g[v]) <= tol:
            ru, rv = find(int(u)), find(int(v))
            if ru != rv:
                parent[max(ru, rv)] = min(ru, rv)
    groups: dict[int, list[int]] = {}
    for v in range(dag.n):
        groups.setdefault(find(v), []).append(v)
    return sorted(groups.values(), key=lambda s: s[0])
