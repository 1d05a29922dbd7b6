"""Strict L1 isotonic regression on a linear order (the p -> 1+ limit).

The solver narrows, for every vertex, an interval ("extent") known to hold
its regression value.  Each stage probes one value ``yhat`` per run of
blocks sharing an extent, classifies every block as below, at or above
``yhat`` from its weighted counts (and Jackson's log balance when ``yhat``
lies strictly inside the block's median interval), and pools adjacent
blocks that come out in the wrong order.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .graph import _as_fw, WeightedFunction
from .means import (
    HALF_RTOL,
    lower_median,
    wmean_down1,
    wmean_p,
)

__all__ = [
    "Block",
    "YhatStrategy",
    "compute_block_stats",
    "partition_block",
    "pav_merge_pass",
    "strict_down1_linear",
    "pav_generic",
    "strict_down1_oracle",
    "oracle_exponent",
]

MAX_STAGES = 5000


@dataclass(frozen=True)
class YhatStrategy:
    """How probes are chosen.

    ``"data"`` probes weighted-median data values and finishes value-free
    extents with Jackson's root; ``"bisect"`` probes extent midpoints until
    the width is at most ``delta``; ``"hybrid"`` probes data values while
    any remain inside the extent and bisects afterwards.
    """

    mode: str = "hybrid"
    delta: float = 1e-6

    def __post_init__(self):
        if self.mode not in ("data", "bisect", "hybrid"):
            raise ValueError(f"unknown probe mode {self.mode!r}")
        if self.mode != "data" and not self.delta > 0:
            raise ValueError("delta must be positive")


@dataclass(frozen=True)
class Block:
    """Vertices ``i..j`` (inclusive) whose values lie in the extent between ``a`` and ``b``.

    The statistics are taken against the probe ``yhat``; log-products are
    stored as ``sum w ln|yhat - y|`` over data on each side.
    """

    i: int
    j: int
    a: float
    b: float
    lo_closed: bool = False
    hi_closed: bool = False
    yhat: float = np.nan
    W: float = 0.0
    s_lt: float = 0.0
    s_eq: float = 0.0
    s_gt: float = 0.0
    logp_le: float = 0.0
    logp_ge: float = 0.0

    @property
    def is_point(self) -> bool:
        return self.a == self.b

    @property
    def width(self) -> float:
        return self.b - self.a

    def merged(self, other: "Block") -> "Block":
        """Union with the adjacent block ``other`` (to the right), same extent and probe."""
        if other.i != self.j + 1:
            raise ValueError("blocks are not adjacent")
        return replace(
            self,
            j=other.j,
            W=self.W + other.W,
            s_lt=self.s_lt + other.s_lt,
            s_eq=self.s_eq + other.s_eq,
            s_gt=self.s_gt + other.s_gt,
            logp_le=self.logp_le + other.logp_le,
            logp_ge=self.logp_ge + other.logp_ge,
        )

    def contains(self, y: float) -> bool:
        above = y > self.a or (self.lo_closed and y == self.a)
        below = y < self.b or (self.hi_closed and y == self.b)
        return above and below


def compute_block_stats(fw, i: int, j: int, yhat: float, a: float = -np.inf, b: float = np.inf,
                        lo_closed: bool = False, hi_closed: bool = False) -> Block:
    """Weighted counts below/at/above ``yhat`` and the two log-products for data ``i..j``."""
    fw = _as_fw(fw)
    y = fw.values[i:j + 1]
    w = fw.weights[i:j + 1]
    lt, eq, gt = y < yhat, y == yhat, y > yhat
    logs = np.zeros_like(y)
    ne = ~eq
    logs[ne] = w[ne] * np.log(np.abs(yhat - y[ne]))
    return Block(
        i, j, a, b, lo_closed, hi_closed, float(yhat),
        W=float(w.sum()),
        s_lt=float(w[lt].sum()), s_eq=float(w[eq].sum()), s_gt=float(w[gt].sum()),
        logp_le=float(logs[lt].sum()), logp_ge=float(logs[gt].sum()),
    )


def _cmp_half(x, total):
    """Vectorised sign of ``x - total/2`` with a relative tolerance."""
    d = 2.0 * np.asarray(x, dtype=float) - total
    return np.where(np.abs(d) <= HALF_RTOL * total, 0, np.sign(d)).astype(int)


def _log_tie(le, ge):
    return np.abs(le - ge) <= 1e-12 * (np.abs(le) + np.abs(ge)) + 1e-14


def _sides(W, s_lt, s_eq, s_gt, logp_le, logp_ge) -> np.ndarray:
    """Where each block's value lies relative to the probe: -1 below, 0 at, +1 above."""
    lt = _cmp_half(s_lt, W)
    gt = _cmp_half(s_gt, W)
    on_data = np.asarray(s_eq) > 0
    data_side = np.where((lt < 0) & (gt < 0), 0, np.where(lt >= 0, -1, 1))
    balanced = (lt == 0) & (gt == 0)
    jackson = np.where(_log_tie(logp_le, logp_ge), 0, np.where(logp_le > logp_ge, -1, 1))
    gap_side = np.where(balanced, jackson, np.where(lt > 0, -1, 1))
    return np.where(on_data, data_side, gap_side)


def _side_scalar(W, s_lt, s_eq, s_gt, logp_le, logp_ge) -> int:
    """Scalar twin of :func:`_sides`, kept in plain Python for the merge loop."""
    band = HALF_RTOL * W
    d_lt, d_gt = 2.0 * s_lt - W, 2.0 * s_gt - W
    lt = 0 if abs(d_lt) <= band else (1 if d_lt > 0 else -1)
    gt = 0 if abs(d_gt) <= band else (1 if d_gt > 0 else -1)
    if s_eq > 0:
        if lt < 0 and gt < 0:
            return 0
        return -1 if lt >= 0 else 1
    if lt == 0 and gt == 0:
        if abs(logp_le - logp_ge) <= 1e-12 * (abs(logp_le) + abs(logp_ge)) + 1e-14:
            return 0
        return -1 if logp_le > logp_ge else 1
    return -1 if lt > 0 else 1


def _side(blk: Block) -> int:
    return _side_scalar(blk.W, blk.s_lt, blk.s_eq, blk.s_gt, blk.logp_le, blk.logp_ge)


def _pav_stats(cols, sides):
    """Merge loop over per-block statistics.

    ``cols`` holds six equally long float lists ``W, s_lt, s_eq, s_gt,
    logp_le, logp_ge``.  Returns the first index and side of each surviving
    block, and the number of merges.  Parallel float stacks keep the loop
    free of container allocations.
    """
    W, lt, eq, gt, le, ge = cols
    sW, slt, seq, sgt, sle, sge = [], [], [], [], [], []
    first: list[int] = []
    side_st: list[int] = []
    merges = 0
    for k in range(len(sides)):
        f0, a0, b0, c0, d0, e0, side = k, W[k], lt[k], eq[k], gt[k], le[k], sides[k]
        f1 = ge[k]
        while side_st and side_st[-1] > side:
            side_st.pop()
            f0 = first.pop()
            a0 += sW.pop()
            b0 += slt.pop()
            c0 += seq.pop()
            d0 += sgt.pop()
            e0 += sle.pop()
            f1 += sge.pop()
            side = _side_scalar(a0, b0, c0, d0, e0, f1)
            merges += 1
        first.append(f0)
        side_st.append(side)
        sW.append(a0)
        slt.append(b0)
        seq.append(c0)
        sgt.append(d0)
        sle.append(e0)
        sge.append(f1)
    return first, side_st, merges


def _refine(blk: Block, side: int) -> Block:
    y = blk.yhat
    if side == 0:
        return replace(blk, a=y, b=y, lo_closed=True, hi_closed=True)
    if side < 0:
        return replace(blk, b=y, hi_closed=False)
    return replace(blk, a=y, lo_closed=False)


def partition_block(blk: Block, yhat: float | None = None) -> Block:
    """Shrink a block's extent to below, exactly at, or above the probe.

    ``blk`` must carry statistics taken at ``yhat`` (defaults to
    ``blk.yhat``), and ``yhat`` must lie inside the extent.
    """
    yhat = blk.yhat if yhat is None else yhat
    if yhat != blk.yhat:
        raise ValueError("block statistics were taken at a different probe")
    if not blk.contains(yhat):
        raise ValueError(f"probe {yhat} is outside the extent ({blk.a}, {blk.b})")
    return _refine(blk, _side(blk))


def pav_merge_pass(blocks: list[Block]) -> tuple[list[Block], int]:
    """Partition a run of blocks that share extent and probe, pooling out-of-order neighbours.

    Whenever a block's refined extent lies above its successor's, the two
    unrefined blocks are merged and the union is classified again.  Returns
    the refined blocks and the number of merges.
    """
    stack: list[tuple[Block, int]] = []
    merges = 0
    for blk in blocks:
        side = _side(blk)
        while stack and stack[-1][1] > side:
            prev, _ = stack.pop()
            blk = prev.merged(blk)
            side = _side(blk)
            merges += 1
        stack.append((blk, side))
    return [_refine(b, s) for b, s in stack], merges


def pav_generic(fw, mean_fn: Callable[[np.ndarray, np.ndarray], float]) -> np.ndarray:
    """Pool-adjacent-violators with a pluggable level-set mean ``mean_fn(values, weights)``."""
    fw = _as_fw(fw)
    y, w = fw.values, fw.weights
    starts: list[int] = []
    stops: list[int] = []
    vals: list[float] = []
    for k in range(fw.n):
        lo, hi, v = k, k + 1, float(y[k])
        while vals and vals[-1] > v:
            lo = starts.pop()
            stops.pop()
            vals.pop()
            v = float(mean_fn(y[lo:hi], w[lo:hi]))
        starts.append(lo)
        stops.append(hi)
        vals.append(v)
    return np.repeat(vals, np.subtract(stops, starts))


def _jackson_finish(y, w, first, last):
    """PAV with Jackson means over blocks ``[first[k], last[k])`` of one run."""
    starts, stops, vals, merges = [], [], [], 0
    for lo, hi in zip(first, last):
        v = wmean_down1(y[lo:hi], weights=w[lo:hi])
        while vals and vals[-1] > v:
            lo = starts.pop()
            stops.pop()
            vals.pop()
            merges += 1
            v = wmean_down1(y[lo:hi], weights=w[lo:hi])
        starts.append(lo)
        stops.append(hi)
        vals.append(v)
    return starts, stops, vals, merges


@dataclass
class _Blocks:
    start: np.ndarray
    stop: np.ndarray
    a: np.ndarray
    b: np.ndarray
    loc: np.ndarray
    hic: np.ndarray
    done: np.ndarray
    value: np.ndarray

    def take(self, idx):
        return _Blocks(*(getattr(self, f)[idx] for f in self.__dataclass_fields__))

    @staticmethod
    def concat(parts):
        return _Blocks(*(np.concatenate([getattr(p, f) for p in parts]) for f in _Blocks.__dataclass_fields__))


def _apply_sides(nb: _Blocks, s: np.ndarray, yh: np.ndarray) -> None:
    nb.b = np.where(s <= 0, yh, nb.b)
    nb.a = np.where(s >= 0, yh, nb.a)
    nb.hic = np.where(s == 0, True, np.where(s < 0, False, nb.hic))
    nb.loc = np.where(s == 0, True, np.where(s > 0, False, nb.loc))
    nb.done = s == 0
    nb.value = np.where(s == 0, yh, np.nan)


def _group_medians(keys, vals, nkeys):
    """Lower median of ``vals`` for each key in ``0..nkeys-1`` (nan where empty)."""
    out = np.full(nkeys, np.nan)
    if keys.size == 0:
        return out, np.zeros(nkeys, dtype=int)
    order = np.lexsort((vals, keys))
    counts = np.bincount(keys, minlength=nkeys)
    offsets = np.concatenate([[0], np.cumsum(counts)[:-1]])
    has = counts > 0
    pick = offsets[has] + (counts[has] - 1) // 2
    out[has] = vals[order][pick]
    return out, counts


def strict_down1_linear(fw, strategy: YhatStrategy | str = "hybrid", delta: float = 1e-6,
                        return_info: bool = False):
    """Strict L1 isotonic regression of ``(f, w)`` on the chain ``0 < 1 < ... < n-1``.

    Level sets whose value is a data value are found exactly by the data
    probes; the others end within ``delta`` (midpoint of the final extent)
    or, in ``"data"`` mode, at Jackson's root.  With ``return_info=True`` a
    dict with the stage and merge counts is returned as well.
    """
    fw = _as_fw(fw)
    if isinstance(strategy, str):
        strategy = YhatStrategy(strategy, delta)
    y, w = fw.values, fw.weights
    n = fw.n
    ymin, ymax = float(y.min()), float(y.max())
    idx = np.arange(n)
    blocks = _Blocks(
        start=idx.copy(), stop=idx + 1,
        a=np.full(n, ymin), b=np.full(n, ymax),
        loc=np.ones(n, bool), hic=np.ones(n, bool),
        done=np.full(n, ymin == ymax), value=np.full(n, ymin if ymin == ymax else np.nan),
    )
    merges = stages = 0
    probe_data = strategy.mode in ("data", "hybrid")

    while not blocks.done.all():
        stages += 1
        if stages > MAX_STAGES:
            raise RuntimeError("strict L1 partitioning did not terminate")
        act = np.flatnonzero(~blocks.done)
        A = blocks.take(act)
        same = np.ones(act.size, bool)
        same[1:] = ((act[1:] == act[:-1] + 1) & (A.a[1:] == A.a[:-1]) & (A.b[1:] == A.b[:-1])
                    & (A.loc[1:] == A.loc[:-1]) & (A.hic[1:] == A.hic[:-1]))
        same[0] = False
        run = np.cumsum(~same) - 1
        nruns = int(run[-1]) + 1
        first = np.flatnonzero(~same)
        ra, rb, rloc, rhic = A.a[first], A.b[first], A.loc[first], A.hic[first]

        sizes = A.stop - A.start
        vblock = np.repeat(np.arange(act.size), sizes)
        vidx = np.repeat(A.start - np.concatenate([[0], np.cumsum(sizes)[:-1]]), sizes) + np.arange(sizes.sum())
        vrun = run[vblock]
        yv, wv = y[vidx], w[vidx]

        yhat = np.full(nruns, np.nan)
        if probe_data:
            a_, b_ = ra[vrun], rb[vrun]
            inside = (((yv > a_) | (rloc[vrun] & (yv == a_)))
                      & ((yv < rb[vrun]) | (rhic[vrun] & (yv == b_))))
            med, counts = _group_medians(vrun[inside], yv[inside], nruns)
            yhat = np.where(counts > 0, med, np.nan)
        free = np.isnan(yhat)

        finish = np.zeros(nruns, bool)
        if strategy.mode == "data":
            finish = free
        else:
            mid = 0.5 * (ra + rb)
            narrow = free & ((rb - ra <= strategy.delta) | (mid <= ra) | (mid >= rb))
            finish = narrow
            yhat = np.where(free & ~narrow, mid, yhat)

        new_parts = []
        keep = np.ones(blocks.start.size, bool)
        fin_blk = finish[run]
        if fin_blk.any():
            members = act[fin_blk]
            keep[members] = False
            if strategy.mode == "data":
                for grp in np.split(members, np.flatnonzero(np.diff(run[fin_blk])) + 1):
                    starts, stops, vals, m = _jackson_finish(y, w, blocks.start[grp], blocks.stop[grp])
                    merges += m
                    k = len(starts)
                    new_parts.append(_Blocks(
                        np.array(starts), np.array(stops), np.array(vals), np.array(vals),
                        np.ones(k, bool), np.ones(k, bool), np.ones(k, bool), np.array(vals),
                    ))
            else:
                part = blocks.take(members)
                part.done[:] = True
                part.value = 0.5 * (ra + rb)[run[fin_blk]]
                new_parts.append(part)

        probing = ~finish
        if probing.any():
            yb = yhat[run]
            yhv = yb[vblock]
            lt, eq, gt = yv < yhv, yv == yhv, yv > yhv
            logs = np.where(eq, 0.0, wv * np.log(np.where(eq, 1.0, np.abs(yhv - yv))))
            bounds = np.concatenate([[0], np.cumsum(sizes)[:-1]])
            W = np.add.reduceat(wv, bounds)
            s_lt = np.add.reduceat(np.where(lt, wv, 0.0), bounds)
            s_eq = np.add.reduceat(np.where(eq, wv, 0.0), bounds)
            s_gt = np.add.reduceat(np.where(gt, wv, 0.0), bounds)
            lp_le = np.add.reduceat(np.where(lt, logs, 0.0), bounds)
            lp_ge = np.add.reduceat(np.where(gt, logs, 0.0), bounds)
            side = _sides(W, s_lt, s_eq, s_gt, lp_le, lp_ge)

            blk_probe = probing[run]
            disorder = np.zeros(nruns, bool)
            dec = (side[1:] < side[:-1]) & same[1:]
            disorder[run[1:][dec]] = True
            simple = blk_probe & ~disorder[run]

            # runs already in order: refine every block in place
            sel = act[simple]
            s = side[simple]
            yh = yb[simple]
            nb = blocks.take(sel)
            _apply_sides(nb, s, yh)
            keep[sel] = False
            new_parts.append(nb)

            mixed = blk_probe & disorder[run]
            if mixed.any():
                pos = np.flatnonzero(mixed)
                cols = [c[pos] for c in (W, s_lt, s_eq, s_gt, lp_le, lp_ge)]
                runs_of = run[pos]
                # one merge loop per disordered run
                firsts, sides_out = [], []
                cut = np.flatnonzero(np.diff(runs_of)) + 1
                for lo, hi in zip(np.r_[0, cut], np.r_[cut, pos.size]):
                    lo, hi = int(lo), int(hi)
                    sf, ss, m = _pav_stats([c[lo:hi].tolist() for c in cols], side[pos[lo:hi]].tolist())
                    merges += m
                    firsts.extend(lo + x for x in sf)
                    sides_out.extend(ss)
                firsts = np.asarray(firsts, dtype=np.intp)
                s = np.asarray(sides_out, dtype=int)
                lasts = np.append(firsts[1:] - 1, pos.size - 1)
                sel_first, sel_last = act[pos[firsts]], act[pos[lasts]]
                yh = yb[pos[firsts]]
                nb = blocks.take(sel_first)
                nb.stop = blocks.stop[sel_last].copy()
                _apply_sides(nb, s, yh)
                keep[act[pos]] = False
                new_parts.append(nb)

        merged = _Blocks.concat([blocks.take(np.flatnonzero(keep))] + new_parts)
        blocks = merged.take(np.argsort(merged.start, kind="stable"))

    out = np.repeat(blocks.value, blocks.stop - blocks.start)
    if return_info:
        return out, {"stages": stages, "merges": merges, "level_sets": int(blocks.start.size)}
    return out


def oracle_exponent(fw: WeightedFunction, delta: float) -> float:
    """Exponent ``p > 1`` whose L_p regression is within ``delta`` of the strict L1 one.

    Values and weights are bounded by integers ``h`` and ``W``; the bound
    requires ``1/p >= ln(nW - delta/h) / ln(nW)``.  Degenerate cases fall
    back to ``p = 2``.
    """
    h = max(1.0, float(np.ceil(np.abs(fw.values).max())))
    wmax = max(1.0, float(np.ceil(fw.weights.max())))
    nw = fw.n * wmax
    if nw <= 1 or delta / h >= nw - 1:
        return 2.0
    return float(np.log(nw) / np.log(nw - delta / h))


def strict_down1_oracle(fw, delta: float = 1e-3) -> np.ndarray:
    """Pointwise ``2*delta`` approximation of strict L1 via L_p PAV with ``p`` near 1."""
    fw = _as_fw(fw)
    p = oracle_exponent(fw, delta)
    tol = delta * 1e-3

    def mean(v, wt):
        return wmean_p(v, p, tol=tol, weights=wt)

    return pav_generic(fw, mean)


def median_pav(fw) -> np.ndarray:
    """L1 isotonic regression with lower weighted medians as level-set values."""
    return pav_generic(fw, lambda v, wt: lower_median(v, wt))
