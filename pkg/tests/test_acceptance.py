"""Acceptance criteria, one test per criterion.

Each check returns ``(passed, detail)``; the result is recorded for the
summary printed at the end of the pytest run (or printed directly when this
file is executed as a script) and then asserted.
"""
import time

import numpy as np
import pytest

from bestiso.graph import (
    WeightedFunction,
    chain,
    compare_lex_inf,
    error_curve,
    is_isotonic,
    lp_error,
    transitive_closure,
    violating_pairs,
)
from bestiso.l0 import (
    candidate_grid,
    isotonic_grid_dp,
    lex0_regression_linear,
    strict_down0_oracle,
    strict_up0_oracle,
)
from bestiso.l1 import strict_down1_linear, strict_down1_oracle
from bestiso.linf import (
    check_level_set_trimming,
    lex_inf_oracle_linear,
    lex_inf_regression,
    minimax_bound,
    naive_inf_regression,
)
from bestiso.means import (
    median_interval,
    wmean_1_0,
    wmean_1_inf,
    wmean_down1,
    wmean_inf,
    wmean_up1,
)

from conftest import ACCEPTANCE, random_dag

pytestmark = pytest.mark.acceptance

DELTA = 1e-6
N_ORACLE = 500
N_DAGS = 200


def timed(fn):
    t0 = time.perf_counter()
    ok, detail = fn()
    return ok, detail, time.perf_counter() - t0


def closed_chain(n):
    return transitive_closure(chain(n))


def consts(n, xs):
    return {tuple([float(x)] * n) for x in xs}


# 1. micro-examples (each must also finish within a second)

def c1_lexinf_conclusion():
    g = lex_inf_regression(closed_chain(3), [2, 0, 1])
    naive = naive_inf_regression(closed_chain(3), [2, 0, 1])
    return g.tolist() == [1, 1, 1] and naive.tolist() == [1, 1, 1.5], f"lexinf {g.tolist()}, naive {naive.tolist()}"


def c1_strict1_example():
    g = strict_down1_linear([0, -2, 2, 0], delta=DELTA)
    ok = np.allclose(g, [-1, -1, 1, 1], atol=DELTA) and not np.allclose(g, 0)
    return ok, f"{g.tolist()} (all-zero L1 optimum rejected: {not np.allclose(g, 0)})"


def c1_strict1_pair():
    g = strict_down1_linear([1, 0], delta=DELTA)
    return np.allclose(g, [0.5, 0.5], atol=DELTA), str(g.tolist())


def c1_means_1137():
    s = [1, 1, 3, 7]
    vals = (wmean_inf(s), wmean_1_inf(s), wmean_up1(s).to_json(), wmean_down1(s))
    ok = vals[0] == 4 and vals[1] == 3 and vals[2] == 1 and abs(vals[3] - 2.5) <= 1e-9
    return ok, f"inf={vals[0]}, 1inf={vals[1]}, up1={vals[2]}, down1={vals[3]:.12g}"


def c1_means_1234():
    m, m10 = median_interval([1, 2, 3, 4]), wmean_1_0([1, 2, 3, 4])
    return m.bounds == (2, 3) and m10.payload == (2.0, 3.0), f"wmean1={list(m.bounds)}, wmean10={list(m10.payload)}"


def c1_lex0_vs_down0():
    f = [11, 8, 5, 2, 0]
    lex0, down0 = lex0_regression_linear(f).as_set(), strict_down0_oracle(f, p=0.01).as_set()
    return lex0 == consts(5, [2]) and down0 == consts(5, [5]), f"lex0 {sorted(lex0)}, strict-down0 {sorted(down0)}"


def c1_lex0_unique():
    a, b = lex0_regression_linear([6, 6, 4, 2, 0]).as_set(), lex0_regression_linear([6, 6, 4, 4, 4]).as_set()
    return a == consts(5, [6]) and b == consts(5, [4]), f"{sorted(a)}, {sorted(b)}"


def c1_p0999():
    f = [1, 1, -10, -11, 0, 0, -2, -3]
    sol = isotonic_grid_dp(f, None, "separable", p=0.999)
    ok = all(len(set(g.tolist())) == 1 and g[0] in (-2.0, 0.0) for g in sol.assignments)
    g = sol.assignments[0]
    return ok, f"optimum {g.tolist()} with objective {lp_error(f, g, 0.999):.6f}"


MICRO = [
    ("1 lexinf of 2,0,1 and naive baseline", c1_lexinf_conclusion),
    ("1 strict-down1 of 0,-2,2,0", c1_strict1_example),
    ("1 strict-down1 of 1,0", c1_strict1_pair),
    ("1 means of {1,1,3,7}", c1_means_1137),
    ("1 wmean1 and wmean{1,0} of {1,2,3,4}", c1_means_1234),
    ("1 lex0 / strict-down0 of 11,8,5,2,0", c1_lex0_vs_down0),
    ("1 lex0 of 6,6,4,2,0 and 6,6,4,4,4", c1_lex0_unique),
    ("1 grid DP at p=0.999 on 1,1,-10,-11,0,0,-2,-3", c1_p0999),
]


def run_micro(fn):
    ok, detail, secs = timed(fn)
    return ok and secs < 1.0, f"{detail} [{secs:.3f}s]"


# 2. oracle equivalence

def c2_lexinf_oracle(rng):
    bad = 0
    for _ in range(N_ORACLE):
        n = int(rng.integers(1, 9))
        fw = WeightedFunction(rng.integers(0, 6, n).astype(float), rng.integers(1, 4, n).astype(float))
        g = lex_inf_regression(closed_chain(n), fw)
        o = lex_inf_oracle_linear(fw)
        bad += compare_lex_inf(error_curve(fw, g, 1e-9, weighted=True), error_curve(fw, o, 1e-9, weighted=True)) != 0
    return bad == 0, f"{bad}/{N_ORACLE} curve mismatches"


def c2_strict1_oracle(rng):
    worst = 0.0
    for _ in range(N_ORACLE):
        n = int(rng.integers(1, 201))
        fw = WeightedFunction(rng.integers(-20, 21, n).astype(float), rng.integers(1, 4, n).astype(float))
        diff = np.abs(strict_down1_linear(fw, delta=DELTA) - strict_down1_oracle(fw, DELTA)).max()
        worst = max(worst, diff)
    return worst <= 3 * DELTA, f"max pointwise gap {worst:.3g} (limit {3 * DELTA:g})"


def c2_lex0_up0(rng):
    bad = grid_gap = 0
    for _ in range(N_ORACLE):
        n = int(rng.integers(1, 9))
        fw = WeightedFunction(rng.integers(0, 5, n).astype(float), rng.integers(1, 3, n).astype(float))
        lex0 = lex0_regression_linear(fw).as_set()
        bad += lex0 != strict_up0_oracle(fw).as_set()
        grid_gap += lex0 != lex0_regression_linear(fw, candidate_grid(fw.values, "augmented")).as_set()
    return bad == 0, f"{bad}/{N_ORACLE} set mismatches; data vs augmented grid disagreements: {grid_gap}"


def c2_up1_direct(rng):
    bad = 0
    eps = 1e-3
    for _ in range(N_ORACLE):
        v = rng.integers(0, 20, int(rng.integers(1, 10))).astype(float)
        w = rng.integers(1, 4, v.size).astype(float)
        res = wmean_up1(v, weights=w)
        obj = {x: float(np.sum(w * np.abs(v - x) ** (1 - eps))) for x in np.unique(v)}
        best = min(obj.values())
        bad += any(obj[x] > best + 1e-9 * max(1.0, best) for x in res.points())
    return bad == 0, f"{bad}/{N_ORACLE} sets where the winner is not a direct minimiser"


# 3. appendix properties on random dags

def c3_dag_properties(rng):
    fails = {"isotonic": 0, "minimax": 0, "trimming": 0, "monotone": 0}
    for _ in range(N_DAGS):
        n = int(rng.integers(2, 30))
        closure = transitive_closure(random_dag(rng, n, density=float(rng.uniform(0.05, 0.4))))
        fw = WeightedFunction(rng.integers(-9, 10, n).astype(float), rng.integers(1, 4, n).astype(float))
        g = lex_inf_regression(closure, fw)
        fails["isotonic"] += not is_isotonic(g, closure)
        bound = minimax_bound(violating_pairs(closure, fw))
        fails["minimax"] += abs(lp_error(fw, g, np.inf) - bound) > 1e-9
        fails["trimming"] += not check_level_set_trimming(g, fw, closure)
        up = WeightedFunction(fw.values + rng.integers(0, 4, n), fw.weights)
        fails["monotone"] += not np.all(lex_inf_regression(closure, up) >= g - 1e-9)
    return not any(fails.values()), f"failures over {N_DAGS} dags: {fails}"


# 4. performance sanity

def best_of(k, fn):
    best = np.inf
    for _ in range(k):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def c4_strict1_scaling(rng):
    f1, f2 = rng.normal(size=100_000), rng.normal(size=200_000)
    t1 = best_of(3, lambda: strict_down1_linear(f1, delta=DELTA))
    t2 = best_of(3, lambda: strict_down1_linear(f2, delta=DELTA))
    return t2 / t1 <= 2.5, f"{t1:.3f}s -> {t2:.3f}s, ratio {t2 / t1:.2f} (limit 2.5)"


def c4_lexinf_violators(rng):
    n = 2000
    closure = closed_chain(n)
    reversed_f = np.arange(n, 0, -1.0)
    shuffled = np.arange(n, dtype=float)
    idx = rng.choice(n, n // 20, replace=False)
    shuffled[idx] = shuffled[rng.permutation(idx)]
    t_rev = best_of(3, lambda: lex_inf_regression(closure, reversed_f))
    t_shuf = best_of(3, lambda: lex_inf_regression(closure, shuffled))
    return t_rev / t_shuf >= 5, f"reversed {t_rev:.3f}s vs 5%-shuffled {t_shuf:.3f}s, ratio {t_rev / t_shuf:.1f} (needs >= 5)"


def record(name, ok, detail):
    ACCEPTANCE.append((name, ok, detail))
    print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return ok


@pytest.mark.parametrize("name,fn", MICRO, ids=[m[0] for m in MICRO])
def test_micro_example(name, fn):
    ok, detail = run_micro(fn)
    assert record(name, ok, detail), detail


ORACLES = [
    ("2 Algorithm A = lexinf DP oracle (n<=8)", c2_lexinf_oracle),
    ("2 strict-down1 = p->1 PAV oracle within 3 delta (n<=200)", c2_strict1_oracle),
    ("2 lex0 = strict-up0 optimiser sets (n<=8)", c2_lex0_up0),
    ("2 wmean_up1 minimises direct objective at eps=1e-3", c2_up1_direct),
]
_oracle_time = []


@pytest.mark.parametrize("name,fn", ORACLES, ids=[o[0] for o in ORACLES])
def test_oracle_equivalence(name, fn):
    ok, detail, secs = timed(lambda: fn(np.random.default_rng(2024)))
    _oracle_time.append(secs)
    assert record(name, ok, f"{detail} [{secs:.1f}s]"), detail


def test_oracle_budget():
    total = sum(_oracle_time)
    assert record("2 oracle suite runtime", total < 60, f"{total:.1f}s (limit 60s)")


def test_appendix_properties():
    ok, detail = c3_dag_properties(np.random.default_rng(7))
    assert record("3 Algorithm A on random dags", ok, detail), detail


@pytest.mark.slow
def test_strict1_scaling():
    ok, detail = c4_strict1_scaling(np.random.default_rng(11))
    assert record("4 strict-down1 time ratio 2e5 vs 1e5", ok, detail), detail


@pytest.mark.slow
def test_lexinf_violator_cost():
    ok, detail = c4_lexinf_violators(np.random.default_rng(13))
    assert record("4 Algorithm A reversed vs 5%-shuffled", ok, detail), detail


if __name__ == "__main__":
    for name, fn in MICRO:
        record(name, *run_micro(fn))
    total = 0.0
    for name, fn in ORACLES:
        ok, detail, secs = timed(lambda: fn(np.random.default_rng(2024)))
        total += secs
        record(name, ok, f"{detail} [{secs:.1f}s]")
    record("2 oracle suite runtime", total < 60, f"{total:.1f}s (limit 60s)")
    record("3 Algorithm A on random dags", *c3_dag_properties(np.random.default_rng(7)))
    record("4 strict-down1 time ratio 2e5 vs 1e5", *c4_strict1_scaling(np.random.default_rng(11)))
    record("4 Algorithm A reversed vs 5%-shuffled", *c4_lexinf_violators(np.random.default_rng(13)))
