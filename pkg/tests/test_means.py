import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bestiso.exceptions import ConvergenceError
from bestiso.means import (
    MeanResult,
    WeightedSet,
    bisect_increasing,
    lower_median,
    median_interval,
    neg_power_score,
    score_better,
    wmean_0,
    wmean_1_0,
    wmean_1_inf,
    wmean_down1,
    wmean_inf,
    wmean_neg_p,
    wmean_p,
    wmean_p_sub1,
    wmean_up1,
)


def test_weighted_set_validation():
    with pytest.raises(ValueError):
        WeightedSet([], None)
    with pytest.raises(ValueError):
        WeightedSet([1.0], [0.0])
    vals, wts = WeightedSet([2, 1, 2], [1, 1, 3]).distinct()
    assert vals.tolist() == [1, 2] and wts.tolist() == [1, 4]


def test_mean_result_shapes():
    assert MeanResult.interval(1, 1).kind == "point"
    with pytest.raises(ValueError):
        MeanResult.interval(2, 1)
    s = MeanResult.finite_set([3, 1, 3])
    assert s.payload == (1.0, 3.0) and 3 in s and 2 not in s
    assert 2.5 in MeanResult.interval(2, 3)


@pytest.mark.parametrize("vals,expected", [([1, 2, 3, 4], (2, 3)), ([1, 2, 3], (2, 2)), ([0, 1], (0, 1))])
def test_median_interval(vals, expected):
    assert median_interval(vals).bounds == expected


def test_weighted_median():
    assert median_interval([1, 2, 3, 4], [1, 1, 2, 1]).bounds == (3, 3)
    assert lower_median([5, 1, 3]) == 3


class TestLp:
    def test_examples(self):
        assert wmean_p([0, 1], 2) == pytest.approx(0.5, abs=1e-10)
        assert wmean_p([4.2], 3) == 4.2
        assert wmean_p([1, 1, 3, 7], 1.0001) == pytest.approx(2.5, abs=0.01)

    def test_rejects_small_p(self):
        with pytest.raises(ValueError):
            wmean_p([0, 1], 1)

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.integers(-20, 20), min_size=2, max_size=8), st.sampled_from([1.5, 2.0, 4.0]),
           st.integers(0, 2**31))
    def test_matches_grid_search(self, vals, p, seed):
        w = np.random.default_rng(seed).integers(1, 4, len(vals)).astype(float)
        v = np.asarray(vals, float)
        y = wmean_p(v, p, tol=1e-10, weights=w)
        grid = np.linspace(v.min(), v.max(), 20001)
        obj = (w[None, :] * np.abs(grid[:, None] - v[None, :]) ** p).sum(axis=1)
        best = grid[np.argmin(obj)]
        step = grid[1] - grid[0] if grid.size > 1 else 0
        assert abs(y - best) <= 2 * step + 1e-9

    def test_converges_to_jackson(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            v = rng.integers(0, 10, 6).astype(float)
            target = wmean_down1(v)
            gaps = [abs(wmean_p(v, 1 + e, tol=1e-13) - target) for e in (1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6)]
            assert gaps[-1] < 1e-3
            assert all(b <= a + 1e-9 for a, b in zip(gaps, gaps[1:]))


def test_bisection_cap():
    with pytest.raises(ConvergenceError):
        bisect_increasing(lambda y: y - 0.3, -1e300, 1e300, tol=1e-300)


class TestJackson:
    @pytest.mark.parametrize("vals,expected", [([0, 1], 0.5), ([1, 1, 3, 7], 2.5), ([1, 2, 3], 2)])
    def test_examples(self, vals, expected):
        assert wmean_down1(vals) == pytest.approx(expected, abs=1e-9)

    def test_root_balances_logs(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            v = rng.integers(0, 12, 6).astype(float)
            w = rng.integers(1, 3, 6).astype(float)
            lo, hi = median_interval(v, w).bounds
            if lo == hi:
                continue
            c = wmean_down1(v, weights=w)
            assert lo < c < hi
            left = np.sum(w[v <= lo] * np.log(c - v[v <= lo]))
            right = np.sum(w[v >= hi] * np.log(v[v >= hi] - c))
            slope = np.sum(w[v <= lo] / (c - v[v <= lo])) + np.sum(w[v >= hi] / (v[v >= hi] - c))
            assert abs(left - right) <= slope * 1e-9


class TestUp1:
    def test_examples(self):
        assert wmean_up1([1, 1, 3, 7]) == MeanResult.point(1)
        assert wmean_up1([0, 1]).payload == (0.0, 1.0)
        assert wmean_up1([1, 2], weights=[2, 1]) == MeanResult.point(1)

    def test_winner_minimises_direct_objective(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            v = rng.integers(0, 15, rng.integers(2, 8)).astype(float)
            res = wmean_up1(v)
            lo, hi = median_interval(v).bounds
            assert set(res.points()) <= {lo, hi}
            if res.is_unique and lo != hi:
                win = res.points()[0]
                lose = hi if win == lo else lo
                obj = lambda x: np.sum(np.abs(v - x) ** 0.999)
                assert obj(win) <= obj(lose) + 1e-12


def test_sub1_examples():
    assert wmean_p_sub1([0, 1], 0.5).payload == (0.0, 1.0)
    assert wmean_p_sub1([2], 0.5).payload == (2.0,)
    assert wmean_p_sub1([0, 0, 1], 0.5).payload == (0.0,)
    # near 0 the heaviest value wins even outside the median interval
    assert wmean_p_sub1([0, 0, 0, 5, 6, 7, 8], 0.01).payload == (0.0,)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(-10, 10), min_size=1, max_size=7), st.sampled_from([0.2, 0.5, 0.9]))
def test_sub1_beats_grid(vals, p):
    v = np.asarray(vals, float)
    best = wmean_p_sub1(v, p).points()[0]
    obj = lambda y: np.sum(np.abs(v - y) ** p)
    grid = np.linspace(v.min() - 1, v.max() + 1, 2001)
    assert obj(best) <= min(obj(y) for y in grid) + 1e-9


def test_mode_examples():
    assert wmean_0([1, 1, 2]).payload == (1.0,)
    assert wmean_0([1, 2]).payload == (1.0, 2.0)
    assert wmean_0([1, 1, 2], weights=[1, 1, 3]).payload == (2.0,)


class TestInf:
    @pytest.mark.parametrize("vals,w,expected", [([1, 1, 3, 7], None, 4), ([0, 1], None, 0.5), ([0, 1], [3, 1], 0.25)])
    def test_examples(self, vals, w, expected):
        assert wmean_inf(vals, weights=w) == pytest.approx(expected, abs=1e-12)

    def test_weighted_root_balances_weighted_errors(self):
        # 3y = 1 - y: the heavier point pulls the mean toward itself
        y = wmean_inf([0, 1], weights=[3, 1])
        assert 3 * y == pytest.approx(1 - y)

    def test_repeated_values_do_not_pool(self):
        assert wmean_inf([0, 0, 0, 1]) == pytest.approx(0.5)

    def test_constrained_examples(self):
        assert wmean_1_inf([1, 1, 3, 7]) == pytest.approx(3)
        assert wmean_1_inf([1, 5, 6]) == 5
        assert wmean_1_inf([1, 2, 3, 4]) == pytest.approx(2.5)

    def test_constrained_stays_l1_optimal(self):
        rng = np.random.default_rng(6)
        for _ in range(50):
            v = rng.integers(0, 20, 6).astype(float)
            x = wmean_1_inf(v)
            lo, hi = median_interval(v).bounds
            assert lo - 1e-12 <= x <= hi + 1e-12
            assert np.sum(np.abs(v - x)) == pytest.approx(np.sum(np.abs(v - lo)))


def test_l1_then_l0():
    assert wmean_1_0([1, 2, 3, 4]).payload == (2.0, 3.0)
    assert wmean_1_0([1, 2, 3]).payload == (2.0,)
    assert wmean_1_0([1, 2, 3, 4], weights=[1, 1, 2, 1]).payload == (3.0,)


class TestNegative:
    def test_examples(self):
        assert wmean_neg_p([11, 8, 5, 2, 0], -0.1).payload == (2.0,)
        assert wmean_neg_p([4], -0.3).payload == (4.0,)
        assert wmean_neg_p([0, 1], -0.5).payload == (0.0, 1.0)
        with pytest.raises(ValueError):
            wmean_neg_p([0, 1], 0.5)

    def test_exact_fits_dominate(self):
        a = neg_power_score([0, 5], [1, 1], -0.5)
        b = neg_power_score([1, 1], [1, 1], -0.5)
        assert score_better(a, b) == -1

    def test_float_and_exact_paths_agree(self):
        # 1/p = -2.5 takes the log-sum path, -3 the exact one; both rank small errors first
        for p in (-0.4, -1 / 3):
            assert score_better(neg_power_score([1, 3], [1, 1], p), neg_power_score([2, 2], [1, 1], p)) == -1
