"""scikit-learn style wrappers around the regression routines.

Each estimator learns fitted values at the training points and predicts
with the smallest isotonic extension: a query gets the largest fitted value
among training points it dominates, or the overall minimum when it
dominates none.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import _check_sample_weight, check_array, check_is_fitted

from .graph import WeightedFunction, domination_closure
from .l0 import candidate_grid, lex0_regression_linear
from .l1 import YhatStrategy, strict_down1_linear
from .linf import lex_inf_regression

__all__ = ["LexInfIsotonicRegression", "StrictL1IsotonicRegression", "Lex0IsotonicRegression"]


class _IsotonicBase(RegressorMixin, TransformerMixin, BaseEstimator):
    _multi_feature = False

    def _validate(self, X, y=None, sample_weight=None):
        X = check_array(X, ensure_2d=False, dtype=np.float64)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if X.ndim != 2:
            raise ValueError("X must be one- or two-dimensional")
        if not self._multi_feature and X.shape[1] != 1:
            raise ValueError(f"{type(self).__name__} needs a single feature, got {X.shape[1]}")
        if y is None:
            return X
        y = check_array(y, ensure_2d=False, dtype=np.float64)
        if y.ndim != 1 or y.shape[0] != X.shape[0]:
            raise ValueError("y must be one-dimensional and match X")
        sw = _check_sample_weight(sample_weight, X, dtype=np.float64)
        if np.any(sw <= 0):
            raise ValueError("sample weights must be positive")
        return X, y, sw

    def _sign(self):
        return 1.0 if self.increasing else -1.0

    def _store(self, X, g):
        self.X_fit_ = X
        self.fitted_ = np.asarray(g, dtype=float)
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "fitted_")
        X = self._validate(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        s = self._sign()
        g = s * self.fitted_
        floor = g.min()
        out = np.empty(X.shape[0])
        if self.n_features_in_ == 1:
            order = np.argsort(self.X_fit_[:, 0], kind="stable")
            xs = self.X_fit_[order, 0]
            envelope = np.maximum.accumulate(g[order])
            pos = np.searchsorted(xs, X[:, 0], side="right") - 1
            out = np.where(pos >= 0, envelope[np.maximum(pos, 0)], floor)
        else:
            for k, x in enumerate(X):
                below = np.all(self.X_fit_ <= x, axis=1)
                out[k] = g[below].max() if below.any() else floor
        return s * out

    def transform(self, X):
        return self.predict(X)

    def fit_transform(self, X, y=None, **fit_params):
        return self.fit(X, y, **fit_params).fitted_.copy()


class LexInfIsotonicRegression(_IsotonicBase):
    """Lex-infinity isotonic regression under the coordinate-wise order of ``X``.

    ``X`` may have several columns; training points are compared by
    domination, and identical points are left incomparable.
    """

    _multi_feature = True

    def __init__(self, increasing: bool = True):
        self.increasing = increasing

    def fit(self, X, y, sample_weight=None):
        X, y, sw = self._validate(X, y, sample_weight)
        s = self._sign()
        closure = domination_closure(X)
        g = lex_inf_regression(closure, WeightedFunction.from_values(s * y, sw))
        return self._store(X, s * g)


def _chain_order(X):
    return np.argsort(X[:, 0], kind="stable")


class StrictL1IsotonicRegression(_IsotonicBase):
    """Strict L1 isotonic regression on the order of a single feature.

    Points with equal ``X`` are ordered by their position in the input.
    """

    def __init__(self, strategy: str = "hybrid", delta: float = 1e-6, increasing: bool = True):
        self.strategy = strategy
        self.delta = delta
        self.increasing = increasing

    def fit(self, X, y, sample_weight=None):
        X, y, sw = self._validate(X, y, sample_weight)
        strat = YhatStrategy(self.strategy, self.delta)
        order = _chain_order(X)
        s = self._sign()
        g_sorted, info = strict_down1_linear(
            WeightedFunction.from_values(s * y[order], sw[order]), strat, return_info=True
        )
        g = np.empty_like(g_sorted)
        g[order] = s * g_sorted
        self.n_stages_ = info["stages"]
        self.n_merges_ = info["merges"]
        return self._store(X, g)


class Lex0IsotonicRegression(_IsotonicBase):
    """Lex-zero isotonic regression on the order of a single feature.

    The optimum is often not unique; every co-optimal assignment found
    (up to ``cap``) is kept in ``solutions_`` and the first one is used for
    prediction.  Intended for small samples.
    """

    def __init__(self, grid: str = "data", cap: int = 64, increasing: bool = True):
        self.grid = grid
        self.cap = cap
        self.increasing = increasing

    def fit(self, X, y, sample_weight=None):
        X, y, sw = self._validate(X, y, sample_weight)
        order = _chain_order(X)
        s = self._sign()
        ys = s * y[order]
        sol = lex0_regression_linear(
            WeightedFunction.from_values(ys, sw[order]), candidate_grid(ys, self.grid), cap=self.cap
        )
        sols = []
        for a in sol.assignments:
            g = np.empty_like(a)
            g[order] = s * a
            sols.append(g)
        self.solutions_ = sols
        self.truncated_ = sol.truncated
        return self._store(X, sols[0])
