import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline

from bestiso import Lex0IsotonicRegression, LexInfIsotonicRegression, StrictL1IsotonicRegression


def test_lexinf_fit_predict():
    m = LexInfIsotonicRegression().fit([0, 1, 2], [2, 0, 1])
    assert m.fitted_.tolist() == [1, 1, 1]
    assert m.predict([-1, 0.5, 9]).tolist() == [1, 1, 1]


def test_lexinf_on_points():
    X = [[0, 0], [1, 0], [0, 1], [1, 1]]
    m = LexInfIsotonicRegression().fit(X, [3, 1, 2, 0])
    assert np.allclose(m.fitted_, 1.5)
    assert m.predict([[2, 2]]).tolist() == [1.5]


def test_strict_l1_unsorted_x_and_decreasing():
    X = np.array([3, 0, 2, 1])
    y = np.array([0, 0, 2, -2])  # sorted by X: 0, -2, 2, 0
    m = StrictL1IsotonicRegression().fit(X, y)
    assert np.allclose(m.fitted_, [1, -1, 1, -1], atol=1e-6)
    assert m.n_merges_ <= 3
    d = StrictL1IsotonicRegression(increasing=False).fit(np.arange(4), [0, 2, -2, 0])
    assert np.allclose(d.fitted_, [1, 1, -1, -1], atol=1e-6)
    assert np.all(np.diff(d.predict(np.linspace(-1, 5, 20))) <= 0)


def test_lex0_keeps_all_solutions():
    m = Lex0IsotonicRegression().fit(np.arange(2), [1, 0])
    assert {tuple(s) for s in m.solutions_} == {(0.0, 0.0), (1.0, 1.0)}
    assert not m.truncated_


def test_predictions_are_isotonic():
    rng = np.random.default_rng(0)
    X, y = rng.uniform(0, 10, 50), rng.normal(size=50)
    for est in (LexInfIsotonicRegression(), StrictL1IsotonicRegression()):
        pred = est.fit(X, y).predict(np.linspace(-1, 11, 200))
        assert np.all(np.diff(pred) >= 0)


def test_sample_weight_and_validation():
    m = LexInfIsotonicRegression().fit([0, 1], [1, 0], sample_weight=[3, 1])
    assert np.allclose(m.fitted_, 0.75)
    with pytest.raises(ValueError):
        LexInfIsotonicRegression().fit([0, 1], [1, 0], sample_weight=[0, 1])
    with pytest.raises(ValueError):
        StrictL1IsotonicRegression().fit([[0, 1], [1, 2]], [1, 0])
    with pytest.raises(ValueError):
        StrictL1IsotonicRegression().fit([0, 1, 2], [1, 0])
    with pytest.raises(NotFittedError):
        StrictL1IsotonicRegression().predict([0])


def test_sklearn_protocol():
    est = StrictL1IsotonicRegression(delta=1e-3, strategy="bisect")
    assert clone(est).get_params() == {"delta": 1e-3, "strategy": "bisect", "increasing": True}
    est.set_params(strategy="data")
    assert est.strategy == "data"
    X, y = np.arange(4.0), np.array([0.0, -2, 2, 0])
    assert np.allclose(est.fit_transform(X, y), [-1, -1, 1, 1])
    assert np.allclose(est.transform(X), est.predict(X))
    assert est.score(X, y) == pytest.approx(0.5)


def test_in_pipeline():
    pipe = make_pipeline(LexInfIsotonicRegression())
    assert pipe.fit([0, 1, 2], [2, 0, 1]).predict([1]).tolist() == [1]
