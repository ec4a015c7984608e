import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import ConvergenceWarning, NotFittedError
from sklearn.pipeline import make_pipeline
from sklearn.utils.estimator_checks import parametrize_with_checks

from geoquant import SpatialDepth, SpatialQuantile, builtin_example, solve_quantile

FIVE = np.array([[-2, 0], [-1, 0], [0, 0], [1, 0], [2, 0]], float)


@parametrize_with_checks([SpatialQuantile(), SpatialQuantile(alpha=0.5), SpatialDepth()])
def test_sklearn_compatible(estimator, check):
    check(estimator)


def test_quantile_interval():
    est = SpatialQuantile(alpha=0.6, direction=[5, 0]).fit(FIVE)
    assert est.quantile_.tolist() == [1.5, 0.0]
    assert [e.tolist() for e in est.interval_] == [[1, 0], [2, 0]]
    assert est.uniqueness_ == "non_unique_interval"
    assert est.direction_.tolist() == [1.0, 0.0]


def test_matches_solver():
    a = builtin_example("a")
    est = SpatialQuantile(alpha=0.7, direction=[0, 1]).fit(a.points)
    assert est.quantile_ == pytest.approx(solve_quantile(a, 0.7, [0, 1]).mu)
    assert est.n_iter_ > 0 and est.n_features_in_ == 2


def test_sample_weight_equals_duplication():
    X = np.array([[0, 0], [1, 0], [0, 2.0]])
    w = SpatialQuantile(alpha=0.3, direction=[1, 1]).fit(X, sample_weight=[1, 2, 1])
    d = SpatialQuantile(alpha=0.3, direction=[1, 1]).fit(np.vstack([X, X[1]]))
    assert w.quantile_ == pytest.approx(d.quantile_, abs=1e-9)


def test_params_and_clone():
    est = SpatialQuantile(alpha=0.2, direction=[0, 1], tol=1e-8)
    params = clone(est).get_params()
    assert params == {"alpha": 0.2, "direction": [0, 1], "tol": 1e-8, "max_iter": 10000, "line_tol": 1e-9}
    est.set_params(alpha=0.4)
    assert est.alpha == 0.4


def test_validation():
    with pytest.raises(ValueError):
        SpatialQuantile(alpha=1.0).fit(FIVE)
    with pytest.raises(ValueError):
        SpatialQuantile(direction=[0, 0]).fit(FIVE)
    with pytest.raises(ValueError):
        SpatialQuantile(direction=[1, 0, 0]).fit(FIVE)
    with pytest.raises(ValueError):
        SpatialQuantile().fit(FIVE, sample_weight=np.zeros(5))
    with pytest.raises(NotFittedError):
        SpatialQuantile().transform(FIVE)


def test_convergence_warning():
    with pytest.warns(ConvergenceWarning):
        SpatialQuantile(alpha=0.99, direction=[0, 1], max_iter=1).fit(builtin_example("a").points)


def test_transform_centers():
    est = SpatialQuantile(alpha=0.6, direction=[1, 0]).fit(FIVE)
    assert est.transform([[1.5, 1.0]]).tolist() == [[0.0, 1.0]]


def test_depth():
    d = builtin_example("d").points
    dep = SpatialDepth().fit(d)
    scores = dep.score_samples([[0, 0], [1e6, 0]])
    assert scores[0] == 1.0 and scores[1] < 1e-5
    assert dep.transform([[0, 0]]).shape == (1, 1)


def test_pipeline():
    pipe = make_pipeline(SpatialQuantile(), SpatialDepth())
    out = pipe.fit_transform(builtin_example("d").points)
    assert out.shape == (4, 1)
