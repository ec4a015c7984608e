"""scikit-learn style wrappers around the solver and the depth function."""

import warnings

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import ConvergenceWarning
from sklearn.utils.validation import _check_sample_weight, check_is_fitted, validate_data

from .asymptotics import spatial_depth
from .measure import detect_line, from_points
from .solver import DEFAULT_MAX_ITER, DEFAULT_TOL, Status, solve_quantile

__all__ = ["SpatialQuantile", "SpatialDepth"]


def _measure(X, sample_weight):
    if sample_weight is None:
        return from_points(X)
    sample_weight = _check_sample_weight(sample_weight, X, ensure_non_negative=True)
    # Zero weight means "not in the sample", as elsewhere in scikit-learn.
    keep = sample_weight > 0
    if not np.any(keep):
        raise ValueError("sample_weight must have at least one positive entry")
    return from_points(X[keep], sample_weight[keep])


class SpatialQuantile(TransformerMixin, BaseEstimator):
    """Spatial quantile of order ``alpha`` in direction ``direction``.

    ``direction`` need not be normalized; ``None`` means the first axis.
    ``alpha = 0`` gives the spatial median. ``transform`` recenters data at
    the fitted quantile.

    Attributes
    ----------
    quantile_ : ndarray of shape (n_features,)
        Canonical minimizer (midpoint when the minimizers form a segment).
    interval_ : tuple of two ndarrays or None
        Endpoints of the segment of minimizers, if there is more than one.
    solution_ : QuantileSolution
    """

    def __init__(self, alpha=0.0, direction=None, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, line_tol=1e-9):
        self.alpha = alpha
        self.direction = direction
        self.tol = tol
        self.max_iter = max_iter
        self.line_tol = line_tol

    def _direction(self, d):
        if self.direction is None:
            u = np.zeros(d)
            u[0] = 1.0
            return u
        u = np.asarray(self.direction, dtype=float).reshape(-1)
        if u.shape != (d,):
            raise ValueError(f"direction has {u.size} coordinates, X has {d} features")
        n = np.linalg.norm(u)
        if not np.isfinite(n) or n == 0.0:
            raise ValueError("direction must be finite and nonzero")
        return u / n

    def fit(self, X, y=None, sample_weight=None):
        X = validate_data(self, X, dtype=np.float64)
        if not 0.0 <= self.alpha < 1.0:
            raise ValueError(f"alpha must lie in [0, 1), got {self.alpha}")
        self.direction_ = self._direction(X.shape[1])
        self.measure_ = _measure(X, sample_weight)
        self.line_ = detect_line(self.measure_, self.line_tol)
        sol = solve_quantile(
            self.measure_, float(self.alpha), self.direction_,
            tol=self.tol, max_iter=self.max_iter, line=self.line_,
        )
        if sol.status is Status.MAX_ITER:
            warnings.warn(
                f"solver stopped after {sol.iterations} iterations, residual {sol.residual:.3g}",
                ConvergenceWarning,
            )
        self.solution_ = sol
        self.quantile_ = sol.mu
        self.interval_ = sol.interval
        self.n_iter_ = sol.iterations
        self.uniqueness_ = sol.uniqueness.value
        return self

    def transform(self, X):
        check_is_fitted(self)
        X = validate_data(self, X, dtype=np.float64, reset=False)
        return X - self.quantile_


class SpatialDepth(TransformerMixin, BaseEstimator):
    """Spatial depth with respect to the (weighted) training sample.

    ``score_samples`` returns one depth per row; ``transform`` returns them
    as a single column.
    """

    def fit(self, X, y=None, sample_weight=None):
        X = validate_data(self, X, dtype=np.float64)
        self.measure_ = _measure(X, sample_weight)
        return self

    def score_samples(self, X):
        check_is_fitted(self)
        X = validate_data(self, X, dtype=np.float64, reset=False)
        return np.array([spatial_depth(self.measure_, x) for x in X])

    def transform(self, X):
        return self.score_samples(X)[:, None]
