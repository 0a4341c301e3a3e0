"""scikit-learn style wrappers: fit a function, predict counts for points."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .engine import DEFAULT_SAMPLES, OnGraphError, illumination_index
from .function import Function
from .thetalines import count_theta_lines

ON_GRAPH = -1


class _PointCounter(BaseEstimator):
    def fit(self, f, y=None):
        """Prepare ``f`` (formula text, expression or structured function)."""
        self.function_ = Function(f)
        return self

    def _points(self, X):
        check_is_fitted(self, "function_")
        return check_array(X, dtype=np.float64, ensure_min_features=2)[:, :2]

    def predict(self, X) -> np.ndarray:
        """Counts for each row ``(s, t)``; points on the graph get ``-1``."""
        out = np.empty(len(X), dtype=np.int64)
        for i, (s, t) in enumerate(self._points(X)):
            try:
                out[i] = self._count(float(s), float(t))
            except OnGraphError:
                out[i] = ON_GRAPH
        return out


class IlluminationIndex(_PointCounter):
    """Number of distinct tangent lines through each query point.

    >>> IlluminationIndex().fit("x^2").predict([[0, -1], [0, 1]]).tolist()
    [2, 0]
    """

    def __init__(self, method="auto", window=None, samples=DEFAULT_SAMPLES, assume_convex=False):
        self.method = method
        self.window = window
        self.samples = samples
        self.assume_convex = assume_convex

    def _count(self, s, t):
        return self.results_for(s, t).index

    def results_for(self, s, t):
        check_is_fitted(self, "function_")
        return illumination_index(
            self.function_, (s, t), self.method, self.window, self.samples, self.assume_convex
        )


class ThetaLineCount(_PointCounter):
    """Number of distinct lines through each point meeting the graph at ``theta``."""

    def __init__(self, theta=np.pi / 2, window=None, samples=DEFAULT_SAMPLES):
        self.theta = theta
        self.window = window
        self.samples = samples

    def _count(self, s, t):
        return count_theta_lines(self.function_, (s, t), self.theta, self.window, self.samples).count
