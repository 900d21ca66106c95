"""In-repo classifiers used by the evaluation harness.

Both expose a continuous minority score in [0, 1] (for ROC curves) and a hard
predict at the fixed threshold 0.5, minority only on a strict majority of
evidence: score > 0.5, ties going to the majority class.

  b_kde  adaptive-bandwidth Gaussian KDE Bayes rule; scores at query points
         come from kernel sums of the training samples only, so scoring a
         training point reproduces the fitted model's own posterior.
  knn    fraction of minority among the k nearest training samples, distance
         ties broken by training-row index.
"""

from __future__ import annotations

import inspect

import numpy as np
from scipy.spatial.distance import cdist
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .dataset import Dataset
from .density import DEFAULT_Q, DEFAULT_SIGMA, _posterior_matrix, compute_bandwidths, query_class_sums
from .errors import ParameterError
from .validation import check_positive_int, check_positive_real

__all__ = [
    "KDEBayesClassifier",
    "KNNClassifier",
    "CLASSIFIER_CLASSES",
    "make_classifier",
    "train",
]


def _as_query_matrix(X: np.ndarray, m: int) -> np.ndarray:
    Xq = np.asarray(X, dtype=np.float64)
    if Xq.ndim == 1:
        Xq = Xq[None, :]
    if Xq.ndim != 2 or Xq.shape[1] != m:
        raise ParameterError(f"queries must be (n, {m}), got shape {Xq.shape}")
    if not np.isfinite(Xq).all():
        raise ParameterError("queries contain non-finite values")
    return Xq


class _ScoredClassifier(BaseEstimator):
    """Shared fit plumbing and the score > 0.5 decision rule."""

    def fit(self, X, y, minority_label: str | None = None):
        return self.fit_dataset(Dataset.from_arrays(X, y, minority_label=minority_label))

    def fit_dataset(self, d: Dataset):
        raise NotImplementedError

    def score_minority(self, X) -> np.ndarray:
        raise NotImplementedError

    def predict(self, X) -> np.ndarray:
        d = self._fitted_dataset()
        scores = self.score_minority(X)
        return np.where(scores > 0.5, d.minority_label, d.majority_label)

    def _fitted_dataset(self) -> Dataset:
        d = getattr(self, "dataset_", None)
        if d is None:
            raise NotFittedError(f"{type(self).__name__} is not fitted; call fit or fit_dataset first")
        return d


class KDEBayesClassifier(_ScoredClassifier):
    """Bayes rule over class-conditional adaptive-bandwidth Gaussian KDEs.

    Bandwidths are fitted on the training set (scaled mean distance to the q
    nearest neighbors, self excluded); each query is scored from the training
    kernel sums, likelihoods weighted by empirical priors. Queries where both
    likelihoods underflow to zero score at the minority prior.
    """

    def __init__(self, q: int = DEFAULT_Q, sigma: float = DEFAULT_SIGMA):
        self.q = q
        self.sigma = sigma

    def fit_dataset(self, d: Dataset):
        check_positive_int(self.q, "q")
        check_positive_real(self.sigma, "sigma")
        self.dataset_ = d
        self.bandwidths_ = compute_bandwidths(d, self.q, self.sigma)
        return self

    def score_minority(self, X) -> np.ndarray:
        d = self._fitted_dataset()
        Xq = _as_query_matrix(X, d.m)
        sums = query_class_sums(d, self.bandwidths_, Xq)
        post, _ = _posterior_matrix(sums, (d.majority_count, d.minority_count))
        return post[:, 1]


class KNNClassifier(_ScoredClassifier):
    """Minority fraction among the k nearest training samples."""

    def __init__(self, k: int = 5):
        self.k = k

    def fit_dataset(self, d: Dataset):
        check_positive_int(self.k, "k")
        if self.k > d.n:
            raise ParameterError(f"k={self.k} exceeds training size {d.n}")
        self.dataset_ = d
        return self

    def score_minority(self, X) -> np.ndarray:
        d = self._fitted_dataset()
        Xq = _as_query_matrix(X, d.m)
        d2 = cdist(Xq, d.features, "sqeuclidean")
        scores = np.empty(Xq.shape[0])
        for row in range(Xq.shape[0]):
            nearest = np.argsort(d2[row], kind="stable")[: self.k]
            scores[row] = float(d.minority_mask[nearest].mean())
        return scores


CLASSIFIER_CLASSES = {
    "b_kde": KDEBayesClassifier,
    "knn": KNNClassifier,
}


def make_classifier(kind: str, **params) -> _ScoredClassifier:
    """Build an unfitted classifier by name; unknown parameters are ignored."""
    cls = CLASSIFIER_CLASSES.get(kind)
    if cls is None:
        raise ParameterError(f"unknown classifier {kind!r}; choose from {sorted(CLASSIFIER_CLASSES)}")
    accepted = inspect.signature(cls.__init__).parameters
    return cls(**{k: v for k, v in params.items() if k in accepted})


def train(kind: str, d: Dataset, **params) -> _ScoredClassifier:
    """Build and fit a classifier on a dataset in one step."""
    return make_classifier(kind, **params).fit_dataset(d)
