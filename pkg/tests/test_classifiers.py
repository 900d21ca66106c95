"""KDE-Bayes and k-NN classifiers behind the shared scored interface."""

from __future__ import annotations

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from cgmos import density
from cgmos.classifiers import (
    CLASSIFIER_CLASSES,
    KDEBayesClassifier,
    KNNClassifier,
    make_classifier,
    train,
)
from cgmos.errors import ParameterError

from conftest import make_dataset


class TestKdeBayes:
    def test_training_point_scores_match_density_posteriors(self, small_gauss):
        """Scoring the training matrix reproduces the fitted density model's
        own minority posteriors: query sums at a training row equal the
        self-inclusive kernel sums of the frozen model."""
        clf = KDEBayesClassifier(q=3, sigma=1.0).fit_dataset(small_gauss)
        scores = clf.score_minority(small_gauss.features)
        model = density.fit(small_gauss, q=3, sigma=1.0)
        expected = density.posteriors(model, small_gauss)[:, 1]
        np.testing.assert_allclose(scores, expected, rtol=1e-12)

    def test_symmetric_query_scores_one_half(self):
        """Equidistant from one minority and one majority sample with equal
        bandwidths, a query scores exactly the balanced posterior 0.5."""
        d = make_dataset([[0.0], [2.0]], [True, False])
        clf = KDEBayesClassifier(q=1, sigma=1.0).fit_dataset(d)
        assert clf.score_minority([[1.0]])[0] == pytest.approx(0.5)

    def test_separated_clusters_score_correctly(self, small_gauss):
        clf = KDEBayesClassifier(q=3, sigma=1.0).fit_dataset(small_gauss)
        minority_center = clf.score_minority([[0.0, 0.0]])[0]
        majority_center = clf.score_minority([[3.0, 0.0]])[0]
        assert minority_center > 0.8
        assert majority_center < 0.2

    def test_remote_query_scores_at_minority_prior(self):
        """A query where both class likelihoods underflow falls back to the
        minority prior rather than failing."""
        d = make_dataset([[0.0], [0.5], [1.0], [1.5]], [True, False, False, False])
        clf = KDEBayesClassifier(q=1, sigma=1.0).fit_dataset(d)
        assert clf.score_minority([[1e9]])[0] == pytest.approx(0.25)

    def test_parameter_validation_at_fit(self, small_gauss):
        with pytest.raises(ParameterError):
            KDEBayesClassifier(q=0).fit_dataset(small_gauss)
        with pytest.raises(ParameterError):
            KDEBayesClassifier(sigma=-1.0).fit_dataset(small_gauss)


class TestKnn:
    def test_single_neighbor_gives_binary_scores(self, small_gauss):
        clf = KNNClassifier(k=1).fit_dataset(small_gauss)
        scores = clf.score_minority(small_gauss.features)
        assert set(np.unique(scores)).issubset({0.0, 1.0})

    def test_three_neighbor_fraction(self):
        """A query whose 3 nearest training rows are minority, minority,
        majority scores 2/3."""
        d = make_dataset(
            [[0.0], [0.2], [0.4], [5.0], [6.0]], [True, True, False, False, True]
        )
        clf = KNNClassifier(k=3).fit_dataset(d)
        assert clf.score_minority([[0.1]])[0] == pytest.approx(2.0 / 3.0)

    def test_distance_ties_break_by_row_index(self):
        """Two training rows at the same distance: the lower index wins the
        last neighbor slot."""
        d = make_dataset([[0.0], [2.0], [-2.0], [10.0]], [True, False, True, False])
        clf = KNNClassifier(k=2).fit_dataset(d)
        # query at 0: distances (0, 2, 2, 10); slots go to rows 0 and 1
        assert clf.score_minority([[0.0]])[0] == pytest.approx(0.5)

    def test_k_larger_than_training_rejected(self, small_gauss):
        with pytest.raises(ParameterError):
            KNNClassifier(k=small_gauss.n + 1).fit_dataset(small_gauss)


class TestSharedSurface:
    def test_predict_thresholds_strictly_above_half(self):
        """score == 0.5 predicts the majority label; only a strict majority
        of evidence yields the minority label."""
        d = make_dataset([[0.0], [1.0], [10.0], [11.0]], [True, True, False, False])
        clf = KNNClassifier(k=2).fit_dataset(d)
        assert clf.score_minority([[5.5]])[0] == pytest.approx(0.5)
        assert clf.predict([[5.5]])[0] == d.majority_label
        assert clf.predict([[0.5]])[0] == d.minority_label

    def test_fit_accepts_arrays_with_declared_minority(self):
        X = [[0.0], [1.0], [2.0], [3.0]]
        y = ["a", "a", "b", "b"]
        clf = KNNClassifier(k=1).fit(X, y, minority_label="b")
        assert set(clf.predict([[0.0], [3.0]])) == {"a", "b"}

    def test_unfitted_raises(self):
        for cls in CLASSIFIER_CLASSES.values():
            with pytest.raises(NotFittedError):
                cls().predict([[0.0]])

    def test_query_dimension_mismatch_rejected(self, small_gauss):
        clf = KNNClassifier(k=3).fit_dataset(small_gauss)
        with pytest.raises(ParameterError):
            clf.score_minority(np.zeros((2, small_gauss.m + 1)))
        with pytest.raises(ParameterError):
            clf.score_minority([[np.nan, 0.0]])

    def test_refit_is_deterministic(self, small_gauss):
        a = KDEBayesClassifier(q=3).fit_dataset(small_gauss)
        b = KDEBayesClassifier(q=3).fit_dataset(small_gauss)
        query = small_gauss.features[::5]
        np.testing.assert_array_equal(a.score_minority(query), b.score_minority(query))

    def test_sklearn_clone_round_trip(self):
        est = KDEBayesClassifier(q=9, sigma=0.7)
        assert clone(est).get_params() == {"q": 9, "sigma": 0.7}
        est2 = KNNClassifier(k=3)
        assert clone(est2).get_params() == {"k": 3}


class TestFactories:
    def test_make_classifier_by_name(self):
        assert isinstance(make_classifier("b_kde", q=7), KDEBayesClassifier)
        assert isinstance(make_classifier("knn", k=2), KNNClassifier)

    def test_unknown_kind_rejected(self):
        with pytest.raises(ParameterError, match="b_kde"):
            make_classifier("svm")

    def test_extra_params_filtered(self):
        clf = make_classifier("knn", k=4, q=40, sigma=2.0)
        assert clf.k == 4
        assert not hasattr(clf, "q")

    def test_train_fits_in_one_step(self, small_gauss):
        clf = train("knn", small_gauss, k=3)
        assert clf.score_minority(small_gauss.features[:1]).shape == (1,)
