"""Shared estimator surface for the oversamplers.

Every oversampler is a sklearn-style estimator: constructor stores
hyperparameters verbatim, `fit_resample(X, y)` works on raw arrays, and
`get_params` / `clone` behave as the ecosystem expects. The Dataset-level
entry point is `resample`, which the cross-validation harness uses directly.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .dataset import Dataset
from .validation import check_seed

__all__ = ["BaseOverSampler"]


class BaseOverSampler(BaseEstimator):
    """Base class for minority oversamplers.

    Subclasses implement `_resample(d, n_synthetic, rng_seed) -> Dataset` and
    `seed_weight_table(d) -> WeightTable`. The synthetic amount is either an
    explicit `n_synthetic` or `k_factor` times the majority-minority gap of
    the dataset being resampled (k_factor=1 balances the classes).
    """

    # subclasses define __init__ with explicit params; these names are shared
    n_synthetic: int | None
    k_factor: float | None
    minority_label: str | None
    random_state: int

    def resolve_n_synthetic(self, d: Dataset) -> int:
        if self.n_synthetic is not None:
            n = int(self.n_synthetic)
            if n < 0:
                raise ValueError(f"n_synthetic must be >= 0, got {n}")
            return n
        k = 1.0 if self.k_factor is None else float(self.k_factor)
        delta = d.majority_count - d.minority_count
        return max(0, round(k * delta))

    def resample(
        self,
        d: Dataset,
        n_synthetic: int | None = None,
        rng_seed: int | None = None,
    ) -> Dataset:
        """Return d with synthetic minority rows appended."""
        n = self.resolve_n_synthetic(d) if n_synthetic is None else int(n_synthetic)
        seed = check_seed(self.random_state if rng_seed is None else rng_seed)
        return self._resample(d, n, seed)

    def fit_resample(self, X, y) -> tuple[np.ndarray, np.ndarray]:
        """Array-level entry point: oversample and return (X_res, y_res)."""
        d = Dataset.from_arrays(X, y, minority_label=self.minority_label)
        out = self.resample(d)
        return out.features, out.labels

    def _resample(self, d: Dataset, n_synthetic: int, rng_seed: int) -> Dataset:
        raise NotImplementedError
