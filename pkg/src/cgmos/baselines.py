"""Reference oversamplers: duplication, SMOTE, Borderline-SMOTE, ADASYN.

All four share the interpolation machinery of the certainty guided sampler
(same seed-draw and synthesis streams), differing only in how the seed
distribution over candidate rows is built:

  dup                uniform over minority rows, appended verbatim
  smote              uniform over minority rows
  borderline_smote   uniform over the DANGER subset: minority rows whose
                     k_danger nearest neighbors are at least half but not
                     entirely majority
  adasyn             proportional to each minority row's majority fraction
                     among its k nearest neighbors

Every method takes the synthetic amount as an explicit count so they all
plug into the same k-times-gap sweep interface.
"""

from __future__ import annotations

import inspect
import warnings

import numpy as np
from scipy.spatial.distance import cdist

from .base import BaseOverSampler
from .dataset import Dataset
from .errors import ParameterError
from .sampling import CGMOS, SynthesisConfig, WeightTable, draw_seeds, synthesize
from .validation import check_positive_int, check_seed, derive_seed

__all__ = [
    "dup_oversample",
    "smote_oversample",
    "borderline_smote_oversample",
    "adasyn_oversample",
    "RandomDuplication",
    "SMOTE",
    "BorderlineSMOTE",
    "ADASYN",
    "OVERSAMPLER_CLASSES",
    "make_oversampler",
]


def _uniform_minority_table(d: Dataset) -> WeightTable:
    weights = np.zeros(d.n)
    weights[d.minority_indices] = 1.0
    return WeightTable.from_weights(weights, d.minority_indices)


def _interpolation_round(d: Dataset, table: WeightTable, n: int, k_interp: int, rng_seed: int) -> Dataset:
    """Draw n seeds from the table and append one interpolated point each.

    Seed-draw and synthesis streams are derived exactly as in the certainty
    guided pipeline's first batch, so forcing its weights to a baseline's
    distribution reproduces that baseline bit for bit.
    """
    seeds = draw_seeds(table, n, derive_seed(rng_seed, "draw", 0))
    cfg = SynthesisConfig(n_synthetic=n, k_interp=k_interp, rng_seed=rng_seed)
    batch = synthesize(d, seeds, cfg, derive_seed(rng_seed, "synth", 0))
    return d.with_minority_appended(batch.points)


def _majority_counts_near_minority(d: Dataset, k: int) -> np.ndarray:
    """For each minority row: majority count among its k nearest neighbors.

    Neighbors come from the full dataset with the row itself excluded;
    distance ties break by row index.
    """
    k = check_positive_int(k, "k")
    if k > d.n - 1:
        raise ParameterError(f"k={k} needs at least k+1={k + 1} samples, dataset has {d.n}")
    minority = d.minority_indices
    counts = np.empty(minority.shape[0], dtype=np.int64)
    d2 = cdist(d.features[minority], d.features, "sqeuclidean")
    for row, s in enumerate(minority):
        order = np.argsort(d2[row], kind="stable")
        order = order[order != s][:k]
        counts[row] = int((~d.minority_mask[order]).sum())
    return counts


def dup_oversample(d: Dataset, n: int, rng_seed: int) -> Dataset:
    """Append n minority rows drawn uniformly with replacement, verbatim."""
    if int(n) < 0:
        raise ParameterError(f"n must be >= 0, got {n}")
    if n == 0:
        return d
    seeds = draw_seeds(_uniform_minority_table(d), n, derive_seed(check_seed(rng_seed), "draw", 0))
    return d.with_minority_appended(d.features[seeds])


def smote_oversample(d: Dataset, n: int, k: int, rng_seed: int) -> Dataset:
    """Classic SMOTE: uniform minority seeds, minority-neighbor interpolation."""
    if int(n) < 0:
        raise ParameterError(f"n must be >= 0, got {n}")
    if n == 0:
        return d
    return _interpolation_round(d, _uniform_minority_table(d), n, k, check_seed(rng_seed))


def borderline_danger_indices(d: Dataset, k_danger: int) -> np.ndarray:
    """Minority rows whose k_danger-neighborhood is half-or-more majority but
    not purely majority (the borderline band; pure-majority neighborhoods are
    treated as noise and excluded)."""
    counts = _majority_counts_near_minority(d, k_danger)
    danger = (counts * 2 >= k_danger) & (counts < k_danger)
    return d.minority_indices[danger]


def borderline_smote_oversample(d: Dataset, n: int, k: int, k_danger: int, rng_seed: int) -> Dataset:
    """SMOTE restricted to borderline minority seeds.

    With an empty DANGER set the method degrades to plain SMOTE, with a
    warning rather than a failure.
    """
    if int(n) < 0:
        raise ParameterError(f"n must be >= 0, got {n}")
    if n == 0:
        return d
    danger = borderline_danger_indices(d, k_danger)
    if danger.size == 0:
        warnings.warn("DANGER set is empty; falling back to plain SMOTE", stacklevel=2)
        table = _uniform_minority_table(d)
    else:
        weights = np.zeros(d.n)
        weights[danger] = 1.0
        table = WeightTable.from_weights(weights, danger)
    return _interpolation_round(d, table, n, k, check_seed(rng_seed))


def adasyn_oversample(d: Dataset, n: int, k: int, rng_seed: int) -> Dataset:
    """ADASYN: seed probability proportional to local majority fraction.

    r_i = (majority among the k nearest neighbors of minority row i) / k.
    All-zero r (no minority row borders the majority) falls back to uniform
    seeds with a warning. The synthetic amount n is supplied externally.
    """
    if int(n) < 0:
        raise ParameterError(f"n must be >= 0, got {n}")
    if n == 0:
        return d
    counts = _majority_counts_near_minority(d, k)
    r = counts / float(k)
    if r.sum() == 0:
        warnings.warn("all ADASYN ratios are zero; falling back to uniform seeds", stacklevel=2)
        table = _uniform_minority_table(d)
    else:
        weights = np.zeros(d.n)
        weights[d.minority_indices] = r
        table = WeightTable.from_weights(weights, d.minority_indices)
    return _interpolation_round(d, table, n, k, check_seed(rng_seed))


# -- estimator shells ---------------------------------------------------------


class RandomDuplication(BaseOverSampler):
    """Duplicate uniformly drawn minority rows."""

    def __init__(
        self,
        n_synthetic: int | None = None,
        k_factor: float | None = 1.0,
        minority_label: str | None = None,
        random_state: int = 0,
    ):
        self.n_synthetic = n_synthetic
        self.k_factor = k_factor
        self.minority_label = minority_label
        self.random_state = random_state

    def _resample(self, d: Dataset, n_synthetic: int, rng_seed: int) -> Dataset:
        return dup_oversample(d, n_synthetic, rng_seed)

    def seed_weight_table(self, d: Dataset) -> WeightTable:
        return _uniform_minority_table(d)


class SMOTE(BaseOverSampler):
    """Uniform minority seeds with k-nearest-minority interpolation."""

    def __init__(
        self,
        n_synthetic: int | None = None,
        k_factor: float | None = 1.0,
        k_interp: int = 5,
        minority_label: str | None = None,
        random_state: int = 0,
    ):
        self.n_synthetic = n_synthetic
        self.k_factor = k_factor
        self.k_interp = k_interp
        self.minority_label = minority_label
        self.random_state = random_state

    def _resample(self, d: Dataset, n_synthetic: int, rng_seed: int) -> Dataset:
        return smote_oversample(d, n_synthetic, self.k_interp, rng_seed)

    def seed_weight_table(self, d: Dataset) -> WeightTable:
        return _uniform_minority_table(d)


class BorderlineSMOTE(BaseOverSampler):
    """SMOTE seeded only from the borderline (DANGER) minority band."""

    def __init__(
        self,
        n_synthetic: int | None = None,
        k_factor: float | None = 1.0,
        k_interp: int = 5,
        k_danger: int = 5,
        minority_label: str | None = None,
        random_state: int = 0,
    ):
        self.n_synthetic = n_synthetic
        self.k_factor = k_factor
        self.k_interp = k_interp
        self.k_danger = k_danger
        self.minority_label = minority_label
        self.random_state = random_state

    def _resample(self, d: Dataset, n_synthetic: int, rng_seed: int) -> Dataset:
        return borderline_smote_oversample(d, n_synthetic, self.k_interp, self.k_danger, rng_seed)

    def seed_weight_table(self, d: Dataset) -> WeightTable:
        danger = borderline_danger_indices(d, self.k_danger)
        if danger.size == 0:
            return _uniform_minority_table(d)
        weights = np.zeros(d.n)
        weights[danger] = 1.0
        return WeightTable.from_weights(weights, danger)


class ADASYN(BaseOverSampler):
    """Density-adaptive seeds: probability proportional to local majority share."""

    def __init__(
        self,
        n_synthetic: int | None = None,
        k_factor: float | None = 1.0,
        k_interp: int = 5,
        minority_label: str | None = None,
        random_state: int = 0,
    ):
        self.n_synthetic = n_synthetic
        self.k_factor = k_factor
        self.k_interp = k_interp
        self.minority_label = minority_label
        self.random_state = random_state

    def _resample(self, d: Dataset, n_synthetic: int, rng_seed: int) -> Dataset:
        return adasyn_oversample(d, n_synthetic, self.k_interp, rng_seed)

    def seed_weight_table(self, d: Dataset) -> WeightTable:
        counts = _majority_counts_near_minority(d, self.k_interp)
        r = counts / float(self.k_interp)
        if r.sum() == 0:
            return _uniform_minority_table(d)
        weights = np.zeros(d.n)
        weights[d.minority_indices] = r
        return WeightTable.from_weights(weights, d.minority_indices)


OVERSAMPLER_CLASSES = {
    "cgmos": CGMOS,
    "dup": RandomDuplication,
    "smote": SMOTE,
    "borderline_smote": BorderlineSMOTE,
    "adasyn": ADASYN,
}


def make_oversampler(method: str, **params) -> BaseOverSampler | None:
    """Build an oversampler by name; "none" gives None (no oversampling).

    Extra keyword arguments not accepted by the chosen class are ignored, so
    one flat CLI parameter namespace can serve every method.
    """
    if method == "none":
        return None
    cls = OVERSAMPLER_CLASSES.get(method)
    if cls is None:
        raise ParameterError(
            f"unknown method {method!r}; choose from {sorted(OVERSAMPLER_CLASSES) + ['none']}"
        )
    accepted = inspect.signature(cls.__init__).parameters
    return cls(**{k: v for k, v in params.items() if k in accepted})
