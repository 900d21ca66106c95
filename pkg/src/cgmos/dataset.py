"""Binary imbalanced dataset container, CSV ingestion, folds, and fixtures.

A Dataset is an immutable (features, minority mask) pair with named labels.
Multi-class input is reduced to binary by keeping the smallest class as the
minority and merging everything else; ties go to the lexicographically
smallest label. Ingestion enforces minority <= majority; programmatic
construction with an explicit minority label keeps the declared roles, since
oversampled training sets may legitimately exceed balance.
"""

from __future__ import annotations

import csv
import warnings
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateDatasetError,
    InfeasibleStratificationError,
    ParameterError,
    ParseError,
)
from .validation import check_feature_matrix, check_positive_int, check_seed, derive_seed

__all__ = [
    "Dataset",
    "ClassPartition",
    "FoldPlan",
    "binarize_keep_smallest",
    "load_csv",
    "save_csv",
    "stratified_folds",
    "make_two_gaussian_fixture",
    "minmax_scaled",
]

MERGED_MAJORITY_LABEL = "rest"


@dataclass(frozen=True, eq=False)
class ClassPartition:
    """Index split of a Dataset with its imbalance ratio |minority|/|majority|."""

    minority_indices: np.ndarray
    majority_indices: np.ndarray
    imbalance_ratio: float


@dataclass(frozen=True, eq=False)
class Dataset:
    """n x m feature matrix with a boolean minority mask and label names.

    Use from_arrays / load_csv rather than the raw constructor; both validate.
    """

    features: np.ndarray
    minority_mask: np.ndarray
    minority_label: str = "minority"
    majority_label: str = "majority"
    feature_names: tuple[str, ...] | None = None

    def __post_init__(self):
        features = check_feature_matrix(self.features)
        mask = np.asarray(self.minority_mask, dtype=bool)
        if mask.shape != (features.shape[0],):
            raise ParameterError(
                f"minority_mask shape {mask.shape} does not match {features.shape[0]} rows"
            )
        if features.shape[0] < 2:
            raise DegenerateDatasetError("a dataset needs at least 2 samples")
        n_minor = int(mask.sum())
        if n_minor == 0 or n_minor == mask.shape[0]:
            raise DegenerateDatasetError("both classes must be non-empty")
        if self.minority_label == self.majority_label:
            raise ParameterError("minority and majority labels must differ")
        if self.feature_names is not None and len(self.feature_names) != features.shape[1]:
            raise ParameterError("feature_names length does not match feature count")
        features.setflags(write=False)
        mask.setflags(write=False)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "minority_mask", mask)

    # -- basic shape ----------------------------------------------------

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def m(self) -> int:
        return self.features.shape[1]

    @property
    def minority_count(self) -> int:
        return int(self.minority_mask.sum())

    @property
    def majority_count(self) -> int:
        return self.n - self.minority_count

    @property
    def minority_indices(self) -> np.ndarray:
        return np.flatnonzero(self.minority_mask)

    @property
    def majority_indices(self) -> np.ndarray:
        return np.flatnonzero(~self.minority_mask)

    @property
    def imbalance_ratio(self) -> float:
        return self.minority_count / self.majority_count

    @property
    def labels(self) -> np.ndarray:
        return np.where(self.minority_mask, self.minority_label, self.majority_label)

    def partition(self) -> ClassPartition:
        return ClassPartition(
            minority_indices=self.minority_indices,
            majority_indices=self.majority_indices,
            imbalance_ratio=self.imbalance_ratio,
        )

    # -- derived datasets ------------------------------------------------

    def subset(self, indices) -> "Dataset":
        """New Dataset restricted to the given row indices (order preserved)."""
        idx = np.asarray(indices)
        if idx.dtype == bool:
            idx = np.flatnonzero(idx)
        return Dataset(
            features=self.features[idx],
            minority_mask=self.minority_mask[idx],
            minority_label=self.minority_label,
            majority_label=self.majority_label,
            feature_names=self.feature_names,
        )

    def with_minority_appended(self, points: np.ndarray) -> "Dataset":
        """New Dataset with the given rows appended as minority samples."""
        pts = np.asarray(points, dtype=np.float64)
        if pts.size == 0:
            return self
        if pts.ndim != 2 or pts.shape[1] != self.m:
            raise ParameterError(f"appended rows must have shape (k, {self.m})")
        return Dataset(
            features=np.vstack([self.features, pts]),
            minority_mask=np.concatenate([self.minority_mask, np.ones(len(pts), dtype=bool)]),
            minority_label=self.minority_label,
            majority_label=self.majority_label,
            feature_names=self.feature_names,
        )

    # -- construction ----------------------------------------------------

    @staticmethod
    def from_arrays(
        X,
        y,
        minority_label: str | None = None,
        feature_names: tuple[str, ...] | None = None,
    ) -> "Dataset":
        """Build a Dataset from a feature matrix and a label vector.

        With minority_label given, that class (possibly merged against all
        others) keeps the minority role even if it is the larger class.
        Without it, labels must already be binary and the smaller class
        becomes the minority (lexicographic tie-break).
        """
        X = check_feature_matrix(X)
        labels = np.asarray([str(v) for v in np.asarray(y).reshape(-1)])
        if labels.shape[0] != X.shape[0]:
            raise ParameterError("X and y have different lengths")
        distinct = sorted(set(labels.tolist()))
        if len(distinct) < 2:
            raise DegenerateDatasetError("labels contain a single class")

        if minority_label is not None:
            minority_label = str(minority_label)
            if minority_label not in distinct:
                raise ParameterError(f"minority label {minority_label!r} not present in labels")
            mask = labels == minority_label
            if len(distinct) == 2:
                majority_label = next(v for v in distinct if v != minority_label)
            else:
                majority_label = _merged_label(minority_label)
            return Dataset(X, mask, minority_label, majority_label, feature_names)

        if len(distinct) != 2:
            raise ParameterError(
                "labels have more than 2 classes; pass minority_label or use binarize_keep_smallest"
            )
        binary, chosen = binarize_keep_smallest(labels)
        majority_label = next(v for v in distinct if v != chosen)
        return Dataset(X, binary == chosen, chosen, majority_label, feature_names)


def _merged_label(minority_label: str) -> str:
    return MERGED_MAJORITY_LABEL if minority_label != MERGED_MAJORITY_LABEL else "other"


def binarize_keep_smallest(labels) -> tuple[np.ndarray, str]:
    """Keep the smallest-count class, merge all others.

    Returns the converted label vector and the minority label. Count ties are
    broken by lexicographic label order. Already-binary input with the
    smaller class as minority passes through unchanged (idempotent).
    """
    arr = np.asarray([str(v) for v in np.asarray(labels).reshape(-1)])
    if arr.size == 0:
        raise DegenerateDatasetError("empty label vector")
    counts = Counter(arr.tolist())
    if len(counts) < 2:
        raise DegenerateDatasetError("labels contain a single class")
    smallest = min(counts.values())
    minority = min(label for label, c in counts.items() if c == smallest)
    if len(counts) == 2:
        return arr.copy(), minority
    merged = _merged_label(minority)
    out = np.where(arr == minority, minority, merged)
    return out, minority


# -- CSV ingestion and export ------------------------------------------------


def _resolve_label_column(header: list[str], label_column) -> int:
    if label_column is None:
        return len(header) - 1
    if isinstance(label_column, int):
        idx = label_column if label_column >= 0 else len(header) + label_column
        if not 0 <= idx < len(header):
            raise ParameterError(f"label column index {label_column} out of range")
        return idx
    name = str(label_column)
    if name not in header:
        raise ParameterError(f"label column {name!r} not found in header {header}")
    return header.index(name)


def load_csv(
    path,
    label_column=None,
    minority_label: str | None = None,
    delimiter: str = ",",
) -> Dataset:
    """Load a UTF-8 CSV with a header row into a Dataset.

    The label column is selected by name or index (default: last column);
    every other column must parse as a finite float. Missing values are
    rejected, never imputed, so the data path stays bit-reproducible.
    """
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh, delimiter=delimiter))
    if not rows:
        raise ParseError(f"{path}: empty file")
    header = [c.strip() for c in rows[0]]
    if len(header) < 2:
        raise ParseError(f"{path}: need at least one feature column and one label column")
    data_rows = rows[1:]
    if not data_rows:
        raise ParseError(f"{path}: no data rows")

    label_idx = _resolve_label_column(header, label_column)
    feature_names = tuple(h for i, h in enumerate(header) if i != label_idx)

    features = np.empty((len(data_rows), len(header) - 1), dtype=np.float64)
    labels = []
    for r, row in enumerate(data_rows, start=2):  # 1-based file line numbers
        if len(row) != len(header):
            raise ParseError(f"{path}: line {r} has {len(row)} cells, expected {len(header)}")
        c_out = 0
        for c, cell in enumerate(row):
            cell = cell.strip()
            if c == label_idx:
                if cell == "":
                    raise ParseError(f"{path}: line {r}: missing label")
                labels.append(cell)
                continue
            if cell == "":
                raise ParseError(f"{path}: line {r}, column {header[c]!r}: missing value")
            try:
                value = float(cell)
            except ValueError:
                raise ParseError(
                    f"{path}: line {r}, column {header[c]!r}: non-numeric cell {cell!r}"
                ) from None
            if not np.isfinite(value):
                raise ParseError(f"{path}: line {r}, column {header[c]!r}: non-finite value")
            features[r - 2, c_out] = value
            c_out += 1

    labels = np.asarray(labels)
    distinct = sorted(set(labels.tolist()))
    if len(distinct) < 2:
        raise DegenerateDatasetError(f"{path}: all rows share the label {distinct[0]!r}")

    if minority_label is not None:
        ds = Dataset.from_arrays(features, labels, str(minority_label), feature_names)
        if ds.minority_count > ds.majority_count:
            # Ingestion keeps the invariant minority <= majority: swap roles.
            warnings.warn(
                f"declared minority class {minority_label!r} outnumbers the rest; "
                "roles swapped to keep minority <= majority",
                stacklevel=2,
            )
            ds = Dataset(
                ds.features,
                ~ds.minority_mask,
                minority_label=ds.majority_label,
                majority_label=ds.minority_label,
                feature_names=feature_names,
            )
        return ds

    binary, minority = binarize_keep_smallest(labels)
    majority = next(iter(sorted(set(binary.tolist()) - {minority})))
    return Dataset(features, binary == minority, minority, majority, feature_names)


def save_csv(d: Dataset, path, delimiter: str = ",") -> None:
    """Write a Dataset as UTF-8 CSV: feature columns then a final label column.

    Floats are written with shortest round-trip repr, so load_csv(save_csv(d))
    reproduces the matrix bit for bit.
    """
    names = d.feature_names or tuple(f"f{i}" for i in range(d.m))
    labels = d.labels
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, delimiter=delimiter)
        writer.writerow(list(names) + ["label"])
        for row, label in zip(d.features, labels):
            writer.writerow([repr(float(v)) for v in row] + [label])


# -- stratified folds ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FoldPlan:
    """Per-round fold assignments for repeated stratified cross-validation."""

    rounds: int
    folds: int
    assignments: np.ndarray  # shape (rounds, n), values in 0..folds-1
    seed: int

    def test_indices(self, round_idx: int, fold_idx: int) -> np.ndarray:
        return np.flatnonzero(self.assignments[round_idx] == fold_idx)

    def train_indices(self, round_idx: int, fold_idx: int) -> np.ndarray:
        return np.flatnonzero(self.assignments[round_idx] != fold_idx)


def stratified_folds(d: Dataset, rounds: int, folds: int, seed: int) -> FoldPlan:
    """Assign every sample to one test fold per round, stratified by class.

    Each class is shuffled and dealt round-robin; the majority deal continues
    at the position where the minority deal stopped, so total fold sizes
    differ by at most 1 and per-class counts by at most 1.
    """
    rounds = check_positive_int(rounds, "rounds")
    folds = check_positive_int(folds, "folds", minimum=2)
    seed = check_seed(seed, "seed")
    if folds > d.minority_count:
        raise InfeasibleStratificationError(
            f"{folds} folds requested but only {d.minority_count} minority samples available"
        )
    assignments = np.empty((rounds, d.n), dtype=np.int64)
    for r in range(rounds):
        rng = np.random.default_rng(derive_seed(seed, "stratified_folds", r))
        position = 0
        for class_indices in (d.minority_indices, d.majority_indices):
            order = rng.permutation(class_indices)
            for idx in order:
                assignments[r, idx] = position % folds
                position += 1
    assignments.setflags(write=False)
    return FoldPlan(rounds=rounds, folds=folds, assignments=assignments, seed=seed)


# -- fixtures and preprocessing ----------------------------------------------


def make_two_gaussian_fixture(
    n_major: int = 2000,
    n_minor: int = 400,
    separation: float = 3.0,
    seed: int = 0,
) -> Dataset:
    """Two overlapping isotropic Gaussians in 2-D.

    Minority cluster centered at the origin, majority at (separation, 0),
    both with unit spread. The default sizes give imbalance ratio 0.2 with
    visible core / border / overrun structure along the x axis.
    """
    n_major = check_positive_int(n_major, "n_major", minimum=2)
    n_minor = check_positive_int(n_minor, "n_minor", minimum=2)
    separation = float(separation)
    seed = check_seed(seed, "seed")
    rng = np.random.default_rng(seed)
    minority = rng.normal(loc=(0.0, 0.0), scale=1.0, size=(n_minor, 2))
    majority = rng.normal(loc=(separation, 0.0), scale=1.0, size=(n_major, 2))
    features = np.vstack([minority, majority])
    mask = np.zeros(n_minor + n_major, dtype=bool)
    mask[:n_minor] = True
    return Dataset(features, mask, feature_names=("x1", "x2"))


def minmax_scaled(d: Dataset) -> Dataset:
    """Rescale every feature column to [0, 1]; constant columns become 0."""
    lo = d.features.min(axis=0)
    hi = d.features.max(axis=0)
    span = hi - lo
    span[span == 0] = 1.0
    return Dataset(
        features=(d.features - lo) / span,
        minority_mask=d.minority_mask,
        minority_label=d.minority_label,
        majority_label=d.majority_label,
        feature_names=d.feature_names,
    )
