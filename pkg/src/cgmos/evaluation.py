"""Metrics, ROC/AUC, repeated stratified cross-validation, the k-sweep, and
the Wilcoxon signed-rank test.

Conventions fixed here:
  * the minority class is the positive class for ROC/AUC (AUC is symmetric
    under orientation flip of complementary scores, so nothing is lost);
  * precision or recall with an empty denominator is reported as 0 and the
    event is counted, so aggregates stay defined and honest;
  * aggregate metrics are unweighted means over completed rounds x folds,
    while the report's pooled ROC curve concatenates all test-fold scores;
  * oversampling happens strictly inside the training portion of each fold,
    with an RNG stream derived from (master seed, round, fold).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import erfc
from scipy.stats import rankdata
from sklearn.base import clone

from ._version import __version__
from .dataset import Dataset, FoldPlan, binarize_keep_smallest
from .errors import (
    DegenerateDatasetError,
    InfeasibleError,
    InsufficientDataError,
    ParameterError,
    ParseError,
    ZeroCertaintyError,
)
from .validation import derive_seed

__all__ = [
    "ConfusionCounts",
    "confusion",
    "PrecisionRecall",
    "precision_recall",
    "f_score",
    "g_score",
    "RocCurve",
    "roc_auc",
    "EvaluationReport",
    "cross_validate",
    "DEFAULT_K_GRID",
    "sweep_k_delta",
    "WilcoxonResult",
    "wilcoxon_signed_rank",
    "grade_score_file",
]


@dataclass(frozen=True)
class ConfusionCounts:
    """Standard 2x2 counts with "positive" being a designated class."""

    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def precision_undefined(self) -> bool:
        return self.tp + self.fp == 0

    @property
    def recall_undefined(self) -> bool:
        return self.tp + self.fn == 0


def confusion(labels, predictions, positive_class) -> ConfusionCounts:
    y = np.asarray(labels)
    p = np.asarray(predictions)
    if y.shape != p.shape or y.ndim != 1:
        raise ParameterError(f"labels {y.shape} and predictions {p.shape} must be equal-length vectors")
    actual = y == positive_class
    predicted = p == positive_class
    return ConfusionCounts(
        tp=int((actual & predicted).sum()),
        fp=int((~actual & predicted).sum()),
        tn=int((~actual & ~predicted).sum()),
        fn=int((actual & ~predicted).sum()),
    )


class PrecisionRecall(NamedTuple):
    precision: float
    recall: float


def precision_recall(c: ConfusionCounts) -> PrecisionRecall:
    """tp/(tp+fp) and tp/(tp+fn); an empty denominator yields 0.

    The 0/0 cases are detectable via c.precision_undefined / c.recall_undefined.
    """
    precision = 0.0 if c.precision_undefined else c.tp / (c.tp + c.fp)
    recall = 0.0 if c.recall_undefined else c.tp / (c.tp + c.fn)
    return PrecisionRecall(precision, recall)


def f_score(p: float, r: float, beta: float = 1.0) -> float:
    """(1+beta^2)*p*r / (beta^2*p + r), 0 when both inputs are 0."""
    if beta <= 0:
        raise ParameterError(f"beta must be > 0, got {beta}")
    denom = beta * beta * p + r
    if denom == 0.0:
        return 0.0
    return (1.0 + beta * beta) * p * r / denom


def g_score(p: float, r: float) -> float:
    """Geometric mean of precision and recall."""
    if p < 0 or r < 0:
        raise ParameterError("precision and recall must be nonnegative")
    return math.sqrt(p * r)


@dataclass(frozen=True, eq=False)
class RocCurve:
    """Threshold-swept operating points, (0,0) anchored, with trapezoid AUC.

    thresholds[i] is the score cutoff producing points[i] (predict positive at
    score >= threshold); the (0,0) anchor carries threshold +inf.
    """

    points: np.ndarray  # (k, 2): columns fp_rate, tp_rate; starts (0,0), ends (1,1)
    thresholds: np.ndarray  # (k,), descending, thresholds[0] = +inf
    auc: float


def roc_auc(labels, scores, positive_class) -> RocCurve:
    """ROC curve with tied scores grouped into single (diagonal) steps."""
    y = np.asarray(labels)
    s = np.asarray(scores, dtype=np.float64)
    if y.shape != s.shape or y.ndim != 1:
        raise ParameterError(f"labels {y.shape} and scores {s.shape} must be equal-length vectors")
    if not np.isfinite(s).all():
        raise ParameterError("scores contain non-finite values")
    pos = y == positive_class
    n_pos = int(pos.sum())
    n_neg = int(pos.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise DegenerateDatasetError(
            f"ROC needs both classes; positive class {positive_class!r} covers {n_pos} of {pos.size} samples"
        )
    order = np.argsort(-s, kind="stable")
    s_sorted = s[order]
    pos_sorted = pos[order]
    boundary = np.empty(s.size, dtype=bool)
    boundary[:-1] = s_sorted[:-1] != s_sorted[1:]
    boundary[-1] = True
    tpr = np.cumsum(pos_sorted)[boundary] / n_pos
    fpr = np.cumsum(~pos_sorted)[boundary] / n_neg
    points = np.vstack([[0.0, 0.0], np.column_stack([fpr, tpr])])
    thresholds = np.concatenate([[np.inf], s_sorted[boundary]])
    auc = float(np.trapezoid(points[:, 1], points[:, 0]))
    points.setflags(write=False)
    thresholds.setflags(write=False)
    return RocCurve(points=points, thresholds=thresholds, auc=auc)


def roc_to_dict(curve: RocCurve) -> dict:
    """JSON-ready form; the +inf anchor threshold becomes null."""
    return {
        "auc": curve.auc,
        "points": [[float(f), float(t)] for f, t in curve.points],
        "thresholds": [None if math.isinf(t) else float(t) for t in curve.thresholds],
    }


@dataclass(frozen=True, eq=False)
class EvaluationReport:
    """Cross-validation outcome: per-class metric means, AUC, pooled ROC.

    auc is the mean of per-fold AUCs over completed folds; roc is the pooled
    curve over all test-fold scores and carries its own (pooled) auc.
    """

    config: dict
    rounds: int
    folds: int
    minority_label: str
    majority_label: str
    n_samples: int
    n_features: int
    auc: float
    metrics: dict
    roc: RocCurve
    fold_records: list
    folds_completed: int
    folds_failed: int
    undefined_metric_count: int
    version: str = __version__

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "rounds": self.rounds,
            "folds": self.folds,
            "labels": {"minority": self.minority_label, "majority": self.majority_label},
            "n_samples": self.n_samples,
            "n_features": self.n_features,
            "auc": self.auc,
            "metrics": self.metrics,
            "roc": roc_to_dict(self.roc),
            "folds_detail": self.fold_records,
            "folds_completed": self.folds_completed,
            "folds_failed": self.folds_failed,
            "undefined_metric_count": self.undefined_metric_count,
            "version": self.version,
        }


def _class_metrics(c: ConfusionCounts) -> dict:
    p, r = precision_recall(c)
    return {
        "precision": p,
        "recall": r,
        "fscore": f_score(p, r),
        "gscore": g_score(p, r),
        "tp": c.tp,
        "fp": c.fp,
        "tn": c.tn,
        "fn": c.fn,
    }


_MEAN_KEYS = ("precision", "recall", "fscore", "gscore")


def cross_validate(
    d: Dataset,
    oversampler,
    classifier,
    plan: FoldPlan,
    master_seed: int = 0,
    config_echo: dict | None = None,
) -> EvaluationReport:
    """Repeated stratified cross-validation with train-only oversampling.

    Per fold: the training portion is oversampled (oversampler None means no
    oversampling, and the synthetic amount comes from the oversampler's own
    n_synthetic / k_factor against the fold's class gap), a clone of the
    classifier prototype is fitted on it, and the untouched test fold is
    scored. Folds where oversampling is infeasible are recorded as failed and
    excluded from the means. Metrics are computed twice, once per positive
    class orientation.
    """
    records: list[dict] = []
    fold_aucs: list[float] = []
    sums = {
        "minority": {k: 0.0 for k in _MEAN_KEYS},
        "majority": {k: 0.0 for k in _MEAN_KEYS},
    }
    pooled_scores: list[np.ndarray] = []
    pooled_labels: list[np.ndarray] = []
    undefined_count = 0
    completed = 0

    for r in range(plan.rounds):
        for f in range(plan.folds):
            test_idx = plan.test_indices(r, f)
            train_idx = plan.train_indices(r, f)
            train_ds = d.subset(train_idx)
            n_synthetic = 0
            if oversampler is not None:
                try:
                    n_synthetic = oversampler.resolve_n_synthetic(train_ds)
                    train_ds = oversampler.resample(
                        train_ds, n_synthetic, derive_seed(master_seed, "fold", r, f)
                    )
                except (InfeasibleError, DegenerateDatasetError, ZeroCertaintyError) as exc:
                    records.append(
                        {"round": r, "fold": f, "failed": True, "reason": str(exc)}
                    )
                    continue
            model = clone(classifier).fit_dataset(train_ds)
            X_test = d.features[test_idx]
            y_test = d.labels[test_idx]
            scores = model.score_minority(X_test)
            preds = model.predict(X_test)
            curve = roc_auc(y_test, scores, d.minority_label)
            record = {
                "round": r,
                "fold": f,
                "failed": False,
                "auc": curve.auc,
                "n_test": int(test_idx.size),
                "n_train": int(train_ds.n),
                "n_synthetic": int(n_synthetic),
            }
            for side, positive in (("minority", d.minority_label), ("majority", d.majority_label)):
                c = confusion(y_test, preds, positive)
                undefined_count += int(c.precision_undefined) + int(c.recall_undefined)
                block = _class_metrics(c)
                record[side] = block
                for k in _MEAN_KEYS:
                    sums[side][k] += block[k]
            records.append(record)
            fold_aucs.append(curve.auc)
            pooled_scores.append(scores)
            pooled_labels.append(y_test)
            completed += 1

    if completed == 0:
        raise InsufficientDataError("every fold failed; nothing to aggregate")

    pooled_curve = roc_auc(
        np.concatenate(pooled_labels), np.concatenate(pooled_scores), d.minority_label
    )
    means = {
        side: {k: sums[side][k] / completed for k in _MEAN_KEYS} for side in ("minority", "majority")
    }
    return EvaluationReport(
        config=dict(config_echo) if config_echo else {},
        rounds=plan.rounds,
        folds=plan.folds,
        minority_label=d.minority_label,
        majority_label=d.majority_label,
        n_samples=d.n,
        n_features=d.m,
        auc=float(np.mean(fold_aucs)),
        metrics=means,
        roc=pooled_curve,
        fold_records=records,
        folds_completed=completed,
        folds_failed=plan.rounds * plan.folds - completed,
        undefined_metric_count=undefined_count,
    )


DEFAULT_K_GRID = tuple(0.5 * i for i in range(1, 11))  # 0.5, 1.0, ..., 5.0


def sweep_k_delta(
    d: Dataset,
    samplers: dict,
    classifier,
    plan: FoldPlan,
    k_values=None,
    master_seed: int = 0,
) -> list[dict]:
    """Mean AUC per (method, k), synthesizing round(k * class gap) per fold.

    samplers maps method name to an oversampler prototype (None = no
    oversampling, reported once per k unchanged so curves stay comparable).
    All methods share the fold plan and master seed, so rows are paired.
    """
    if d.majority_count <= d.minority_count:
        raise ParameterError("k sweep needs a class gap (majority must outnumber minority)")
    ks = [float(k) for k in (DEFAULT_K_GRID if k_values is None else k_values)]
    if not ks:
        raise ParameterError("k_values is empty")
    if any(k < 0 for k in ks):
        raise ParameterError("k values must be >= 0")
    rows = []
    for name, prototype in samplers.items():
        for k in ks:
            if prototype is None or k == 0.0:
                sampler = None if prototype is None else clone(prototype).set_params(
                    n_synthetic=0
                )
            else:
                sampler = clone(prototype).set_params(n_synthetic=None, k_factor=k)
            report = cross_validate(d, sampler, classifier, plan, master_seed=master_seed)
            rows.append({"method": name, "k": k, "auc": report.auc})
    return rows


class WilcoxonResult(NamedTuple):
    statistic: float  # min(W+, W-) over signed average ranks
    p_value: float  # two-sided
    n_used: int  # pairs remaining after zero differences are dropped
    method: str  # "exact" or "approx"


def wilcoxon_signed_rank(a, b, method: str = "auto") -> WilcoxonResult:
    """Two-sided Wilcoxon signed-rank test on paired values.

    Zero differences are dropped; ties get average ranks. With n <= 20
    nonzero pairs (or method="exact") the p-value enumerates the exact
    distribution of W+ over all 2^n sign assignments:
    p = P(W+ <= min(W+,W-)) + P(W+ >= max(W+,W-)), capped at 1. Otherwise a
    normal approximation with tie-corrected variance and a 0.5 continuity
    correction is used.
    """
    if method not in ("auto", "exact", "approx"):
        raise ParameterError(f"method must be auto, exact, or approx, got {method!r}")
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ParameterError(f"paired vectors must have equal 1-d shapes, got {a.shape} and {b.shape}")
    if not (np.isfinite(a).all() and np.isfinite(b).all()):
        raise ParameterError("paired values contain non-finite entries")
    diffs = a - b
    diffs = diffs[diffs != 0.0]
    n = int(diffs.size)
    if n < 5:
        raise InsufficientDataError(f"need at least 5 nonzero differences, got {n}")
    absd = np.abs(diffs)
    ranks = rankdata(absd)
    w_plus = float(ranks[diffs > 0].sum())
    total = n * (n + 1) / 2.0
    w_minus = total - w_plus
    statistic = min(w_plus, w_minus)
    chosen = method if method != "auto" else ("exact" if n <= 20 else "approx")

    if chosen == "exact":
        # Average ranks are multiples of 1/2, so doubled ranks are integers
        # and the distribution of 2*W+ lives on 0..sum(2*ranks).
        r2 = np.rint(2.0 * ranks).astype(np.int64)
        s2 = int(r2.sum())
        dp = np.zeros(s2 + 1)
        dp[0] = 1.0
        for r in r2:
            ndp = dp.copy()
            ndp[r:] += dp[: s2 + 1 - r]
            dp = ndp
        w2 = int(np.rint(2.0 * statistic))
        p = (dp[: w2 + 1].sum() + dp[s2 - w2 :].sum()) / 2.0**n
    else:
        tie_sizes = np.unique(absd, return_counts=True)[1].astype(np.float64)
        variance = n * (n + 1) * (2 * n + 1) / 24.0 - float((tie_sizes**3 - tie_sizes).sum()) / 48.0
        centered = w_plus - total / 2.0
        if centered > 0:
            centered -= 0.5
        elif centered < 0:
            centered += 0.5
        z = centered / math.sqrt(variance)
        p = float(erfc(abs(z) / math.sqrt(2.0)))
    return WilcoxonResult(float(statistic), min(1.0, float(p)), n, chosen)


def grade_score_file(path) -> dict:
    """Grade an external classifier's scores from a (row_id, score, label) CSV.

    The smaller-count label is treated as minority (lexicographic tie-break),
    scores are read as the minority probability, and hard predictions use the
    same score > 0.5 rule as the in-repo classifiers.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        required = ("row_id", "score", "label")
        if sorted(header) != sorted(required):
            raise ParseError(f"{path}: header must be exactly {list(required)}, got {header}")
        col = {name: header.index(name) for name in required}
        scores = []
        labels = []
        for r, row in enumerate(reader, start=2):
            if len(row) != 3:
                raise ParseError(f"{path}: line {r} has {len(row)} cells, expected 3")
            raw_score = row[col["score"]].strip()
            try:
                value = float(raw_score)
            except ValueError:
                raise ParseError(f"{path}: line {r}: non-numeric score {raw_score!r}") from None
            if not math.isfinite(value):
                raise ParseError(f"{path}: line {r}: non-finite score")
            label = row[col["label"]].strip()
            if not label:
                raise ParseError(f"{path}: line {r}: missing label")
            scores.append(value)
            labels.append(label)
    if not scores:
        raise ParseError(f"{path}: no data rows")
    labels_arr, minority = binarize_keep_smallest(labels)
    majority = next(l for l in np.unique(labels_arr) if l != minority)
    scores_arr = np.asarray(scores)
    curve = roc_auc(labels_arr, scores_arr, minority)
    preds = np.where(scores_arr > 0.5, minority, majority)
    out = {
        "n": len(scores),
        "minority_label": str(minority),
        "majority_label": str(majority),
        "auc": curve.auc,
    }
    undefined = 0
    for side, positive in (("minority", minority), ("majority", majority)):
        c = confusion(labels_arr, preds, positive)
        undefined += int(c.precision_undefined) + int(c.recall_undefined)
        out[side] = _class_metrics(c)
    out["undefined_metric_count"] = undefined
    return out
