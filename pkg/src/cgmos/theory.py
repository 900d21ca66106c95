"""Executable verification of the sampling theory.

Checks, per dataset:
  * ratio identity: the addition likelihood ratio r equals 1 + R entrywise,
    where R is the relative certainty change used by the weighting           (<= 1e-12)
  * gain identity: the average gain of inserting at x_i equals its weight    (<= 1e-10)
  * Cauchy-Schwarz floor: sum(W^2) >= z^2 / n                                (margin >= -1e-12)
  * expected-gain bound: certainty-weighted seeding never loses to uniform
    seeding in expected average gain, strictly when weights are non-constant
  * both algebraic forms of each expectation agree                           (<= 1e-10)

The ratio path (after/before division) deliberately shares no arithmetic
with the weighting path (relative change plus one), so the identities are
genuine cross-checks rather than tautologies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._version import __version__
from .dataset import Dataset, make_two_gaussian_fixture
from .density import DEFAULT_Q, DEFAULT_SIGMA, DensityModel, certainty_profile, fit, insert_minority_whatif, insert_minority_whatif_at
from .errors import ParameterError, ZeroCertaintyError
from .sampling import WeightTable, compute_weights, relative_certainty_change
from .validation import check_positive_int, check_seed, derive_seed

__all__ = [
    "RATIO_IDENTITY_TOL",
    "GAIN_IDENTITY_TOL",
    "GAIN_BOUND_TOL",
    "FORMS_TOL",
    "ExpectedGains",
    "GainReport",
    "addition_likelihood_ratio",
    "average_gain",
    "average_gain_at",
    "expected_gains",
    "verify_weight_floor",
    "gain_report",
    "report_failures",
    "random_verification_dataset",
    "run_verification",
]

RATIO_IDENTITY_TOL = 1e-12
GAIN_IDENTITY_TOL = 1e-10
GAIN_BOUND_TOL = 1e-12
FORMS_TOL = 1e-10


def _before_posteriors(model: DensityModel, d: Dataset) -> np.ndarray:
    before = certainty_profile(model, d).posteriors
    if (before <= 0.0).any():
        raise ZeroCertaintyError(
            "some sample has zero certainty for its own label; ratios are undefined"
        )
    return before


def addition_likelihood_ratio(model: DensityModel, i: int, d: Dataset) -> np.ndarray:
    """Per-sample ratio of own-label posteriors after/before inserting a
    minority duplicate of x_i. Pure division; no shared arithmetic with the
    relative-change weighting path."""
    before = _before_posteriors(model, d)
    after = insert_minority_whatif(model, i, d).posteriors
    return after / before


def average_gain(ratios) -> float:
    """Mean of the per-sample ratios."""
    r = np.asarray(ratios, dtype=np.float64)
    if r.ndim != 1 or r.size == 0:
        raise ParameterError("ratios must be a non-empty vector")
    if not np.isfinite(r).all():
        raise ParameterError("ratios contain non-finite values")
    return float(r.mean())


def average_gain_at(model: DensityModel, x, d: Dataset, bandwidth: float | None = None) -> float:
    """Average gain of inserting a minority sample at an arbitrary location."""
    before = _before_posteriors(model, d)
    after = insert_minority_whatif_at(model, x, d, bandwidth=bandwidth).posteriors
    return average_gain(after / before)


@dataclass(frozen=True)
class ExpectedGains:
    """Expected average gain under weighted vs uniform seed draws.

    e_p / e_s are the expectation forms (gains against seed probabilities,
    plain mean of gains); the closed forms rely on the gain identity and are
    carried separately so a forced-fault table shows up as a form mismatch
    rather than being silently absorbed.
    """

    e_p: float  # sum_i gain_i * W_i / z
    e_s: float  # mean_i gain_i
    e_p_closed: float  # sum(W^2) / z
    e_s_closed: float  # z / n


def expected_gains(table: WeightTable, gains) -> ExpectedGains:
    g = np.asarray(gains, dtype=np.float64)
    w = table.weights
    if g.shape != w.shape:
        raise ParameterError(f"gains {g.shape} and weights {w.shape} must have equal length")
    if table.normalizer <= 0.0:
        raise ParameterError("weight table sums to zero; expectations are undefined")
    z = table.normalizer
    return ExpectedGains(
        e_p=float(g @ table.probabilities),
        e_s=float(g.mean()),
        e_p_closed=float((w @ w) / z),
        e_s_closed=float(z / w.size),
    )


def verify_weight_floor(weights) -> tuple[bool, float]:
    """Cauchy-Schwarz floor sum(W^2) >= z^2/n; returns (holds, margin)."""
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or w.size == 0:
        raise ParameterError("weights must be a non-empty vector")
    if not np.isfinite(w).all():
        raise ParameterError("weights contain non-finite values")
    if (w < 0.0).any():
        raise ParameterError("weights must be nonnegative")
    z = float(w.sum())
    margin = float(w @ w - z * z / w.size)
    return margin >= -GAIN_BOUND_TOL, margin


@dataclass(frozen=True, eq=False)
class GainReport:
    """Identity residuals and expected-gain comparison for one dataset."""

    n: int
    m: int
    n_minority: int
    gains: np.ndarray  # (n,) average gain per insertion location
    weights: np.ndarray  # (n,) production weights
    expected: ExpectedGains
    floor_margin: float
    ratio_identity_max_residual: float  # max |r - 1 - R|
    gain_identity_max_residual: float  # max |mean r - W|
    centered_gap: float  # sum((W - mean W)^2) / z, exact e_p - e_s rearranged
    strict_required: bool  # weights non-constant, so the bound must be strict
    weight_zero_count: int
    fallback_count: int


def gain_report(d: Dataset, q: int = DEFAULT_Q, sigma: float = DEFAULT_SIGMA) -> GainReport:
    """Run every check against one dataset and collect the residuals."""
    model = fit(d, q, sigma)
    table = compute_weights(model, d)
    before_profile = certainty_profile(model, d)
    before = _before_posteriors(model, d)
    gains = np.empty(d.n)
    ratio_max = 0.0
    for i in range(d.n):
        after_profile = insert_minority_whatif(model, i, d)
        ratios = after_profile.posteriors / before
        changes = relative_certainty_change(before_profile, after_profile)
        ratio_max = max(ratio_max, float(np.abs(ratios - 1.0 - changes).max()))
        gains[i] = average_gain(ratios)
    gain_max = float(np.abs(gains - table.weights).max())
    expected = expected_gains(table, gains)
    _, floor_margin = verify_weight_floor(table.weights)
    w = table.weights
    centered_gap = float(((w - w.mean()) ** 2).sum() / table.normalizer)
    gains.setflags(write=False)
    return GainReport(
        n=d.n,
        m=d.m,
        n_minority=d.minority_count,
        gains=gains,
        weights=w,
        expected=expected,
        floor_margin=floor_margin,
        ratio_identity_max_residual=ratio_max,
        gain_identity_max_residual=gain_max,
        centered_gap=centered_gap,
        strict_required=bool(np.ptp(w) > 0.0),
        weight_zero_count=int((w == 0.0).sum()),
        fallback_count=before_profile.fallback_count,
    )


def report_failures(rep: GainReport) -> list[str]:
    """Names of the checks a report violates; empty means all pass."""
    failures = []
    if rep.ratio_identity_max_residual > RATIO_IDENTITY_TOL:
        failures.append("ratio_identity")
    if rep.gain_identity_max_residual > GAIN_IDENTITY_TOL:
        failures.append("gain_identity")
    if rep.floor_margin < -GAIN_BOUND_TOL:
        failures.append("cauchy_schwarz_floor")
    if rep.expected.e_p < rep.expected.e_s - GAIN_BOUND_TOL:
        failures.append("expected_gain_bound")
    if rep.strict_required and not rep.centered_gap > 0.0:
        failures.append("strictness")
    if abs(rep.expected.e_p - rep.expected.e_p_closed) > FORMS_TOL:
        failures.append("e_p_forms")
    if abs(rep.expected.e_s - rep.expected.e_s_closed) > FORMS_TOL:
        failures.append("e_s_forms")
    return failures


def random_verification_dataset(index: int, seed: int = 0) -> Dataset:
    """Two randomly placed Gaussian blobs with randomized size, dimension,
    imbalance, spread, and separation. Minority rows come first."""
    rng = np.random.default_rng(derive_seed(check_seed(seed), "dataset", int(index)))
    n = int(rng.integers(10, 201))
    m = int(rng.integers(1, 6))
    ratio = float(rng.uniform(0.05, 0.9))
    n_minority = int(np.clip(round(n * ratio / (1.0 + ratio)), 2, n // 2))
    n_majority = n - n_minority
    direction = rng.normal(size=m)
    norm = float(np.linalg.norm(direction))
    direction = direction / norm if norm > 0 else np.ones(m) / np.sqrt(m)
    offset = float(rng.uniform(0.0, 4.0)) * direction
    scale_minority, scale_majority = rng.uniform(0.5, 2.0, size=2)
    features = np.vstack(
        [
            rng.normal(size=(n_minority, m)) * scale_minority,
            rng.normal(size=(n_majority, m)) * scale_majority + offset,
        ]
    )
    mask = np.zeros(n, dtype=bool)
    mask[:n_minority] = True
    return Dataset(features=features, minority_mask=mask)


def run_verification(
    n_datasets: int = 100,
    q: int = DEFAULT_Q,
    sigma: float = DEFAULT_SIGMA,
    seed: int = 0,
    include_fixture: bool = True,
) -> dict:
    """Run the full check battery and emit a JSON-ready certificate."""
    check_positive_int(n_datasets, "n_datasets")
    entries = [
        (f"random-{i:03d}", random_verification_dataset(i, seed)) for i in range(n_datasets)
    ]
    if include_fixture:
        entries.append(("two-gaussian-fixture", make_two_gaussian_fixture()))
    records = []
    all_failures: list[str] = []
    summary = {
        "ratio_identity_max_residual": 0.0,
        "gain_identity_max_residual": 0.0,
        "forms_max_residual": 0.0,
        "expected_gain_min_margin": np.inf,
        "floor_min_margin": np.inf,
        "weight_zero_count": 0,
    }
    for name, d in entries:
        rep = gain_report(d, q, sigma)
        failures = report_failures(rep)
        records.append(
            {
                "name": name,
                "n": rep.n,
                "m": rep.m,
                "n_minority": rep.n_minority,
                "e_p": rep.expected.e_p,
                "e_s": rep.expected.e_s,
                "e_p_closed": rep.expected.e_p_closed,
                "e_s_closed": rep.expected.e_s_closed,
                "margin": rep.expected.e_p - rep.expected.e_s,
                "centered_gap": rep.centered_gap,
                "strict_required": rep.strict_required,
                "floor_margin": rep.floor_margin,
                "ratio_identity_max_residual": rep.ratio_identity_max_residual,
                "gain_identity_max_residual": rep.gain_identity_max_residual,
                "weight_zero_count": rep.weight_zero_count,
                "fallback_count": rep.fallback_count,
                "failures": failures,
            }
        )
        all_failures.extend(f"{name}:{f}" for f in failures)
        summary["ratio_identity_max_residual"] = max(
            summary["ratio_identity_max_residual"], rep.ratio_identity_max_residual
        )
        summary["gain_identity_max_residual"] = max(
            summary["gain_identity_max_residual"], rep.gain_identity_max_residual
        )
        summary["forms_max_residual"] = max(
            summary["forms_max_residual"],
            abs(rep.expected.e_p - rep.expected.e_p_closed),
            abs(rep.expected.e_s - rep.expected.e_s_closed),
        )
        summary["expected_gain_min_margin"] = min(
            summary["expected_gain_min_margin"], rep.expected.e_p - rep.expected.e_s
        )
        summary["floor_min_margin"] = min(summary["floor_min_margin"], rep.floor_margin)
        summary["weight_zero_count"] += rep.weight_zero_count
    summary["expected_gain_min_margin"] = float(summary["expected_gain_min_margin"])
    summary["floor_min_margin"] = float(summary["floor_min_margin"])
    return {
        "params": {
            "n_datasets": n_datasets,
            "q": q,
            "sigma": float(sigma),
            "seed": seed,
            "include_fixture": include_fixture,
        },
        "tolerances": {
            "ratio_identity": RATIO_IDENTITY_TOL,
            "gain_identity": GAIN_IDENTITY_TOL,
            "expected_gain_bound": GAIN_BOUND_TOL,
            "forms": FORMS_TOL,
        },
        "datasets": records,
        "summary": summary,
        "failures": all_failures,
        "passed": not all_failures,
        "version": __version__,
    }
