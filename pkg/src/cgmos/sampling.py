"""Certainty guided minority oversampling.

Seed-selection weights come from hypothetical insertions: for each candidate
location x_i, insert one minority sample there, measure every sample's
relative certainty change R, and set W(x_i) = 1 + mean(R). Seeds are then
drawn with probability W/z and a synthetic point is interpolated between the
seed and one of its k nearest minority neighbors, as in SMOTE. Weights are
computed once per run (one-step synthesis); an optional refresh mode
recomputes them in ten installments for experimentation.

Every candidate in the full dataset gets a weight by default, majority
samples included; interpolation partners are always minority, so synthetic
points remain plausible minority samples even for majority seeds. A
minority_only seed pool is available for ablation.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import density
from .base import BaseOverSampler
from .dataset import Dataset
from .density import DensityModel, CertaintyProfile
from .errors import InfeasibleSynthesisError, ParameterError, ZeroCertaintyError
from .validation import check_positive_int, check_seed, derive_seed

__all__ = [
    "WeightTable",
    "SynthesisConfig",
    "SyntheticBatch",
    "relative_certainty_change",
    "compute_weights",
    "draw_seeds",
    "synthesize",
    "oversample",
    "CGMOS",
    "SEED_POOLS",
]

SEED_POOLS = ("all_samples", "minority_only")


@dataclass(frozen=True, eq=False)
class WeightTable:
    """Seed-selection weights with their normalized distribution.

    `weights` has one entry per dataset row; rows outside the seed pool hold
    0 and are never drawn. `pool` records the candidate indices so degenerate
    fallbacks stay inside the pool.
    """

    weights: np.ndarray
    normalizer: float
    probabilities: np.ndarray
    pool: np.ndarray

    @staticmethod
    def from_weights(weights: np.ndarray, pool: np.ndarray | None = None) -> "WeightTable":
        w = np.asarray(weights, dtype=np.float64)
        if w.ndim != 1:
            raise ParameterError("weights must be a vector")
        if not np.isfinite(w).all() or (w < 0).any():
            raise ParameterError("weights must be finite and nonnegative")
        pool = np.arange(w.shape[0]) if pool is None else np.asarray(pool, dtype=np.int64)
        z = float(w.sum())
        probabilities = w / z if z > 0 else np.zeros_like(w)
        return WeightTable(weights=w, normalizer=z, probabilities=probabilities, pool=pool)


@dataclass(frozen=True)
class SynthesisConfig:
    """Parameters of one oversampling run."""

    n_synthetic: int
    k_interp: int = 5
    refresh_weights: bool = False
    seed_pool: str = "all_samples"
    rng_seed: int = 0

    def __post_init__(self):
        if int(self.n_synthetic) < 0:
            raise ParameterError(f"n_synthetic must be >= 0, got {self.n_synthetic}")
        check_positive_int(self.k_interp, "k_interp")
        if self.seed_pool not in SEED_POOLS:
            raise ParameterError(f"seed_pool must be one of {SEED_POOLS}, got {self.seed_pool!r}")
        check_seed(self.rng_seed)


@dataclass(frozen=True, eq=False)
class SyntheticBatch:
    """Synthetic minority points plus the seed index each one grew from."""

    points: np.ndarray  # (n_synthetic, m)
    seed_indices: np.ndarray  # (n_synthetic,)


def relative_certainty_change(before: CertaintyProfile, after: CertaintyProfile) -> np.ndarray:
    """Entry-wise (after - before) / before.

    A zero before-certainty cannot happen while the density model's prior
    fallback and self terms are active; hitting one means the density state
    is corrupt, so it raises rather than returning an infinity.
    """
    b = np.asarray(before.posteriors, dtype=np.float64)
    a = np.asarray(after.posteriors, dtype=np.float64)
    if a.shape != b.shape:
        raise ParameterError(f"profile lengths differ: {b.shape} vs {a.shape}")
    if (b <= 0).any():
        raise ZeroCertaintyError("certainty of 0 in the before profile")
    return (a - b) / b


def _weight_from_changes(changes: np.ndarray) -> float:
    """One plus the mean relative certainty change; exact 1.0 for all zeros."""
    return 1.0 + float(np.mean(changes))


def compute_weights(
    model: DensityModel,
    d: Dataset,
    seed_pool: str = "all_samples",
) -> WeightTable:
    """Hypothetical-insertion weight for every candidate seed location.

    W(x_i) = 1 + mean_j R_{+i}, where R_{+i} is the relative certainty change
    profile caused by inserting a minority sample at x_i. Entries outside the
    requested pool stay 0 and are excluded from the distribution.
    """
    if seed_pool not in SEED_POOLS:
        raise ParameterError(f"seed_pool must be one of {SEED_POOLS}, got {seed_pool!r}")
    pool = np.arange(d.n) if seed_pool == "all_samples" else d.minority_indices
    before = density.certainty_profile(model, d)
    weights = np.zeros(d.n)
    for i in pool:
        after = density.insert_minority_whatif(model, int(i), d)
        changes = relative_certainty_change(before, after)
        weights[i] = _weight_from_changes(changes)
    # mean(R) >= -1 entry-wise, so weights are nonnegative up to rounding
    np.maximum(weights, 0.0, out=weights)
    return WeightTable.from_weights(weights, pool)


def draw_seeds(table: WeightTable, count: int, rng_seed: int) -> np.ndarray:
    """Draw seed indices i.i.d. with replacement from the weight distribution.

    Inverse-CDF over the fixed index order, so results are reproducible from
    the seed alone. An all-zero table falls back to uniform draws over the
    pool, with a warning.
    """
    count = int(count)
    if count < 0:
        raise ParameterError(f"count must be >= 0, got {count}")
    rng = np.random.default_rng(check_seed(rng_seed))
    if count == 0:
        return np.empty(0, dtype=np.int64)
    if table.normalizer > 0:
        cum = np.cumsum(table.probabilities)
        u = rng.random(count) * cum[-1]
        idx = np.searchsorted(cum, u, side="right")
        return np.minimum(idx, table.probabilities.shape[0] - 1).astype(np.int64)
    warnings.warn("all seed weights are zero; falling back to uniform selection", stacklevel=2)
    return np.asarray(table.pool, dtype=np.int64)[rng.integers(0, len(table.pool), count)]


def _minority_neighbor_cache(d: Dataset, k_interp: int):
    """Lazy per-seed lookup of the k nearest minority neighbors.

    The seed itself is excluded when it is a minority sample; distance ties
    break by index order (stable sort over the minority index list).
    """
    minority = d.minority_indices
    cache: dict[int, np.ndarray] = {}

    def neighbors(s: int) -> np.ndarray:
        got = cache.get(s)
        if got is None:
            dist = np.linalg.norm(d.features[minority] - d.features[s], axis=1)
            ordered = minority[np.argsort(dist, kind="stable")]
            got = ordered[ordered != s][:k_interp]
            cache[s] = got
        return got

    return neighbors


def synthesize(
    d: Dataset,
    seeds,
    cfg: SynthesisConfig,
    rng_seed: int,
) -> SyntheticBatch:
    """Interpolate one synthetic minority point per seed.

    For seed s: pick v uniformly among the k_interp nearest minority
    neighbors of x_s (excluding x_s itself), draw u ~ Uniform(0,1), and emit
    x_s + u*(x_v - x_s). Per seed, the neighbor draw precedes the u draw in
    the RNG stream; seeds are processed in the given order.
    """
    seeds = np.asarray(seeds, dtype=np.int64)
    if seeds.ndim != 1:
        raise ParameterError("seeds must be a flat index list")
    if seeds.size and (seeds.min() < 0 or seeds.max() >= d.n):
        raise ParameterError("seed index out of range")
    k = cfg.k_interp
    any_minority_seed = bool(d.minority_mask[seeds].any()) if seeds.size else False
    needed = k + 1 if any_minority_seed else k
    if seeds.size and d.minority_count < needed:
        raise InfeasibleSynthesisError(
            f"{d.minority_count} minority samples cannot supply {k} interpolation "
            f"neighbors{' (seed excluded)' if any_minority_seed else ''}"
        )
    rng = np.random.default_rng(check_seed(rng_seed))
    neighbors = _minority_neighbor_cache(d, k)
    points = np.empty((seeds.size, d.m))
    for row, s in enumerate(seeds):
        cand = neighbors(int(s))
        v = cand[rng.integers(0, len(cand))]
        u = rng.random()
        points[row] = d.features[s] + u * (d.features[v] - d.features[s])
    return SyntheticBatch(points=points, seed_indices=seeds.copy())


def oversample(
    d: Dataset,
    cfg: SynthesisConfig,
    q: int = density.DEFAULT_Q,
    sigma: float = density.DEFAULT_SIGMA,
) -> Dataset:
    """Full pipeline: fit density, weight seeds, draw, synthesize, append.

    Weights are computed once over the input dataset (one-step synthesis).
    With refresh_weights, the batch is split into ten installments and the
    density model and weights are refitted on the growing dataset between
    installments.
    """
    if cfg.n_synthetic == 0:
        return d
    if cfg.refresh_weights:
        chunk = math.ceil(cfg.n_synthetic / 10)
        batches = [chunk] * (cfg.n_synthetic // chunk)
        if cfg.n_synthetic % chunk:
            batches.append(cfg.n_synthetic % chunk)
    else:
        batches = [cfg.n_synthetic]
    current = d
    for b, count in enumerate(batches):
        model = density.fit(current, q, sigma)
        table = compute_weights(model, current, cfg.seed_pool)
        seeds = draw_seeds(table, count, derive_seed(cfg.rng_seed, "draw", b))
        batch = synthesize(current, seeds, cfg, derive_seed(cfg.rng_seed, "synth", b))
        current = current.with_minority_appended(batch.points)
    return current


class CGMOS(BaseOverSampler):
    """Certainty guided minority oversampler (estimator shell).

    Parameters mirror SynthesisConfig plus the density hyperparameters q and
    sigma. `n_synthetic=None` resolves to k_factor times the majority gap of
    whatever dataset is being resampled.
    """

    def __init__(
        self,
        n_synthetic: int | None = None,
        k_factor: float | None = 1.0,
        q: int = density.DEFAULT_Q,
        sigma: float = density.DEFAULT_SIGMA,
        k_interp: int = 5,
        seed_pool: str = "all_samples",
        refresh_weights: bool = False,
        minority_label: str | None = None,
        random_state: int = 0,
    ):
        self.n_synthetic = n_synthetic
        self.k_factor = k_factor
        self.q = q
        self.sigma = sigma
        self.k_interp = k_interp
        self.seed_pool = seed_pool
        self.refresh_weights = refresh_weights
        self.minority_label = minority_label
        self.random_state = random_state

    def _resample(self, d: Dataset, n_synthetic: int, rng_seed: int) -> Dataset:
        cfg = SynthesisConfig(
            n_synthetic=n_synthetic,
            k_interp=self.k_interp,
            refresh_weights=self.refresh_weights,
            seed_pool=self.seed_pool,
            rng_seed=rng_seed,
        )
        return oversample(d, cfg, q=self.q, sigma=self.sigma)

    def seed_weight_table(self, d: Dataset) -> WeightTable:
        model = density.fit(d, self.q, self.sigma)
        return compute_weights(model, d, self.seed_pool)
