"""Adaptive-bandwidth Gaussian KDE with Bayes posteriors and what-if insertion.

The model is fitted once and then frozen: per-sample bandwidths, per-class
kernel sums, and class counts. Hypothetically inserting one minority sample
is then an O(n*m) update (one kernel row added to the minority sums, class
counts bumped), which is what makes the certainty-change weighting affordable.

Conventions, all deliberate:
  * the bandwidth belongs to the SOURCE sample (the kernel center), so the
    contribution of x_k at x_j is h_k^-m * (2*pi)^(-m/2) * exp(-|x_j-x_k|^2/(2*h_k^2));
  * bandwidths are sigma times the mean distance to the q nearest neighbors,
    drawn from the full dataset (both classes) with the sample itself excluded;
  * the self term k = j is included in the kernel sums (configurable);
  * class-conditional likelihoods divide by the class count, priors are the
    empirical class fractions, and the posterior is their normalized product;
  * if both likelihoods underflow to zero the posterior falls back to the
    priors, and the occurrence is counted and logged.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .dataset import Dataset
from .errors import ParameterError
from .validation import check_feature_vector, check_positive_int, check_positive_real

__all__ = [
    "DensityModel",
    "CertaintyProfile",
    "compute_bandwidths",
    "fit",
    "posterior",
    "posteriors",
    "certainty_profile",
    "insert_minority_whatif",
    "insert_minority_whatif_at",
    "bandwidth_at",
    "query_class_sums",
]

logger = logging.getLogger(__name__)

DEFAULT_Q = 5
DEFAULT_SIGMA = 1.0

# Kernel-row blocks are capped at this many float64 entries (~32 MB).
_CHUNK_ENTRIES = 4_000_000


@dataclass(frozen=True, eq=False)
class DensityModel:
    """Frozen KDE state: bandwidths, per-class kernel sums, class counts."""

    bandwidths: np.ndarray  # (n,), all > 0
    kernel_sums: np.ndarray  # (n, 2): column 0 majority, column 1 minority
    class_counts: tuple[int, int]  # (n_majority, n_minority)
    q: int
    sigma: float
    include_self: bool = True

    @property
    def n(self) -> int:
        return self.kernel_sums.shape[0]


@dataclass(frozen=True, eq=False)
class CertaintyProfile:
    """Posterior probability of each sample's own (ground-truth) label."""

    posteriors: np.ndarray  # (n,), entries in [0, 1]
    fallback_count: int = 0  # samples where both likelihoods underflowed


def _kernel_rows(sources: np.ndarray, h: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """out[k, j] = normalized Gaussian kernel of source k evaluated at target j."""
    m = sources.shape[1]
    d2 = cdist(sources, targets, "sqeuclidean")
    norm = (2.0 * np.pi) ** (-m / 2.0) * h ** (-float(m))
    return norm[:, None] * np.exp(-d2 / (2.0 * h[:, None] ** 2))


def _source_chunks(n_sources: int, n_targets: int):
    step = max(1, _CHUNK_ENTRIES // max(1, n_targets))
    for start in range(0, n_sources, step):
        yield start, min(start + step, n_sources)


def compute_bandwidths(d: Dataset, q: int = DEFAULT_Q, sigma: float = DEFAULT_SIGMA) -> np.ndarray:
    """Per-sample bandwidth: sigma times the mean distance to the q nearest
    neighbors in the full dataset, self excluded.

    A sample whose q nearest neighbors all coincide with it would get h = 0;
    those entries are floored at 1e-9 times the dataset diameter (or at 1e-9
    when the whole dataset is a single point) so the kernel stays defined.
    """
    q = check_positive_int(q, "q")
    sigma = check_positive_real(sigma, "sigma")
    if q > d.n - 1:
        raise ParameterError(f"q={q} needs at least q+1={q + 1} samples, dataset has {d.n}")
    X = d.features
    avg = np.empty(d.n)
    max_d2 = 0.0
    for lo, hi in _source_chunks(d.n, d.n):
        d2 = cdist(X[lo:hi], X, "sqeuclidean")
        max_d2 = max(max_d2, float(d2.max()))
        dist = np.sqrt(np.sort(d2, axis=1)[:, 1 : q + 1])  # drop the self distance
        avg[lo:hi] = dist.mean(axis=1)
    h = sigma * avg
    degenerate = avg == 0.0
    if degenerate.any():
        diameter = float(np.sqrt(max_d2))
        h[degenerate] = 1e-9 * (diameter if diameter > 0 else 1.0)
    return h


def fit(
    d: Dataset,
    q: int = DEFAULT_Q,
    sigma: float = DEFAULT_SIGMA,
    include_self: bool = True,
) -> DensityModel:
    """Fit the frozen KDE state on a dataset.

    kernel_sums[j, c] accumulates the normalized kernel contributions of all
    class-c samples at x_j; class-conditional likelihoods are these sums
    divided by the class count.
    """
    h = compute_bandwidths(d, q, sigma)
    X = d.features
    mask = d.minority_mask
    sums = np.zeros((d.n, 2))
    for lo, hi in _source_chunks(d.n, d.n):
        rows = _kernel_rows(X[lo:hi], h[lo:hi], X)
        if not include_self:
            rows[np.arange(hi - lo), np.arange(lo, hi)] = 0.0
        chunk_mask = mask[lo:hi]
        if (~chunk_mask).any():
            sums[:, 0] += rows[~chunk_mask].sum(axis=0)
        if chunk_mask.any():
            sums[:, 1] += rows[chunk_mask].sum(axis=0)
    sums.setflags(write=False)
    h.setflags(write=False)
    return DensityModel(
        bandwidths=h,
        kernel_sums=sums,
        class_counts=(d.majority_count, d.minority_count),
        q=q,
        sigma=float(sigma),
        include_self=include_self,
    )


def _posterior_matrix(sums: np.ndarray, counts: tuple[int, int]) -> tuple[np.ndarray, int]:
    """Bayes posteriors (majority, minority) per row from kernel sums.

    Likelihood of class c is sums[:, c] / count_c; the prior is count_c over
    the total. Rows where both weighted likelihoods are zero fall back to the
    priors; the count of such rows is returned for diagnostics.
    """
    n_mjr, n_mnr = counts
    total_count = n_mjr + n_mnr
    priors = np.array([n_mjr / total_count, n_mnr / total_count])
    likelihoods = sums / np.array([float(n_mjr), float(n_mnr)])
    weighted = likelihoods * priors
    norm = weighted.sum(axis=1)
    out = np.empty_like(weighted)
    ok = norm > 0.0
    out[ok] = weighted[ok] / norm[ok, None]
    out[~ok] = priors
    fallback = int((~ok).sum())
    if fallback:
        logger.info("zero-likelihood fallback to priors applied to %d samples", fallback)
    return out, fallback


def posteriors(model: DensityModel, d: Dataset) -> np.ndarray:
    """(n, 2) matrix of posteriors (majority column 0, minority column 1)."""
    _check_fitted_on(model, d)
    post, _ = _posterior_matrix(model.kernel_sums, model.class_counts)
    return post


def posterior(model: DensityModel, j: int, d: Dataset) -> tuple[float, float]:
    """Posterior pair (P(majority|x_j), P(minority|x_j)) for one sample."""
    _check_fitted_on(model, d)
    j = int(j)
    if not 0 <= j < model.n:
        raise ParameterError(f"sample index {j} out of range 0..{model.n - 1}")
    post, _ = _posterior_matrix(model.kernel_sums[j : j + 1], model.class_counts)
    return float(post[0, 0]), float(post[0, 1])


def certainty_profile(model: DensityModel, d: Dataset) -> CertaintyProfile:
    """Posterior probability of each sample's ground-truth label."""
    _check_fitted_on(model, d)
    post, fallback = _posterior_matrix(model.kernel_sums, model.class_counts)
    own = np.where(d.minority_mask, post[:, 1], post[:, 0])
    return CertaintyProfile(posteriors=own, fallback_count=fallback)


def bandwidth_at(d: Dataset, x: np.ndarray, q: int = DEFAULT_Q, sigma: float = DEFAULT_SIGMA) -> float:
    """Bandwidth rule evaluated at an arbitrary location.

    Same scaled mean-distance-to-q-nearest rule as compute_bandwidths, except
    nothing is excluded: the probe point is not a dataset row, so it has no
    self distance. Used when probing insertions at off-sample coordinates.
    """
    q = check_positive_int(q, "q")
    sigma = check_positive_real(sigma, "sigma")
    if q > d.n:
        raise ParameterError(f"q={q} exceeds dataset size {d.n}")
    x = check_feature_vector(x, d.m)
    dist = np.sqrt(np.sort(cdist(x[None, :], d.features, "sqeuclidean")[0])[:q])
    avg = float(dist.mean())
    if avg > 0.0:
        return sigma * avg
    diameter = float(np.sqrt(cdist(d.features, d.features, "sqeuclidean").max()))
    return 1e-9 * (diameter if diameter > 0 else 1.0)


def insert_minority_whatif_at(
    model: DensityModel,
    x: np.ndarray,
    d: Dataset,
    bandwidth: float | None = None,
) -> CertaintyProfile:
    """Certainties after hypothetically adding one minority sample at x.

    The frozen state is not mutated: the new sample's kernel row is added to
    the minority sums, and both the minority likelihood denominator and the
    priors move to the incremented counts. Existing bandwidths stay frozen.
    O(n*m) per call.
    """
    _check_fitted_on(model, d)
    x = check_feature_vector(x, d.m)
    if bandwidth is None:
        bandwidth = bandwidth_at(d, x, model.q, model.sigma)
    bandwidth = check_positive_real(bandwidth, "bandwidth")
    term = _kernel_rows(x[None, :], np.array([bandwidth]), d.features)[0]
    sums = model.kernel_sums.copy()
    sums[:, 1] += term
    n_mjr, n_mnr = model.class_counts
    post, fallback = _posterior_matrix(sums, (n_mjr, n_mnr + 1))
    own = np.where(d.minority_mask, post[:, 1], post[:, 0])
    return CertaintyProfile(posteriors=own, fallback_count=fallback)


def insert_minority_whatif(model: DensityModel, i: int, d: Dataset) -> CertaintyProfile:
    """Certainties after hypothetically duplicating location x_i as minority.

    The inserted sample reuses the frozen bandwidth of sample i; recomputing
    it would be distorted by the duplicate sitting at distance zero.
    """
    _check_fitted_on(model, d)
    i = int(i)
    if not 0 <= i < model.n:
        raise ParameterError(f"location index {i} out of range 0..{model.n - 1}")
    return insert_minority_whatif_at(
        model, d.features[i], d, bandwidth=float(model.bandwidths[i])
    )


def query_class_sums(d: Dataset, bandwidths: np.ndarray, X_query: np.ndarray) -> np.ndarray:
    """Kernel sums of the training classes evaluated at query points.

    Queries are never kernel centers: only training samples contribute, each
    with its own frozen bandwidth. Returns (n_query, 2), majority column 0.
    """
    Xq = np.asarray(X_query, dtype=np.float64)
    if Xq.ndim == 1:
        Xq = Xq[None, :]
    if Xq.shape[1] != d.m:
        raise ParameterError(f"queries have dimension {Xq.shape[1]}, expected {d.m}")
    sums = np.zeros((Xq.shape[0], 2))
    mask = d.minority_mask
    for lo, hi in _source_chunks(d.n, Xq.shape[0]):
        rows = _kernel_rows(d.features[lo:hi], bandwidths[lo:hi], Xq)
        chunk_mask = mask[lo:hi]
        if (~chunk_mask).any():
            sums[:, 0] += rows[~chunk_mask].sum(axis=0)
        if chunk_mask.any():
            sums[:, 1] += rows[chunk_mask].sum(axis=0)
    return sums


def _check_fitted_on(model: DensityModel, d: Dataset) -> None:
    if model.n != d.n:
        raise ParameterError(
            f"model was fitted on {model.n} samples but dataset has {d.n}"
        )
    counts = (d.majority_count, d.minority_count)
    if tuple(model.class_counts) != counts:
        raise ParameterError(
            f"model class counts {tuple(model.class_counts)} do not match dataset {counts}"
        )
