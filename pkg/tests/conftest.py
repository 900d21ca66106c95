"""Shared fixtures and independent oracle helpers.

Oracles here are deliberately written from scratch (plain loops, no reuse of
package internals) so the tests that compare against them are genuine
cross-checks rather than tautologies.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from cgmos import density, sampling
from cgmos.dataset import Dataset, make_two_gaussian_fixture
from cgmos.validation import derive_seed

# Heavy smoothing for the certainty-band ordering checks: wide neighborhoods
# blur the cluster overlap enough that all three certainty bands are populated
# and insertion gains differ visibly across them.
BAND_Q = 40
BAND_SIGMA = 4.0


@pytest.fixture(scope="session")
def two_gauss() -> Dataset:
    """The default 2000/400 two-cluster fixture (seed 0)."""
    return make_two_gaussian_fixture()


@pytest.fixture(scope="session")
def band_state(two_gauss):
    """Smoothed density model, certainty profile, and minority-seed weight
    table on the default fixture, shared by the band-ordering tests."""
    model = density.fit(two_gauss, q=BAND_Q, sigma=BAND_SIGMA)
    profile = density.certainty_profile(model, two_gauss)
    table = sampling.compute_weights(model, two_gauss, seed_pool="minority_only")
    return model, profile, table


@pytest.fixture(scope="session")
def small_gauss() -> Dataset:
    """A 60/20 two-cluster dataset, small enough for exhaustive checks."""
    return make_two_gaussian_fixture(n_major=60, n_minor=20, separation=3.0, seed=1)


def make_dataset(features, minority_mask, **kwargs) -> Dataset:
    return Dataset(
        features=np.asarray(features, dtype=np.float64),
        minority_mask=np.asarray(minority_mask, dtype=bool),
        **kwargs,
    )


def random_blobs(index: int, max_n: int = 50, seed: int = 1234) -> Dataset:
    """Random two-blob dataset with randomized shape, used by oracle sweeps."""
    rng = np.random.default_rng(derive_seed(seed, "blobs", index))
    n = int(rng.integers(10, max_n + 1))
    m = int(rng.integers(1, 6))
    n_minor = int(rng.integers(2, max(3, n // 2 + 1)))
    offset = rng.uniform(0.0, 4.0) * rng.normal(size=m)
    features = np.vstack(
        [
            rng.normal(size=(n_minor, m)),
            rng.normal(size=(n - n_minor, m)) + offset,
        ]
    )
    mask = np.zeros(n, dtype=bool)
    mask[:n_minor] = True
    return make_dataset(features, mask)


# -- independent oracles -------------------------------------------------------


def oracle_bandwidths(X: np.ndarray, q: int, sigma: float) -> np.ndarray:
    """Brute-force per-sample bandwidth: sigma times the mean distance to the
    q nearest other samples."""
    n = X.shape[0]
    h = np.empty(n)
    for k in range(n):
        dists = sorted(
            math.dist(X[k], X[j]) for j in range(n) if j != k
        )
        h[k] = sigma * sum(dists[:q]) / q
    return h


def oracle_posteriors(
    X: np.ndarray,
    minority_mask: np.ndarray,
    bandwidths: np.ndarray,
    counts: tuple[int, int] | None = None,
) -> np.ndarray:
    """Posterior (majority, minority) per row from first principles.

    Gaussian kernel with the bandwidth of the source sample, self term
    included, likelihood = class kernel sum / class count, empirical priors,
    Bayes normalization. `counts` overrides the class counts so a physically
    augmented matrix can reuse pre-insertion priors semantics.
    """
    n, m = X.shape
    if counts is None:
        counts = (int((~minority_mask).sum()), int(minority_mask.sum()))
    n_mjr, n_mnr = counts
    out = np.empty((n, 2))
    norm_const = (2.0 * math.pi) ** (m / 2.0)
    for j in range(n):
        sums = [0.0, 0.0]
        for k in range(n):
            h = bandwidths[k]
            d2 = float(np.sum((X[j] - X[k]) ** 2))
            term = math.exp(-d2 / (2.0 * h * h)) / (h**m * norm_const)
            sums[1 if minority_mask[k] else 0] += term
        like = (sums[0] / n_mjr, sums[1] / n_mnr)
        prior = (n_mjr / (n_mjr + n_mnr), n_mnr / (n_mjr + n_mnr))
        joint = (like[0] * prior[0], like[1] * prior[1])
        total = joint[0] + joint[1]
        out[j] = prior if total == 0.0 else (joint[0] / total, joint[1] / total)
    return out


def oracle_whatif_refit(d: Dataset, bandwidths: np.ndarray, i: int) -> np.ndarray:
    """Ground-truth insertion profile: physically append a minority copy of
    row i, pin every bandwidth (the new row inherits h_i), refit from scratch,
    and read each original sample's own-label posterior."""
    X_aug = np.vstack([d.features, d.features[i]])
    mask_aug = np.append(d.minority_mask, True)
    h_aug = np.append(bandwidths, bandwidths[i])
    post = oracle_posteriors(X_aug, mask_aug, h_aug)
    own = np.where(d.minority_mask, post[: d.n, 1], post[: d.n, 0])
    return own


def oracle_confusion(labels, predictions, positive) -> tuple[int, int, int, int]:
    """(tp, fp, tn, fn) by explicit iteration."""
    tp = fp = tn = fn = 0
    for y, p in zip(labels, predictions):
        if y == positive and p == positive:
            tp += 1
        elif y != positive and p == positive:
            fp += 1
        elif y != positive and p != positive:
            tn += 1
        else:
            fn += 1
    return tp, fp, tn, fn


def oracle_auc(labels, scores, positive) -> float:
    """Tie-aware Mann-Whitney pair counting: wins plus half credit for ties,
    normalized by the number of (positive, negative) pairs."""
    pos = [s for y, s in zip(labels, scores) if y == positive]
    neg = [s for y, s in zip(labels, scores) if y != positive]
    wins = 0.0
    for sp in pos:
        for sn in neg:
            if sp > sn:
                wins += 1.0
            elif sp == sn:
                wins += 0.5
    return wins / (len(pos) * len(neg))


def _avg_ranks(values) -> list[float]:
    """Average ranks (1-based) with ties sharing the mean of their positions."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j) / 2.0 + 1.0
        for idx in order[i : j + 1]:
            ranks[idx] = avg
        i = j + 1
    return ranks


def oracle_wilcoxon_exact(a, b) -> tuple[float, float, int]:
    """Two-sided exact signed-rank p by enumerating all 2^n sign patterns.

    Returns (statistic, p, n_used). Zero differences are dropped, ties get
    average ranks, and the p-value sums both tails of the W+ distribution:
    P(W+ <= w_lo) + P(W+ >= w_hi) with w_lo = min(W+, W-)."""
    diffs = [x - y for x, y in zip(a, b) if x != y]
    n = len(diffs)
    ranks = _avg_ranks([abs(v) for v in diffs])
    w_plus = sum(r for v, r in zip(diffs, ranks) if v > 0)
    total = sum(ranks)
    w_lo = min(w_plus, total - w_plus)
    w_hi = max(w_plus, total - w_plus)
    count = 0
    for pattern in range(2**n):
        w = sum(ranks[i] for i in range(n) if (pattern >> i) & 1)
        if w <= w_lo + 1e-12 or w >= w_hi - 1e-12:
            count += 1
    return w_lo, count / 2.0**n, n
