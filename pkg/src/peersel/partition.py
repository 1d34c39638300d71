"""Split scores in [0, 1] into clean/noisy subsets.

The primary method is Otsu's global threshold: exhaustively scan every
interior histogram edge and keep the one maximizing the between-class
variance w1*w2*(mu1 - mu2)^2. Lloyd's 2-means and a 2-component Gaussian
mixture fit by EM are provided as locally-optimal alternates for
ablations. The high-score side is always the clean side, ties at the
threshold included.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import RandomStream

DEFAULT_BINS = 256
_VAR_FLOOR = 1e-6
_GMM_TOL = 1e-8
_GMM_MAX_ITER = 200
_KMEANS_MAX_ITER = 100


class DegenerateScoresError(ValueError):
    """All scores identical: no threshold carries any signal."""


@dataclass(frozen=True)
class Partition:
    """Complementary clean/noisy index sets over the scored samples."""

    clean: np.ndarray
    noisy: np.ndarray
    threshold: float | None
    method: str


@dataclass(frozen=True)
class Histogram:
    """Uniform histogram over [0, 1]; bin index = min(floor(s * B), B - 1)."""

    bin_count: int
    edges: np.ndarray
    counts: np.ndarray


def _validate_scores(scores: np.ndarray, min_n: int) -> np.ndarray:
    s = np.asarray(scores, dtype=np.float64)
    if s.ndim != 1 or s.size < min_n:
        raise ValueError(f"need at least {min_n} scores")
    if not np.all(np.isfinite(s)) or s.min() < 0.0 or s.max() > 1.0:
        raise ValueError("scores must be finite values in [0, 1]")
    # Width below float dust counts as identical (e.g. cosine of a matrix
    # with itself lands within 1 ulp of 1.0 but not always exactly on it).
    if s.max() - s.min() < 1e-12:
        raise DegenerateScoresError("degenerate score distribution")
    return s


def _from_mask(clean_mask: np.ndarray, threshold: float | None, method: str) -> Partition:
    return Partition(
        clean=np.flatnonzero(clean_mask).astype(np.int64),
        noisy=np.flatnonzero(~clean_mask).astype(np.int64),
        threshold=threshold,
        method=method,
    )


def build_histogram(scores: np.ndarray, bins: int = DEFAULT_BINS) -> Histogram:
    """Bin scores uniformly over [0, 1]; a score of exactly 1 joins the last bin."""
    if bins < 2:
        raise ValueError("need at least 2 bins")
    idx = np.minimum((scores * bins).astype(np.int64), bins - 1)
    counts = np.bincount(idx, minlength=bins)
    edges = np.arange(bins + 1) / bins
    return Histogram(bin_count=bins, edges=edges, counts=counts)


def otsu_sigma_b(hist: Histogram) -> np.ndarray:
    """Between-class variance at every interior bin edge.

    Entry j-1 is sigma_B^2 for threshold edge j (j = 1..B-1). Class means
    use bin centers; sums are integer-exact before the final float ops, so
    any faithful re-implementation of the formula reproduces these values
    bit for bit. Edges leaving one side empty score 0.
    """
    b = hist.bin_count
    counts = hist.counts.astype(np.int64)
    n = int(counts.sum())
    weighted = counts * np.arange(b, dtype=np.int64)
    n_lo = np.cumsum(counts)[:-1].astype(np.float64)       # below edge j
    iw_lo = np.cumsum(weighted)[:-1].astype(np.float64)
    n_hi = float(n) - n_lo
    iw_hi = float(int(weighted.sum())) - iw_lo
    sigma = np.zeros(b - 1)
    valid = (n_lo > 0) & (n_hi > 0)
    mu_lo = (iw_lo[valid] + 0.5 * n_lo[valid]) / (b * n_lo[valid])
    mu_hi = (iw_hi[valid] + 0.5 * n_hi[valid]) / (b * n_hi[valid])
    diff = mu_lo - mu_hi
    diff2 = diff * diff
    sigma[valid] = (n_lo[valid] / n) * (n_hi[valid] / n) * diff2
    return sigma


def otsu_threshold(scores: np.ndarray, bins: int = DEFAULT_BINS) -> Partition:
    """Partition at the edge maximizing between-class variance.

    On a plateau of maximal variance the midpoint edge is returned. Clean
    is the high-score side, threshold inclusive.
    """
    s = _validate_scores(scores, 2)
    hist = build_histogram(s, bins)
    sigma = otsu_sigma_b(hist)
    best = sigma.max()
    plateau = np.flatnonzero(sigma == best)
    j_star = int(plateau[0] + plateau[-1]) // 2 + 1        # sigma[j-1] <-> edge j
    threshold = j_star / bins
    return _from_mask(s >= threshold, threshold, "otsu")


@dataclass(frozen=True)
class KMeans2Fit:
    centroids: tuple[float, float]       # (low, high)
    assign_high: np.ndarray
    inertia_trace: list[float]
    iterations: int


def kmeans2_fit(scores: np.ndarray) -> KMeans2Fit:
    """Lloyd's algorithm for two 1-D clusters, percentile-initialized."""
    s = _validate_scores(scores, 2)
    c_lo, c_hi = float(np.percentile(s, 10)), float(np.percentile(s, 90))
    if c_lo == c_hi:
        c_lo, c_hi = float(s.min()), float(s.max())
    assign_hi = np.zeros(s.size, dtype=bool)
    inertia_trace: list[float] = []
    iterations = 0
    for _ in range(_KMEANS_MAX_ITER):
        iterations += 1
        new_assign = np.abs(s - c_hi) <= np.abs(s - c_lo)   # ties join the clean side
        if not new_assign.any():
            c_hi = float(s.max())
            new_assign = s >= c_hi
        if new_assign.all():
            c_lo = float(s.min())
            new_assign = s > c_lo
        c_lo = float(s[~new_assign].mean())
        c_hi = float(s[new_assign].mean())
        inertia = float(np.sum((s[~new_assign] - c_lo) ** 2) + np.sum((s[new_assign] - c_hi) ** 2))
        inertia_trace.append(inertia)
        if np.array_equal(new_assign, assign_hi) and iterations > 1:
            break
        assign_hi = new_assign
    return KMeans2Fit(
        centroids=(c_lo, c_hi),
        assign_high=assign_hi,
        inertia_trace=inertia_trace,
        iterations=iterations,
    )


def kmeans2_partition(scores: np.ndarray, stream: RandomStream | None = None) -> Partition:
    """Two-means split; clean is the larger-centroid cluster.

    The stream argument is accepted for interface symmetry; percentile
    initialization makes the fit deterministic.
    """
    fit = kmeans2_fit(scores)
    boundary = (fit.centroids[0] + fit.centroids[1]) / 2.0
    return _from_mask(fit.assign_high, boundary, "kmeans")


@dataclass(frozen=True)
class Gmm2Fit:
    means: tuple[float, float]
    variances: tuple[float, float]
    weights: tuple[float, float]
    posterior_high: np.ndarray           # responsibility of the higher-mean component
    loglik_trace: list[float]
    converged: bool


def gmm2_fit(values: np.ndarray) -> Gmm2Fit:
    """EM fit of a two-component 1-D Gaussian mixture.

    Means start at the 10th/90th percentiles, variances at the sample
    variance, weights at 0.5 each. Stops when the log-likelihood moves
    less than 1e-8 or after 200 iterations; variances floored at 1e-6.
    """
    x = _validate_scores(values, 4)
    n = x.size
    m = np.array([np.percentile(x, 10), np.percentile(x, 90)])
    if m[0] == m[1]:
        m = np.array([x.min(), x.max()])
    var = np.full(2, max(float(np.var(x)), _VAR_FLOOR))
    w = np.array([0.5, 0.5])
    loglik_trace: list[float] = []
    converged = False
    resp = np.empty((n, 2))
    for _ in range(_GMM_MAX_ITER):
        # E-step in log space
        log_pdf = (
            -0.5 * np.log(2.0 * np.pi * var)[None, :]
            - (x[:, None] - m[None, :]) ** 2 / (2.0 * var)[None, :]
        )
        log_joint = np.log(w)[None, :] + log_pdf
        log_norm = np.logaddexp(log_joint[:, 0], log_joint[:, 1])
        loglik = float(log_norm.sum())
        resp = np.exp(log_joint - log_norm[:, None])
        if loglik_trace and abs(loglik - loglik_trace[-1]) < _GMM_TOL:
            loglik_trace.append(loglik)
            converged = True
            break
        loglik_trace.append(loglik)
        # M-step; nk floor guards against a fully starved component
        nk = np.maximum(resp.sum(axis=0), 1e-300)
        w = nk / n
        m = (resp * x[:, None]).sum(axis=0) / nk
        var = (resp * (x[:, None] - m[None, :]) ** 2).sum(axis=0) / nk
        var = np.maximum(var, _VAR_FLOOR)
    hi = int(np.argmax(m))
    lo = 1 - hi
    return Gmm2Fit(
        means=(float(m[lo]), float(m[hi])),
        variances=(float(var[lo]), float(var[hi])),
        weights=(float(w[lo]), float(w[hi])),
        posterior_high=resp[:, hi],
        loglik_trace=loglik_trace,
        converged=converged,
    )


def gmm2_partition(scores: np.ndarray, stream: RandomStream | None = None) -> Partition:
    """Gaussian-mixture split; clean where the higher-mean posterior >= 0.5."""
    fit = gmm2_fit(scores)
    return _from_mask(fit.posterior_high >= 0.5, None, "gmm")


def partition_from_threshold(scores: np.ndarray, threshold: float) -> Partition:
    """Deterministic split: clean where score >= threshold."""
    if not (0.0 <= threshold <= 1.0):
        raise ValueError("threshold must be in [0, 1]")
    s = np.asarray(scores, dtype=np.float64)
    return _from_mask(s >= threshold, float(threshold), "fixed")
