"""Independent brute-force oracles for the verification harness.

Everything here re-derives expected values from scratch (plain loops,
exhaustive scans, finite differences, closed forms) and never calls the
production code paths it is used to check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class OracleReport:
    name: str
    cases: int
    max_deviation: float
    passed: bool


def otsu_bruteforce(scores: np.ndarray, bins: int) -> tuple[float, float]:
    """Exhaustive scan of every interior edge; returns (best sigma, threshold).

    Bins by idx = min(floor(s * B), B - 1); class means use bin centers via
    integer sums, so the final float arithmetic is uniquely determined.
    Plateau tie-break: midpoint edge index.
    """
    s = np.asarray(scores, dtype=np.float64)
    n = s.size
    counts = [0] * bins
    for v in s:
        counts[min(int(v * bins), bins - 1)] += 1
    iw_total = sum(c * i for i, c in enumerate(counts))
    best = -1.0
    best_edges: list[int] = []
    for j in range(1, bins):
        n_lo = sum(counts[:j])
        n_hi = n - n_lo
        if n_lo == 0 or n_hi == 0:
            sigma = 0.0
        else:
            iw_lo = sum(c * i for i, c in enumerate(counts[:j]))
            iw_hi = iw_total - iw_lo
            mu_lo = (iw_lo + 0.5 * n_lo) / (bins * n_lo)
            mu_hi = (iw_hi + 0.5 * n_hi) / (bins * n_hi)
            diff = mu_lo - mu_hi
            sigma = (n_lo / n) * (n_hi / n) * (diff * diff)
        if sigma > best:
            best = sigma
            best_edges = [j]
        elif sigma == best:
            best_edges.append(j)
    j_star = (best_edges[0] + best_edges[-1]) // 2
    return best, j_star / bins


def mlp_forward_oracle(weights, biases, x: np.ndarray) -> np.ndarray:
    """Plain-loop MLP forward pass: ReLU hiddens, stable softmax output."""
    a = [float(v) for v in x]
    for layer in range(len(weights) - 1):
        w, b = weights[layer], biases[layer]
        a = [
            max(0.0, sum(a[i] * w[i][j] for i in range(len(a))) + b[j])
            for j in range(len(b))
        ]
    w, b = weights[-1], biases[-1]
    logits = [sum(a[i] * w[i][j] for i in range(len(a))) + b[j] for j in range(len(b))]
    m = max(logits)
    exps = [math.exp(z - m) for z in logits]
    total = sum(exps)
    return np.array([e / total for e in exps])


def cross_entropy_oracle(weights, biases, x: np.ndarray, label: int) -> float:
    probs = mlp_forward_oracle(weights, biases, x)
    return -math.log(max(probs[label], 1e-12))


def finite_diff_gradients(weights, biases, x: np.ndarray, label: int, h: float = 1e-5):
    """Central finite differences of the oracle loss w.r.t. every parameter."""
    grads_w = [np.zeros_like(w) for w in weights]
    grads_b = [np.zeros_like(b) for b in biases]
    for grads, tensors in ((grads_w, weights), (grads_b, biases)):
        for layer, tensor in enumerate(tensors):
            it = np.nditer(tensor, flags=["multi_index"])
            for _ in it:
                idx = it.multi_index
                orig = tensor[idx]
                tensor[idx] = orig + h
                up = cross_entropy_oracle(weights, biases, x, label)
                tensor[idx] = orig - h
                down = cross_entropy_oracle(weights, biases, x, label)
                tensor[idx] = orig
                grads[layer][idx] = (up - down) / (2.0 * h)
    return grads_w, grads_b


def friedman_oracle(rank_sums, n: int, k: int) -> tuple[float, float]:
    """Hand evaluation of the rank-sum chi-square formula; df=2 closed-form p."""
    statistic = 12.0 / (n * k * (k + 1)) * sum(r * r for r in rank_sums) - 3.0 * n * (k + 1)
    if k - 1 == 2:
        p = math.exp(-statistic / 2.0)
    else:
        p = float("nan")
    return statistic, p


def random_score_vectors(count: int, rng: np.random.Generator):
    """Mixed unimodal/bimodal score vectors in [0, 1], n in [10, 5000]."""
    out = []
    for i in range(count):
        n = int(rng.integers(10, 5001))
        if i % 2 == 0:
            s = rng.beta(2.0, 5.0, size=n)
        else:
            lo = rng.beta(8.0, 2.0, size=n) * 0.45
            hi = 0.55 + rng.beta(2.0, 8.0, size=n) * 0.45
            pick = rng.random(n) < 0.5
            s = np.where(pick, lo, hi)
        s = np.clip(s, 0.0, 1.0)
        if s.min() == s.max():
            s[0] = min(1.0, s[0] + 0.5)
        out.append(s)
    return out


def run_oracles(seed: int = 2024) -> list[OracleReport]:
    """Execute the full oracle battery; each report carries its worst deviation."""
    from peersel.classifier import TrainConfig, _example_gradients, init_mlp
    from peersel.numerics import derive_stream
    from peersel.partition import build_histogram, gmm2_fit, kmeans2_fit, otsu_sigma_b, otsu_threshold
    from peersel.stats import chi_square_sf, friedman, rank_rows

    reports = []
    rng = np.random.default_rng(seed)

    # Otsu: production argmax value and threshold vs exhaustive scan
    worst = 0.0
    ok = True
    vectors = random_score_vectors(1000, rng)
    for s in vectors:
        part = otsu_threshold(s, 256)
        sigma = otsu_sigma_b(build_histogram(s, 256))
        oracle_sigma, oracle_thr = otsu_bruteforce(s, 256)
        dev = abs(sigma.max() - oracle_sigma)
        worst = max(worst, dev)
        if dev != 0.0 or part.threshold != oracle_thr:
            ok = False
    reports.append(OracleReport("otsu_exhaustive_scan", len(vectors), worst, ok))

    # Gradients: analytic vs finite differences of an independent forward pass
    worst = 0.0
    for i in range(100):
        stream = derive_stream(seed, 1000 + i)
        d = int(stream.integers(2, 6))
        hidden = (int(stream.integers(2, 8)),)
        c = int(stream.integers(2, 5))
        params = init_mlp(d, hidden, c, stream)
        x = stream.standard_normal(d)
        label = int(stream.integers(0, c))
        analytic_w, analytic_b = _example_gradients(params, x, label)
        fd_w, fd_b = finite_diff_gradients(params.weights, params.biases, x, label)
        for a, f in zip(analytic_w + analytic_b, fd_w + fd_b):
            diff = np.abs(a - f)
            denom = np.maximum(np.abs(a), np.abs(f))
            rel = np.where(denom > 1e-6, diff / np.maximum(denom, 1e-300), diff)
            worst = max(worst, float(rel.max()))
    reports.append(OracleReport("gradient_finite_difference", 100, worst, worst < 1e-4))

    # EM log-likelihood and k-means inertia monotonicity
    worst_em, worst_km = 0.0, 0.0
    for i in range(100):
        s = np.clip(rng.normal(0.5, 0.2, size=int(rng.integers(20, 400))), 0.0, 1.0)
        if s.min() == s.max():
            s[0] = min(1.0, s[0] + 0.1)
        fit = gmm2_fit(s)
        drops = np.diff(fit.loglik_trace)
        if drops.size:
            worst_em = max(worst_em, float(-drops.min()))
        km = kmeans2_fit(s)
        incr = np.diff(km.inertia_trace)
        if incr.size:
            worst_km = max(worst_km, float(incr.max()))
    reports.append(OracleReport("gmm_loglik_monotone", 100, worst_em, worst_em <= 1e-10))
    reports.append(OracleReport("kmeans_inertia_monotone", 100, worst_km, worst_km <= 1e-12))

    # Friedman closed forms at the documented rank sums
    ranks = np.array([[1, 2, 3]] * 8 + [[1, 3, 2]] + [[2, 1, 3]], dtype=float)
    rt = rank_rows(ranks, higher_is_better=False)
    import warnings as _warnings

    with _warnings.catch_warnings():
        _warnings.simplefilter("ignore")
        res = friedman(rt)
    stat_o, p_o = friedman_oracle(ranks.sum(axis=0), 10, 3)
    dev = max(abs(res.statistic - stat_o), abs(res.p_value - p_o))
    dev = max(dev, abs(chi_square_sf(16.2, 2) - math.exp(-8.1)))
    reports.append(OracleReport("friedman_closed_form", 2, dev, dev < 1e-12))
    return reports
