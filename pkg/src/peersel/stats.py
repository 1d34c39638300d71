"""Nonparametric multi-method comparison over datasets.

Methods are ranked per dataset (1 = best, ties averaged), the Friedman
chi-square statistic tests the all-methods-equal null, and the post-hoc
Nemenyi rule declares a pair different when its mean-rank gap reaches the
critical difference CD = q_alpha * sqrt(k * (k + 1) / (6 * N)).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaincc
from scipy.stats import rankdata

SMALL_N_WARNING = "chi-square approximation unreliable for small N"

# Two-tailed Nemenyi critical values q_alpha(k) (studentized range / sqrt(2)),
# k = 2..10, from the standard tables.
_Q_TABLE = {
    0.05: (1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164),
    0.10: (1.645, 2.052, 2.291, 2.459, 2.589, 2.693, 2.780, 2.855, 2.920),
}


@dataclass(frozen=True)
class RankTable:
    """Per-dataset method ranks (N datasets x k methods), 1 = best."""

    methods: tuple[str, ...]
    datasets: tuple[str, ...]
    ranks: np.ndarray


@dataclass(frozen=True)
class FriedmanResult:
    statistic: float
    degrees_of_freedom: int
    p_value: float


@dataclass(frozen=True)
class PairComparison:
    method_a: str
    method_b: str
    rank_gap: float
    cd: float
    significant: bool


@dataclass(frozen=True)
class NemenyiResult:
    mean_ranks: dict[str, float]
    cd: float
    alpha: float
    pairs: tuple[PairComparison, ...]


def rank_rows(
    scores: np.ndarray,
    higher_is_better: bool = True,
    methods: tuple[str, ...] | None = None,
    datasets: tuple[str, ...] | None = None,
) -> RankTable:
    """Rank each dataset's scores across methods, averaging ties."""
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 2 or scores.shape[0] < 2 or scores.shape[1] < 2:
        raise ValueError("need an N x k score table with N >= 2, k >= 2")
    if not np.all(np.isfinite(scores)):
        raise ValueError("non-finite score entry")
    n, k = scores.shape
    ordered = -scores if higher_is_better else scores
    ranks = rankdata(ordered, axis=1)
    return RankTable(
        methods=methods or tuple(f"method{j + 1}" for j in range(k)),
        datasets=datasets or tuple(f"dataset{i + 1}" for i in range(n)),
        ranks=ranks,
    )


def chi_square_sf(x: float, df: int) -> float:
    """Upper-tail chi-square probability via the regularized incomplete gamma."""
    if x < 0 or df < 1:
        raise ValueError("need x >= 0 and df >= 1")
    return float(gammaincc(df / 2.0, x / 2.0))


def friedman(rt: RankTable) -> FriedmanResult:
    """Friedman rank test; p-value from the chi-square approximation."""
    n, k = rt.ranks.shape
    if n < 2 or k < 2:
        raise ValueError("Friedman test needs N >= 2 datasets and k >= 2 methods")
    if k < 3 or n < 10:
        warnings.warn(SMALL_N_WARNING, stacklevel=2)
    rank_sums = rt.ranks.sum(axis=0)
    statistic = 12.0 / (n * k * (k + 1)) * float(np.sum(rank_sums**2)) - 3.0 * n * (k + 1)
    statistic = max(statistic, 0.0)
    return FriedmanResult(
        statistic=statistic,
        degrees_of_freedom=k - 1,
        p_value=chi_square_sf(statistic, k - 1),
    )


def nemenyi_cd(k: int, n: int, alpha: float = 0.05) -> float:
    """Critical mean-rank difference q_alpha(k) * sqrt(k(k+1) / (6N))."""
    if alpha not in _Q_TABLE:
        raise ValueError("alpha must be 0.05 or 0.10")
    if not 2 <= k <= 10:
        raise ValueError("q-table supports k <= 10 (and k >= 2)")
    if n < 1:
        raise ValueError("need at least one dataset")
    q = _Q_TABLE[alpha][k - 2]
    return q * float(np.sqrt(k * (k + 1) / (6.0 * n)))


def nemenyi_pairwise(rt: RankTable, alpha: float = 0.05) -> NemenyiResult:
    """All-pairs Nemenyi comparison; enough data to draw a CD diagram."""
    n, k = rt.ranks.shape
    cd = nemenyi_cd(k, n, alpha)
    mean_ranks = {m: float(r) for m, r in zip(rt.methods, rt.ranks.mean(axis=0))}
    pairs = []
    for a in range(k):
        for b in range(a + 1, k):
            gap = abs(mean_ranks[rt.methods[a]] - mean_ranks[rt.methods[b]])
            pairs.append(
                PairComparison(
                    method_a=rt.methods[a],
                    method_b=rt.methods[b],
                    rank_gap=gap,
                    cd=cd,
                    significant=gap >= cd,
                )
            )
    return NemenyiResult(mean_ranks=mean_ranks, cd=cd, alpha=alpha, pairs=tuple(pairs))


def read_scores_csv(path: str) -> tuple[tuple[str, ...], tuple[str, ...], np.ndarray]:
    """Read a `dataset,method1,...,methodk` score table.

    Returns (dataset names, method names, N x k scores). Errors name the
    offending 1-based line number.
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty scores file")
    header = lines[0].split(",")
    if len(header) < 3 or header[0] != "dataset":
        raise ValueError("malformed header at line 1: expected dataset,method1,...,methodk")
    methods = tuple(h.strip() for h in header[1:])
    datasets, rows = [], []
    for lineno, line in enumerate(lines[1:], start=2):
        cols = line.split(",")
        if len(cols) != len(header):
            raise ValueError(f"expected {len(header)} columns at line {lineno}")
        datasets.append(cols[0].strip())
        try:
            rows.append([float(v) for v in cols[1:]])
        except ValueError:
            raise ValueError(f"non-numeric score at line {lineno}") from None
    if len(rows) < 2:
        raise ValueError("need at least 2 dataset rows")
    return tuple(datasets), methods, np.array(rows, dtype=np.float64)
