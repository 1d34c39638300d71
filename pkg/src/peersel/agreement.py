"""Per-sample peer-agreement scores between two prediction matrices.

The agreement of two classifiers on a sample is the cosine similarity of
their predicted probability vectors: 1 when the peers predict identical
distributions, 0 when they are confidently disjoint. Probability rows are
nonnegative, so scores always land in [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class AgreementScores:
    """Per-sample agreement in [0, 1] plus the ids of the two peers scored."""

    scores: np.ndarray
    peer_ids: tuple[int, int]


def agreement_scores(
    probs_l: np.ndarray,
    probs_m: np.ndarray,
    peer_ids: tuple[int, int] = (0, 1),
) -> AgreementScores:
    """Row-wise cosine similarity of two probability matrices."""
    a = np.asarray(probs_l, dtype=np.float64)
    b = np.asarray(probs_m, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 2 or a.shape[1] < 2:
        raise ValueError("prediction matrices must share shape (n, C >= 2)")
    norms_a = np.linalg.norm(a, axis=1)
    norms_b = np.linalg.norm(b, axis=1)
    if np.any(norms_a == 0.0) or np.any(norms_b == 0.0):
        raise ValueError("degenerate prediction vector")
    scores = np.einsum("ij,ij->i", a, b) / (norms_a * norms_b)
    # Nonnegative rows bound scores to [0, 1]; clip rounding spill only.
    return AgreementScores(scores=np.clip(scores, 0.0, 1.0), peer_ids=peer_ids)


def write_scores_csv(scores: AgreementScores, ids: np.ndarray, path: str) -> None:
    """Export scores as `id,score` rows for offline histogram inspection."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("id,score\n")
        for sample_id, score in zip(np.asarray(ids), scores.scores):
            fh.write(f"{sample_id},{format(score, '.17g')}\n")
