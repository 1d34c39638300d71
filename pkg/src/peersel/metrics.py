"""Selection quality against ground-truth noise masks, and test accuracy."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classifier import MlpParams, forward_batch
from .data import LabeledDataset
from .partition import Partition


@dataclass(frozen=True)
class SelectionQuality:
    """Precision/recall/F1 of a clean-sample selection, plus its size ratio.

    The positive class is "truly clean": precision is the purity of the
    selected training set. An empty selection reports precision 0 with the
    flag set instead of NaN.
    """

    precision: float
    recall: float
    f1: float
    clean_ratio: float
    empty_selection: bool = False


def selection_quality(
    part: Partition, noise_mask: np.ndarray, train_indices: np.ndarray
) -> SelectionQuality:
    """Score a partition whose clean/noisy sets hold dataset indices."""
    train_indices = np.asarray(train_indices)
    selected = np.asarray(part.clean)
    n_train = train_indices.size
    if selected.size + np.asarray(part.noisy).size != n_train:
        raise ValueError("partition does not cover the training indices")
    truly_clean = ~np.asarray(noise_mask)
    n_clean = int(truly_clean[train_indices].sum())
    hits = int(truly_clean[selected].sum()) if selected.size else 0
    empty = selected.size == 0
    precision = hits / selected.size if selected.size else 0.0
    recall = hits / n_clean if n_clean else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return SelectionQuality(
        precision=precision,
        recall=recall,
        f1=f1,
        clean_ratio=selected.size / n_train,
        empty_selection=empty,
    )


def test_accuracy(
    model: MlpParams | list[MlpParams],
    ds: LabeledDataset,
    test_indices: np.ndarray,
) -> float:
    """Accuracy against clean labels; ensembles average their probabilities.

    argmax ties resolve to the lowest class index.
    """
    members = model if isinstance(model, list) else [model]
    test_indices = np.asarray(test_indices)
    x = ds.features[test_indices]
    mean_probs = np.mean([forward_batch(p, x) for p in members], axis=0)
    predicted = np.argmax(mean_probs, axis=1)
    return float(np.mean(predicted == ds.clean_labels[test_indices]))
