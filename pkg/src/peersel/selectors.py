"""Training orchestration: peer-agreement selection and baselines.

The peer-agreement loop trains three independently initialized classifiers.
After a warmup on all data, each epoch snapshots every classifier's
predictions over the training set once; for each classifier k the other
two act as peers, their agreement scores are partitioned, and k trains on
the clean side only. Because selections read the start-of-epoch snapshot,
running the three (select, train) steps sequentially or concurrently gives
identical results.

Baselines: train on everything (`none`), or select by the small-loss
heuristic (`small_loss`) with a two-component mixture over per-sample
losses.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .agreement import agreement_scores
from .classifier import MlpParams, TrainConfig, init_mlp, predict_all, train_epoch
from .data import LabeledDataset
from .metrics import SelectionQuality, selection_quality
from .numerics import derive_stream
from .partition import (
    DEFAULT_BINS,
    DegenerateScoresError,
    Partition,
    gmm2_partition,
    kmeans2_partition,
    otsu_threshold,
)

PARTITION_METHODS = ("otsu", "kmeans", "gmm")
DEGENERATE_POLICIES = ("all_clean", "halt")

# Stream-id packing: every RandomStream in a run is derived from
# (master_seed, _sid(arm, role, epoch, k)), making substreams independent
# of execution order.
_ARM_PASS, _ARM_SMALL_LOSS, _ARM_NONE = 0, 1, 2
_ROLE_INIT, _ROLE_TRAIN = 0, 1


def _sid(arm: int, role: int, epoch: int, k: int) -> int:
    return (arm << 48) | (role << 40) | (epoch << 8) | k


@dataclass
class SelectorConfig:
    """Schedule and partitioning choices for a selection run."""

    warmup_epochs: int = 10
    total_epochs: int = 50
    partition_method: str = "otsu"
    degenerate_policy: str = "all_clean"
    bins: int = DEFAULT_BINS

    def __post_init__(self):
        if self.warmup_epochs > self.total_epochs or self.warmup_epochs < 0:
            raise ValueError("need 0 <= warmup_epochs <= total_epochs")
        if self.partition_method not in PARTITION_METHODS:
            raise ValueError(f"partition_method must be one of {PARTITION_METHODS}")
        if self.degenerate_policy not in DEGENERATE_POLICIES:
            raise ValueError(f"degenerate_policy must be one of {DEGENERATE_POLICIES}")


@dataclass
class Ensemble:
    """Exactly three peer classifiers sharing one training configuration."""

    members: list[MlpParams]
    cfg: TrainConfig
    epoch: int = 0

    def __post_init__(self):
        if len(self.members) != 3:
            raise ValueError("peer-agreement selection requires exactly three classifiers")


@dataclass
class EpochRecord:
    """One classifier's selection and training outcome for one epoch."""

    epoch: int
    classifier: int
    method: str
    threshold: float | None
    n_clean: int
    n_noisy: int
    quality: SelectionQuality
    train_loss: float
    peer_ids: tuple[int, int] | None = None


def _partition_scores(scores: np.ndarray, method: str, bins: int) -> Partition:
    if method == "otsu":
        return otsu_threshold(scores, bins)
    if method == "kmeans":
        return kmeans2_partition(scores)
    if method == "gmm":
        return gmm2_partition(scores)
    raise ValueError(f"unknown partition method {method!r}")


def _apply_policy(
    part: Partition | None, train_indices: np.ndarray, method: str, policy: str
) -> Partition:
    """Map degenerate or empty-clean selections per the configured policy."""
    if policy == "halt":
        raise DegenerateScoresError("degenerate score distribution")
    return Partition(
        clean=np.asarray(train_indices, dtype=np.int64).copy(),
        noisy=np.empty(0, dtype=np.int64),
        threshold=None,
        method=method,
    )


def _lift(part: Partition, train_indices: np.ndarray) -> Partition:
    """Map array-position indices back to dataset indices."""
    train_indices = np.asarray(train_indices)
    return Partition(
        clean=train_indices[part.clean],
        noisy=train_indices[part.noisy],
        threshold=part.threshold,
        method=part.method,
    )


def pass_select(
    ensemble: Ensemble,
    ds: LabeledDataset,
    train_indices: np.ndarray,
    k: int,
    method: str = "otsu",
    degenerate_policy: str = "all_clean",
    bins: int = DEFAULT_BINS,
    snapshot: dict[int, np.ndarray] | None = None,
) -> tuple[Partition, tuple[int, int]]:
    """Select training samples for classifier k from its peers' agreement.

    The peers are the other two ensemble members; k's own predictions never
    enter its selection. Returns the partition (dataset indices) and the
    peer ids used. `snapshot` optionally supplies precomputed prediction
    matrices keyed by classifier id.
    """
    if k not in (1, 2, 3):
        raise ValueError("classifier index k must be 1, 2, or 3")
    peer_l, peer_m = sorted({1, 2, 3} - {k})

    def predictions(j: int) -> np.ndarray:
        if snapshot is not None and j in snapshot:
            return snapshot[j]
        return predict_all(ensemble.members[j - 1], ds, train_indices)

    scored = agreement_scores(predictions(peer_l), predictions(peer_m), (peer_l, peer_m))
    try:
        part = _partition_scores(scored.scores, method, bins)
        if part.clean.size == 0:
            part = None
    except DegenerateScoresError:
        part = None
    if part is None:
        return _apply_policy(None, train_indices, method, degenerate_policy), (peer_l, peer_m)
    return _lift(part, train_indices), (peer_l, peer_m)


def _record(
    epoch: int,
    classifier: int,
    part: Partition,
    noise_mask: np.ndarray,
    train_indices: np.ndarray,
    loss: float,
    peer_ids: tuple[int, int] | None = None,
) -> EpochRecord:
    return EpochRecord(
        epoch=epoch,
        classifier=classifier,
        method=part.method,
        threshold=part.threshold,
        n_clean=int(part.clean.size),
        n_noisy=int(part.noisy.size),
        quality=selection_quality(part, noise_mask, train_indices),
        train_loss=loss,
        peer_ids=peer_ids,
    )


def _warmup_partition(train_indices: np.ndarray) -> Partition:
    return Partition(
        clean=np.asarray(train_indices, dtype=np.int64).copy(),
        noisy=np.empty(0, dtype=np.int64),
        threshold=None,
        method="warmup",
    )


def pass_train(
    ds: LabeledDataset,
    train_indices: np.ndarray,
    selector_cfg: SelectorConfig,
    train_cfg: TrainConfig,
    master_seed: int,
) -> tuple[Ensemble, list[EpochRecord]]:
    """Full peer-agreement training run; deterministic given master_seed."""
    train_indices = np.asarray(train_indices, dtype=np.int64)
    members = [
        init_mlp(
            ds.d,
            train_cfg.hidden_sizes,
            ds.class_count,
            derive_stream(master_seed, _sid(_ARM_PASS, _ROLE_INIT, 0, k)),
        )
        for k in (1, 2, 3)
    ]
    ensemble = Ensemble(members=members, cfg=train_cfg)
    records: list[EpochRecord] = []
    for epoch in range(selector_cfg.total_epochs):
        warm = epoch < selector_cfg.warmup_epochs
        if warm:
            selections = {k: (_warmup_partition(train_indices), None) for k in (1, 2, 3)}
        else:
            snapshot = {
                k: predict_all(ensemble.members[k - 1], ds, train_indices) for k in (1, 2, 3)
            }
            selections = {
                k: pass_select(
                    ensemble,
                    ds,
                    train_indices,
                    k,
                    selector_cfg.partition_method,
                    selector_cfg.degenerate_policy,
                    selector_cfg.bins,
                    snapshot,
                )
                for k in (1, 2, 3)
            }
        for k in (1, 2, 3):
            part, peer_ids = selections[k]
            stream = derive_stream(master_seed, _sid(_ARM_PASS, _ROLE_TRAIN, epoch, k))
            _, loss = train_epoch(ensemble.members[k - 1], ds, part.clean, train_cfg, stream)
            records.append(
                _record(epoch, k, part, ds.noise_mask, train_indices, loss, peer_ids)
            )
        ensemble.epoch = epoch + 1
    return ensemble, records


def small_loss_select(
    params: MlpParams,
    ds: LabeledDataset,
    train_indices: np.ndarray,
    stream=None,
) -> Partition:
    """Small-loss selection: low-loss samples are presumed clean.

    Fits a two-component mixture to min-max normalized per-sample
    cross-entropy losses; clean is the lower-mean-loss component. The fit
    runs on inverted losses so the shared mixture code's higher-mean-is-
    clean convention applies unchanged.
    """
    train_indices = np.asarray(train_indices, dtype=np.int64)
    probs = predict_all(params, ds, train_indices)
    picked = np.maximum(probs[np.arange(train_indices.size), ds.noisy_labels[train_indices]], 1e-12)
    losses = -np.log(picked)
    lo, hi = losses.min(), losses.max()
    if hi == lo:
        return _apply_policy(None, train_indices, "gmm", "all_clean")
    inverted = 1.0 - (losses - lo) / (hi - lo)
    try:
        part = gmm2_partition(inverted)
        if part.clean.size == 0:
            return _apply_policy(None, train_indices, "gmm", "all_clean")
    except DegenerateScoresError:
        return _apply_policy(None, train_indices, "gmm", "all_clean")
    return _lift(part, train_indices)


def baseline_train(
    ds: LabeledDataset,
    train_indices: np.ndarray,
    selector_cfg: SelectorConfig,
    train_cfg: TrainConfig,
    master_seed: int,
    selector: str = "none",
) -> tuple[MlpParams, list[EpochRecord]]:
    """Single-classifier control arms.

    `none` trains on all noisy data every epoch; `small_loss` applies
    small-loss selection after warmup and trains on its clean set.
    """
    if selector not in ("none", "small_loss"):
        raise ValueError("selector must be 'none' or 'small_loss'")
    arm = _ARM_NONE if selector == "none" else _ARM_SMALL_LOSS
    train_indices = np.asarray(train_indices, dtype=np.int64)
    params = init_mlp(
        ds.d,
        train_cfg.hidden_sizes,
        ds.class_count,
        derive_stream(master_seed, _sid(arm, _ROLE_INIT, 0, 1)),
    )
    records: list[EpochRecord] = []
    for epoch in range(selector_cfg.total_epochs):
        if selector == "small_loss" and epoch >= selector_cfg.warmup_epochs:
            part = small_loss_select(params, ds, train_indices)
        else:
            part = _warmup_partition(train_indices)
        stream = derive_stream(master_seed, _sid(arm, _ROLE_TRAIN, epoch, 1))
        _, loss = train_epoch(params, ds, part.clean, train_cfg, stream)
        records.append(_record(epoch, 1, part, ds.noise_mask, train_indices, loss))
    return params, records


def write_records_csv(records: list[EpochRecord], path: str) -> None:
    """Emit per-epoch selection records; absent thresholds are blank."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(
            "epoch,classifier,method,threshold,n_clean,n_noisy,"
            "precision,recall,f1,clean_ratio,train_loss\n"
        )
        for r in records:
            thr = "" if r.threshold is None else format(r.threshold, ".17g")
            q = r.quality
            fh.write(
                f"{r.epoch},{r.classifier},{r.method},{thr},{r.n_clean},{r.n_noisy},"
                f"{format(q.precision, '.17g')},{format(q.recall, '.17g')},"
                f"{format(q.f1, '.17g')},{format(q.clean_ratio, '.17g')},"
                f"{format(r.train_loss, '.17g')}\n"
            )
