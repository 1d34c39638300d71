"""Peer-agreement sample selection for learning with noisy labels."""

__version__ = "0.1.0"

from .agreement import AgreementScores, agreement_scores
from .classifier import MlpParams, TrainConfig, forward, init_mlp, predict_all, train_epoch
from .data import (
    LabeledDataset,
    SplitIndices,
    generate_gaussian_mixture,
    inject_idn_noise,
    inject_symmetric_noise,
    read_dataset_csv,
    split,
    write_dataset_csv,
)
from .metrics import SelectionQuality, selection_quality, test_accuracy
from .numerics import cosine, derive_stream, softmax
from .partition import (
    Partition,
    gmm2_partition,
    kmeans2_partition,
    otsu_threshold,
    partition_from_threshold,
)
from .selectors import (
    Ensemble,
    EpochRecord,
    SelectorConfig,
    baseline_train,
    pass_select,
    pass_train,
    small_loss_select,
)
from .stats import (
    FriedmanResult,
    RankTable,
    chi_square_sf,
    friedman,
    nemenyi_cd,
    nemenyi_pairwise,
    rank_rows,
)

__all__ = [
    "AgreementScores",
    "Ensemble",
    "EpochRecord",
    "FriedmanResult",
    "LabeledDataset",
    "MlpParams",
    "Partition",
    "RankTable",
    "SelectionQuality",
    "SelectorConfig",
    "SplitIndices",
    "TrainConfig",
    "agreement_scores",
    "baseline_train",
    "chi_square_sf",
    "cosine",
    "derive_stream",
    "forward",
    "friedman",
    "generate_gaussian_mixture",
    "gmm2_partition",
    "init_mlp",
    "inject_idn_noise",
    "inject_symmetric_noise",
    "kmeans2_partition",
    "nemenyi_cd",
    "nemenyi_pairwise",
    "otsu_threshold",
    "partition_from_threshold",
    "pass_select",
    "pass_train",
    "predict_all",
    "rank_rows",
    "read_dataset_csv",
    "selection_quality",
    "small_loss_select",
    "softmax",
    "split",
    "test_accuracy",
    "train_epoch",
    "write_dataset_csv",
]
