"""Synthetic datasets, label-noise injection, splitting, and CSV round-trips.

Datasets are Gaussian class clusters at configurable separation, a
desk-scale stand-in for image features. Two corruption regimes are
provided: instance-dependent noise (flip probability and wrong label both
derived from the sample's features) and symmetric noise (uniform flips).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import derive_stream

# Well-known substream ids: all randomness in this module is keyed by
# (seed, id) so generation, corruption, and splitting never share a stream.
_SID_FEATURES = 11
_SID_IDN = 12
_SID_SYMMETRIC = 13
_SID_SPLIT = 14

_MAX_FLIP_PROB = 0.95
# Scale of the logistic flip field. Small enough that no feature region
# becomes majority-flipped (flipped labels would otherwise form a locally
# consistent, learnable pattern), large enough that flip probability stays
# visibly instance-dependent.
_IDN_FIELD_SCALE = 0.5


@dataclass(frozen=True)
class LabeledDataset:
    """Feature matrix with clean labels, noisy labels, and the flip mask.

    The noise mask is experiment-only ground truth: mask[i] is true iff
    sample i's label was flipped.
    """

    features: np.ndarray      # (n, d) float64
    clean_labels: np.ndarray  # (n,) int64 in [0, class_count)
    noisy_labels: np.ndarray  # (n,) int64 in [0, class_count)
    noise_mask: np.ndarray    # (n,) bool
    class_count: int

    def __post_init__(self):
        n = self.features.shape[0]
        if n < 1 or self.class_count < 2:
            raise ValueError("dataset requires n >= 1 and class_count >= 2")
        for arr in (self.clean_labels, self.noisy_labels, self.noise_mask):
            if arr.shape != (n,):
                raise ValueError("label/mask arrays must have one entry per sample")
        for labels in (self.clean_labels, self.noisy_labels):
            if labels.min() < 0 or labels.max() >= self.class_count:
                raise ValueError("labels out of range")
        if not np.array_equal(self.noise_mask, self.noisy_labels != self.clean_labels):
            raise ValueError("noise_mask inconsistent with label disagreement")
        if not np.all(np.isfinite(self.features)):
            raise ValueError("non-finite features")

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class SplitIndices:
    """Disjoint train/test index sets covering [0, n)."""

    train: np.ndarray
    test: np.ndarray


def generate_gaussian_mixture(
    n: int, d: int, class_count: int, class_separation: float, seed: int
) -> LabeledDataset:
    """Sample a noise-free balanced dataset of isotropic Gaussian clusters.

    Class means are drawn on a sphere of radius class_separation; samples
    get unit-variance noise. Class counts are balanced within one sample.
    """
    if n < class_count or d < 2 or class_count < 2:
        raise ValueError("need n >= class_count, d >= 2, class_count >= 2")
    if class_separation <= 0:
        raise ValueError("class_separation must be positive")
    rng = derive_stream(seed, _SID_FEATURES)
    directions = rng.standard_normal((class_count, d))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    means = class_separation * directions
    labels = np.arange(n, dtype=np.int64) % class_count
    features = means[labels] + rng.standard_normal((n, d))
    return LabeledDataset(
        features=features,
        clean_labels=labels,
        noisy_labels=labels.copy(),
        noise_mask=np.zeros(n, dtype=bool),
        class_count=class_count,
    )


def _check_rate(rate: float) -> None:
    if not (0.0 < rate <= _MAX_FLIP_PROB):
        raise ValueError("noise_rate out of range (0, 0.95]")


def _require_noise_free(ds: LabeledDataset) -> None:
    if ds.noise_mask.any():
        raise ValueError("dataset already contains label noise")


def inject_idn_noise(ds: LabeledDataset, rate: float, seed: int) -> LabeledDataset:
    """Corrupt labels with instance-dependent noise at the requested rate.

    Per-sample flip probability q_i = rate * n * g(x_i) / sum_j g(x_j),
    clipped to [0, 0.95], where g is a seeded logistic projection of the
    features. A flipped sample receives the argmax of a fixed random class
    projection of its features, excluding the true class, so both the flip
    decision and the wrong label depend on the instance.
    """
    _check_rate(rate)
    _require_noise_free(ds)
    rng = derive_stream(seed, _SID_IDN)
    n, d = ds.features.shape
    w = rng.standard_normal(d) * (_IDN_FIELD_SCALE / np.sqrt(d))
    b = rng.standard_normal()
    g = 1.0 / (1.0 + np.exp(-(ds.features @ w + b)))
    q = np.clip(rate * n * g / g.sum(), 0.0, _MAX_FLIP_PROB)
    flips = rng.random(n) < q
    class_proj = rng.standard_normal((ds.class_count, d))
    scores = ds.features @ class_proj.T
    scores[np.arange(n), ds.clean_labels] = -np.inf
    wrong = np.argmax(scores, axis=1).astype(np.int64)
    noisy = ds.clean_labels.copy()
    noisy[flips] = wrong[flips]
    return LabeledDataset(
        features=ds.features,
        clean_labels=ds.clean_labels,
        noisy_labels=noisy,
        noise_mask=noisy != ds.clean_labels,
        class_count=ds.class_count,
    )


def inject_symmetric_noise(ds: LabeledDataset, rate: float, seed: int) -> LabeledDataset:
    """Flip round(rate * n) uniformly chosen samples to uniform wrong labels."""
    _check_rate(rate)
    _require_noise_free(ds)
    rng = derive_stream(seed, _SID_SYMMETRIC)
    n = ds.n
    n_flip = int(round(rate * n))
    chosen = rng.choice(n, size=n_flip, replace=False)
    offsets = rng.integers(1, ds.class_count, size=n_flip)
    noisy = ds.clean_labels.copy()
    noisy[chosen] = (ds.clean_labels[chosen] + offsets) % ds.class_count
    return LabeledDataset(
        features=ds.features,
        clean_labels=ds.clean_labels,
        noisy_labels=noisy,
        noise_mask=noisy != ds.clean_labels,
        class_count=ds.class_count,
    )


def split(ds: LabeledDataset, test_fraction: float, seed: int) -> SplitIndices:
    """Deterministic stratified train/test split on clean labels."""
    if not (0.0 < test_fraction < 1.0):
        raise ValueError("test_fraction must be in (0, 1)")
    rng = derive_stream(seed, _SID_SPLIT)
    test_parts = []
    for c in range(ds.class_count):
        idx = np.flatnonzero(ds.clean_labels == c)
        perm = rng.permutation(idx)
        n_test = int(round(len(idx) * test_fraction))
        test_parts.append(perm[:n_test])
    test = np.sort(np.concatenate(test_parts)).astype(np.int64)
    mask = np.ones(ds.n, dtype=bool)
    mask[test] = False
    train = np.flatnonzero(mask).astype(np.int64)
    return SplitIndices(train=train, test=test)


def write_dataset_csv(ds: LabeledDataset, path: str) -> None:
    """Write a dataset as UTF-8 CSV, row order by id, 17-significant-digit floats."""
    header = "id," + ",".join(f"f{j}" for j in range(ds.d)) + ",clean_label,noisy_label"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for i in range(ds.n):
            feats = ",".join(format(v, ".17g") for v in ds.features[i])
            fh.write(f"{i},{feats},{ds.clean_labels[i]},{ds.noisy_labels[i]}\n")


def read_dataset_csv(path: str, class_count: int | None = None) -> LabeledDataset:
    """Read a dataset CSV written by write_dataset_csv.

    If class_count is omitted it is inferred as max(label) + 1. Errors name
    the offending 1-based line number.
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ValueError("empty dataset file")
    header_cols = lines[0].split(",")
    if (
        len(header_cols) < 4
        or header_cols[0] != "id"
        or header_cols[-2:] != ["clean_label", "noisy_label"]
        or header_cols[1:-2] != [f"f{j}" for j in range(len(header_cols) - 3)]
    ):
        raise ValueError("malformed header at line 1: expected id,f0,...,clean_label,noisy_label")
    d = len(header_cols) - 3
    features, clean, noisy = [], [], []
    for lineno, line in enumerate(lines[1:], start=2):
        cols = line.split(",")
        if len(cols) != d + 3:
            raise ValueError(f"expected d+3 columns ({d + 3}) at line {lineno}")
        try:
            row = [float(v) for v in cols[1 : d + 1]]
        except ValueError:
            raise ValueError(f"non-numeric feature at line {lineno}") from None
        try:
            c_lab, n_lab = int(cols[-2]), int(cols[-1])
        except ValueError:
            raise ValueError(f"non-integer label at line {lineno}") from None
        if min(c_lab, n_lab) < 0 or (
            class_count is not None and max(c_lab, n_lab) >= class_count
        ):
            raise ValueError(f"label out of range at line {lineno}")
        features.append(row)
        clean.append(c_lab)
        noisy.append(n_lab)
    if not features:
        raise ValueError("dataset file has no data rows")
    clean_arr = np.array(clean, dtype=np.int64)
    noisy_arr = np.array(noisy, dtype=np.int64)
    if class_count is None:
        class_count = int(max(clean_arr.max(), noisy_arr.max())) + 1
    return LabeledDataset(
        features=np.array(features, dtype=np.float64),
        clean_labels=clean_arr,
        noisy_labels=noisy_arr,
        noise_mask=noisy_arr != clean_arr,
        class_count=max(class_count, 2),
    )
