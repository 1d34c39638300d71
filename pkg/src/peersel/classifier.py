"""Small ReLU MLP classifier trained by mini-batch SGD with momentum.

This is the unit the peer-agreement selector replicates three times. The
forward pass maps features onto the probability simplex; training follows
cross-entropy against the (possibly noisy) labels. Backprop is written out
explicitly so the analytic gradients can be audited against finite
differences.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import LabeledDataset
from .numerics import RandomStream, softmax

_LOSS_FLOOR = 1e-12


@dataclass
class TrainConfig:
    """Optimizer and architecture hyperparameters shared by all classifiers."""

    hidden_sizes: tuple[int, ...] = (64, 64)
    learning_rate: float = 0.01
    momentum: float = 0.9
    batch_size: int = 64
    epochs: int = 50
    weight_decay: float = 5e-4

    def __post_init__(self):
        self.hidden_sizes = tuple(int(h) for h in self.hidden_sizes)
        if self.learning_rate < 0 or self.batch_size < 1 or self.epochs < 0:
            raise ValueError("invalid training hyperparameters")


@dataclass
class MlpParams:
    """Layer weights/biases plus SGD momentum buffers.

    weights[i] has shape (fan_in, fan_out); biases[i] has shape (fan_out,).
    """

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    vel_w: list[np.ndarray] = field(default_factory=list)
    vel_b: list[np.ndarray] = field(default_factory=list)

    def __post_init__(self):
        if not self.vel_w:
            self.vel_w = [np.zeros_like(w) for w in self.weights]
            self.vel_b = [np.zeros_like(b) for b in self.biases]

    @property
    def n_params(self) -> int:
        return sum(w.size for w in self.weights) + sum(b.size for b in self.biases)


def init_mlp(
    d: int, hidden_sizes: tuple[int, ...], class_count: int, stream: RandomStream
) -> MlpParams:
    """He-initialized MLP: weights ~ N(0, 2/fan_in), biases zero."""
    sizes = [d, *hidden_sizes, class_count]
    if min(sizes) < 1:
        raise ValueError("all layer sizes must be >= 1")
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        weights.append(stream.standard_normal((fan_in, fan_out)) * np.sqrt(2.0 / fan_in))
        biases.append(np.zeros(fan_out))
    return MlpParams(weights=weights, biases=biases)


def forward_batch(params: MlpParams, x: np.ndarray) -> np.ndarray:
    """Class probabilities for a batch of feature rows."""
    a = x
    for w, b in zip(params.weights[:-1], params.biases[:-1]):
        a = np.maximum(a @ w + b, 0.0)
    return softmax(a @ params.weights[-1] + params.biases[-1])


def forward(params: MlpParams, x: np.ndarray) -> np.ndarray:
    """Class probabilities for a single feature vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != params.weights[0].shape[0]:
        raise ValueError("feature vector shape does not match first layer")
    return forward_batch(params, x[None, :])[0]


def cross_entropy(probs: np.ndarray, label: int) -> float:
    """-log p(label), with the probability floored at 1e-12."""
    return float(-np.log(max(float(probs[label]), _LOSS_FLOOR)))


def _batch_gradients(
    params: MlpParams, x: np.ndarray, labels: np.ndarray
) -> tuple[list[np.ndarray], list[np.ndarray], float]:
    """Mean cross-entropy gradients over a batch, plus the mean loss."""
    activations = [x]
    a = x
    for w, b in zip(params.weights[:-1], params.biases[:-1]):
        a = np.maximum(a @ w + b, 0.0)
        activations.append(a)
    probs = softmax(a @ params.weights[-1] + params.biases[-1])
    m = x.shape[0]
    loss = float(
        -np.mean(np.log(np.maximum(probs[np.arange(m), labels], _LOSS_FLOOR)))
    )
    delta = probs.copy()
    delta[np.arange(m), labels] -= 1.0
    delta /= m
    grads_w = [np.empty(0)] * len(params.weights)
    grads_b = [np.empty(0)] * len(params.biases)
    for layer in reversed(range(len(params.weights))):
        grads_w[layer] = activations[layer].T @ delta
        grads_b[layer] = delta.sum(axis=0)
        if layer > 0:
            delta = (delta @ params.weights[layer].T) * (activations[layer] > 0)
    return grads_w, grads_b, loss


def train_epoch(
    params: MlpParams,
    ds: LabeledDataset,
    indices: np.ndarray,
    cfg: TrainConfig,
    stream: RandomStream,
) -> tuple[MlpParams, float]:
    """One pass of mini-batch SGD with momentum and weight decay.

    Trains against noisy labels over a stream-shuffled permutation of the
    given indices. Updates params in place and returns (params, mean loss).
    """
    indices = np.asarray(indices)
    if indices.size == 0:
        raise ValueError("empty training subset")
    order = stream.permutation(indices)
    total_loss = 0.0
    for start in range(0, order.size, cfg.batch_size):
        batch = order[start : start + cfg.batch_size]
        x = ds.features[batch]
        labels = ds.noisy_labels[batch]
        grads_w, grads_b, loss = _batch_gradients(params, x, labels)
        total_loss += loss * batch.size
        for layer in range(len(params.weights)):
            gw = grads_w[layer] + cfg.weight_decay * params.weights[layer]
            params.vel_w[layer] = cfg.momentum * params.vel_w[layer] + gw
            params.weights[layer] -= cfg.learning_rate * params.vel_w[layer]
            params.vel_b[layer] = cfg.momentum * params.vel_b[layer] + grads_b[layer]
            params.biases[layer] -= cfg.learning_rate * params.vel_b[layer]
    return params, total_loss / order.size


def predict_all(params: MlpParams, ds: LabeledDataset, indices: np.ndarray) -> np.ndarray:
    """Probability matrix with one simplex row per requested sample."""
    return forward_batch(params, ds.features[np.asarray(indices)])


def _example_gradients(
    params: MlpParams, x: np.ndarray, label: int
) -> tuple[list[np.ndarray], list[np.ndarray]]:
    gw, gb, _ = _batch_gradients(params, x[None, :], np.array([label]))
    return gw, gb


def gradient_check(
    params: MlpParams, x: np.ndarray, label: int, h: float = 1e-5
) -> float:
    """Max relative error of analytic vs central finite-difference gradients.

    Entries where both gradients are below 1e-6 in magnitude are compared
    absolutely (a vanishing gradient should be reproduced as ~0, not
    blown up by a relative denominator). Intended for nets <= 1000 params.
    """
    if params.n_params > 1000:
        raise ValueError("gradient_check is for tiny networks (<= 1000 params)")
    x = np.asarray(x, dtype=np.float64)
    grads_w, grads_b = _example_gradients(params, x, label)

    def loss_at() -> float:
        return cross_entropy(forward(params, x), label)

    worst = 0.0
    for analytic, tensor in zip(grads_w + grads_b, params.weights + params.biases):
        it = np.nditer(tensor, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            orig = tensor[idx]
            tensor[idx] = orig + h
            up = loss_at()
            tensor[idx] = orig - h
            down = loss_at()
            tensor[idx] = orig
            numeric = (up - down) / (2.0 * h)
            a = float(analytic[idx])
            diff = abs(a - numeric)
            denom = max(abs(a), abs(numeric))
            err = diff / denom if denom > 1e-6 else diff
            worst = max(worst, err)
    return worst


def save_params_csv(params: MlpParams, path: str) -> None:
    """Checkpoint as CSV rows tensor,row,col,value (17 significant digits).

    Tensor names: w{i}, b{i}, vw{i}, vb{i} per layer i; bias rows use col 0.
    """
    groups = [
        ("w", params.weights),
        ("b", params.biases),
        ("vw", params.vel_w),
        ("vb", params.vel_b),
    ]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("tensor,row,col,value\n")
        for tag, tensors in groups:
            for layer, tensor in enumerate(tensors):
                mat = np.atleast_2d(tensor) if tensor.ndim == 1 else tensor
                for r in range(mat.shape[0]):
                    for c in range(mat.shape[1]):
                        fh.write(f"{tag}{layer},{r},{c},{format(mat[r, c], '.17g')}\n")


def load_params_csv(path: str) -> MlpParams:
    """Load a checkpoint written by save_params_csv."""
    entries: dict[str, dict[tuple[int, int], float]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "tensor,row,col,value":
            raise ValueError("malformed checkpoint header")
        for lineno, line in enumerate(fh, start=2):
            cols = line.strip().split(",")
            if len(cols) != 4:
                raise ValueError(f"expected 4 columns at line {lineno}")
            name, r, c, v = cols
            entries.setdefault(name, {})[(int(r), int(c))] = float(v)

    def build(tag: str, layer: int, as_vector: bool) -> np.ndarray:
        cells = entries[f"{tag}{layer}"]
        rows = 1 + max(rc[0] for rc in cells)
        cols = 1 + max(rc[1] for rc in cells)
        arr = np.zeros((rows, cols))
        for (r, c), v in cells.items():
            arr[r, c] = v
        return arr[0] if as_vector else arr

    n_layers = len([name for name in entries if name[0] == "w"])
    weights = [build("w", i, False) for i in range(n_layers)]
    biases = [build("b", i, True) for i in range(n_layers)]
    vel_w = [build("vw", i, False) for i in range(n_layers)]
    vel_b = [build("vb", i, True) for i in range(n_layers)]
    return MlpParams(weights=weights, biases=biases, vel_w=vel_w, vel_b=vel_b)
