"""Deterministic numeric substrate: softmax, cosine, seeded random streams.

All arithmetic is float64. Randomness comes exclusively from keyed
counter-based Philox streams so that substreams derived from
(master_seed, stream_id) are reproducible regardless of the order in
which other streams are consumed.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1

# A dense float64 matrix/vector is a plain ndarray; RandomStream is a
# numpy Generator over a keyed Philox counter.
Matrix = np.ndarray
RandomStream = np.random.Generator


def derive_stream(master_seed: int, stream_id: int) -> RandomStream:
    """Return an independent random stream keyed by (master_seed, stream_id).

    Identical arguments always yield the identical value sequence; distinct
    stream ids yield statistically independent streams.
    """
    key = np.array([master_seed & _MASK64, stream_id & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def softmax(logits: np.ndarray) -> np.ndarray:
    """Map logits onto the probability simplex, stable under max-subtraction.

    Accepts a vector or a matrix (softmax over the last axis).
    """
    z = np.asarray(logits, dtype=np.float64)
    if not np.all(np.isfinite(z)):
        raise ValueError("non-finite logits")
    shifted = z - z.max(axis=-1, keepdims=True)
    exps = np.exp(shifted)
    return exps / exps.sum(axis=-1, keepdims=True)


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity u.v / (|u||v|); in [0, 1] for nonnegative inputs."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape or u.ndim != 1 or u.size < 2:
        raise ValueError("cosine expects two equal-length vectors of size >= 2")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise ValueError("degenerate prediction vector")
    return float(np.dot(u, v) / (nu * nv))
