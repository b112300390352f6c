"""fKNN: normalized high-order moment features with an online-retrained kNN.

The store keeps every labeled example it has seen, so prediction cost grows
with the stream.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .errors import ConfigError, FeatureError

MOMENT_ORDERS = ((2, 0), (2, 1), (4, 0), (4, 1), (4, 2), (6, 0), (6, 3), (8, 0))
DEFAULT_K = 15


def extract_moments(signal) -> np.ndarray:
    """Return ``|M_pq| / M_21**(p/2)`` for each ``(p, q)`` in ``MOMENT_ORDERS``.

    ``M_pq = mean(s**(p-q) * conj(s)**q)``.

    Examples
    --------
    >>> extract_moments(np.array([1, -1, 1, -1], dtype=complex))[2]
    1.0
    """
    s = np.asarray(signal, dtype=np.complex128).ravel()
    if s.size == 0:
        raise FeatureError("cannot extract moments from an empty signal")
    m21 = float(np.mean(s.real * s.real + s.imag * s.imag))
    if not m21 > 0.0:
        raise FeatureError("signal has zero power")
    sc = np.conj(s)
    powers = {1: s}
    for n in range(2, 9):
        powers[n] = powers[n - 1] * s
    conj_powers = {0: None, 1: sc}
    for n in range(2, 5):
        conj_powers[n] = conj_powers[n - 1] * sc
    out = np.empty(len(MOMENT_ORDERS))
    for i, (p, q) in enumerate(MOMENT_ORDERS):
        if q == 0:
            term = powers[p]
        elif p == q:
            term = conj_powers[q]
        else:
            term = powers[p - q] * conj_powers[q]
        out[i] = abs(np.mean(term)) / m21 ** (p / 2)
    return out


def extract_many(signals) -> np.ndarray:
    signals = list(signals)
    if not signals:
        return np.zeros((0, len(MOMENT_ORDERS)))
    return np.stack([extract_moments(s) for s in signals])


@dataclass
class KnnStore:
    k: int = DEFAULT_K
    features: np.ndarray = field(default_factory=lambda: np.zeros((0, len(MOMENT_ORDERS))))
    labels: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError(f"k must be at least 1, got {self.k}")
        self.features = np.asarray(self.features, dtype=np.float64).reshape(-1, len(MOMENT_ORDERS))
        self.labels = np.asarray(self.labels, dtype=np.int64)

    def __len__(self):
        return self.labels.size

    def add(self, features, labels) -> None:
        features = np.asarray(features, dtype=np.float64).reshape(-1, len(MOMENT_ORDERS))
        self.features = np.concatenate([self.features, features])
        self.labels = np.concatenate([self.labels, np.asarray(labels, dtype=np.int64)])


def knn_predict_many(store: KnnStore, queries) -> np.ndarray:
    """Majority vote among the ``k`` nearest stored examples (Euclidean).

    Vote ties go to the lowest format id; with fewer than ``k`` examples
    every example votes.
    """
    if len(store) == 0:
        raise ConfigError("kNN store is empty")
    q = np.asarray(queries, dtype=np.float64).reshape(-1, len(MOMENT_ORDERS))
    if q.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    k = min(store.k, len(store))
    d2 = cdist(q, store.features, "sqeuclidean")
    if k < len(store):
        near = np.argpartition(d2, k - 1, axis=1)[:, :k]
    else:
        near = np.broadcast_to(np.arange(len(store)), (q.shape[0], len(store)))
    votes = store.labels[near]
    n_labels = int(store.labels.max()) + 1
    counts = np.zeros((q.shape[0], n_labels), dtype=np.int64)
    np.add.at(counts, (np.arange(q.shape[0])[:, None], votes), 1)
    return np.argmax(counts, axis=1)


def knn_predict(store: KnnStore, features) -> int:
    return int(knn_predict_many(store, np.asarray(features)[None, :])[0])


def knn_retrain(store: KnnStore, batch) -> KnnStore:
    """Append the batch's examples to the store; unlabeled batches are ignored."""
    if batch.labels is None:
        return store
    store.add(extract_many(batch.signals), batch.labels)
    return store
