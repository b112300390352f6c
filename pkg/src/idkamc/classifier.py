"""IDK-OGD: one linear scorer per modulation format over that format's
distribution embedding, trained online with hinge-loss gradient steps.

Each batch goes through a classification stage (argmax of the per-format
scores) and, only when ground-truth labels are present, an update stage.
"""
from __future__ import annotations

import hashlib
import logging
import os
import struct
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import isokernel
from .constellation import ModulationFormat, get_format
from .errors import ConfigError, FileFormatError

log = logging.getLogger(__name__)

DEFAULT_LEARNING_RATE = 0.01
DEFAULT_BATCH_SIZE = 100

UPDATE_RULES = ("ovr", "literal")


@dataclass
class LabeledBatch:
    """Signals arriving together; ``labels`` are format ids or ``None``."""

    signals: Sequence[np.ndarray]
    labels: np.ndarray | None = None
    condition_tag: object = None

    def __post_init__(self):
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int64)
            if self.labels.shape != (len(self.signals),):
                raise ConfigError(
                    f"batch has {len(self.signals)} signals but {self.labels.size} labels"
                )

    def __len__(self):
        return len(self.signals)

    @property
    def has_labels(self) -> bool:
        return self.labels is not None


@dataclass
class OgdModel:
    """Per-format weight vectors plus the fitted partitionings they score.

    Formats are kept sorted by id, so the argmax tie-break (first maximum)
    returns the lowest format id.

    Parameters
    ----------
    formats : sequence of ModulationFormat or names
    partitionings : sequence of IsolationPartitioning
        One per format, in the same order as ``formats``.
    learning_rate : float
    update_rule : {"ovr", "literal"}
        ``"ovr"`` uses a per-format target of +1 for the true format and -1
        otherwise. ``"literal"`` applies one sign per sample, +1 when the
        prediction was right and -1 when it was wrong, to every scorer.
    """

    formats: Sequence[ModulationFormat]
    partitionings: Sequence[isokernel.IsolationPartitioning]
    learning_rate: float = DEFAULT_LEARNING_RATE
    update_rule: str = "ovr"
    weights: list[np.ndarray] = field(default=None)
    degenerate_count: int = 0

    def __post_init__(self):
        formats = [get_format(f) for f in self.formats]
        parts = list(self.partitionings)
        if len(formats) != len(parts):
            raise ConfigError(
                f"{len(formats)} formats but {len(parts)} partitionings"
            )
        if not formats:
            raise ConfigError("model needs at least one format")
        if len({f.id for f in formats}) != len(formats):
            raise ConfigError("duplicate formats in model")
        if self.learning_rate < 0:
            raise ConfigError("learning_rate must be non-negative")
        if self.update_rule not in UPDATE_RULES:
            raise ConfigError(f"update_rule must be one of {UPDATE_RULES}")
        order = np.argsort([f.id for f in formats], kind="stable")
        self.formats = [formats[i] for i in order]
        self.partitionings = [parts[i] for i in order]
        if self.weights is None:
            self.weights = [np.zeros(p.dim) for p in self.partitionings]
        else:
            weights = [np.asarray(self.weights[i], dtype=np.float64).copy() for i in order]
            for w, p in zip(weights, self.partitionings):
                if w.shape != (p.dim,):
                    raise ConfigError(f"weight length {w.size} does not match t*psi={p.dim}")
            self.weights = weights
        self._column = {f.id: j for j, f in enumerate(self.formats)}

    @property
    def m(self) -> int:
        return len(self.formats)

    @property
    def format_ids(self) -> np.ndarray:
        return np.array([f.id for f in self.formats], dtype=np.int64)

    def copy(self) -> "OgdModel":
        return OgdModel(
            self.formats, self.partitionings, self.learning_rate, self.update_rule,
            weights=[w.copy() for w in self.weights], degenerate_count=self.degenerate_count,
        )

    def state_digest(self) -> str:
        h = hashlib.sha256()
        for w in self.weights:
            h.update(w.tobytes())
        return h.hexdigest()

    # -- stages ------------------------------------------------------------

    def embed_batch(self, signals) -> list[np.ndarray]:
        """Per-format embeddings: list of ``m`` arrays of shape ``(n, t*psi)``."""
        signals = list(signals)
        return [isokernel.embed_many(p, signals) for p in self.partitionings]

    def scores(self, embeddings: list[np.ndarray]) -> np.ndarray:
        return np.stack([e @ w for e, w in zip(embeddings, self.weights)], axis=1)

    def _predict_from(self, embeddings):
        if embeddings[0].shape[0] == 0:
            return np.zeros(0, dtype=np.int64), np.zeros((0, self.m))
        g = self.scores(embeddings)
        degenerate = np.all([~e.any(axis=1) for e in embeddings], axis=0)
        if degenerate.any():
            self.degenerate_count += int(degenerate.sum())
            log.debug("%d signals embedded to all-zero vectors", degenerate.sum())
        return self.format_ids[np.argmax(g, axis=1)], g

    def predict_batch(self, batch) -> np.ndarray:
        """Predicted format ids; the weights are not touched."""
        signals = batch.signals if isinstance(batch, LabeledBatch) else batch
        pred, _ = self._predict_from(self.embed_batch(signals))
        return pred

    def _columns(self, labels):
        try:
            return np.array([self._column[int(c)] for c in labels], dtype=np.int64)
        except KeyError as exc:
            raise ConfigError(f"label {exc.args[0]} is not a format of this model") from None

    def _update_from(self, embeddings, g, labels, predictions) -> int:
        n = labels.size
        if n == 0 or self.learning_rate == 0:
            return 0
        if self.update_rule == "ovr":
            y = -np.ones((n, self.m))
            y[np.arange(n), self._columns(labels)] = 1.0
        else:
            k = np.where(np.asarray(predictions) == labels, 1.0, -1.0)
            y = np.repeat(k[:, None], self.m, axis=1)
        # hinge gradient is nonzero only inside the margin
        step = np.where(y * g < 1.0, self.learning_rate * y, 0.0)
        for j in range(self.m):
            active = np.nonzero(step[:, j])[0]
            # samples accumulate in batch order
            for i in active:
                self.weights[j] += step[i, j] * embeddings[j][i]
        return int(np.count_nonzero(step))

    def update_batch(self, batch: LabeledBatch, predictions=None, embeddings=None) -> int | None:
        """Apply the hinge update for every (sample, format) inside the margin.

        Scores are those of the classification stage, i.e. the weights as they
        were when the batch arrived. Returns the number of (sample, format)
        pairs that moved a weight vector, or ``None`` when the batch carries no
        labels and the update is skipped.
        """
        if not batch.has_labels:
            return None
        if embeddings is None:
            embeddings = self.embed_batch(batch.signals)
        if len(batch) == 0:
            return 0
        g = self.scores(embeddings)
        if predictions is None:
            predictions = self.format_ids[np.argmax(g, axis=1)]
        return self._update_from(embeddings, g, batch.labels, predictions)

    def process_stream_step(self, batch: LabeledBatch, embeddings=None):
        """Classify the batch, then update if labels are present.

        Returns ``(predictions, updated)`` where ``updated`` is the
        :meth:`update_batch` result. ``embeddings`` may carry a precomputed
        :meth:`embed_batch` result for the same signals.
        """
        emb = self.embed_batch(batch.signals) if embeddings is None else embeddings
        pred, g = self._predict_from(emb)
        if not batch.has_labels:
            return pred, None
        return pred, self._update_from(emb, g, batch.labels, pred)

    def warm_start(self, signals, labels, batch_size: int = DEFAULT_BATCH_SIZE,
                   epochs: int = 1, embeddings=None) -> None:
        """Run the update stage over the initial training set ``epochs`` times."""
        labels = np.asarray(labels, dtype=np.int64)
        if embeddings is None:
            embeddings = self.embed_batch(signals)
        n = labels.size
        for _ in range(epochs):
            for start in range(0, n, batch_size):
                sl = slice(start, start + batch_size)
                emb = [e[sl] for e in embeddings]
                g = self.scores(emb)
                pred = self.format_ids[np.argmax(g, axis=1)]
                self._update_from(emb, g, labels[sl], pred)


def fit_partitionings(signals, labels, formats, psi=isokernel.DEFAULT_PSI,
                      t=isokernel.DEFAULT_T, seed=None):
    """Fit one partitioning per format on the pooled points of its training signals."""
    labels = np.asarray(labels)
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    seeds = ss.spawn(len(formats))
    parts = []
    for fmt, ss in zip(formats, seeds):
        fmt = get_format(fmt)
        own = [signals[i] for i in np.nonzero(labels == fmt.id)[0]]
        if not own:
            raise ConfigError(f"no training signals of format {fmt.name}")
        pts = isokernel.as_points(np.concatenate(own))
        parts.append(isokernel.fit(pts, psi, t, np.random.default_rng(ss), format_id=fmt.id))
    return parts


# --- checkpoints ---------------------------------------------------------

_MAGIC = b"IDKOGD\0\0"
_VERSION = 1
_HEAD = struct.Struct("<8sHdBQH")


def save_model(model: OgdModel, path, partitionings_path=None) -> str:
    """Write the checkpoint and, unless given, a sibling partitioning file.

    The checkpoint stores the partitioning file path relative to itself.
    Returns the partitioning file path.
    """
    path = os.fspath(path)
    if partitionings_path is None:
        partitionings_path = os.path.splitext(path)[0] + ".idkp"
        isokernel.save_partitionings(partitionings_path, model.partitionings)
    rel = os.path.relpath(partitionings_path, os.path.dirname(os.path.abspath(path)) or ".")
    ref = rel.encode("utf-8")
    rule = UPDATE_RULES.index(model.update_rule)
    with open(path, "wb") as fh:
        fh.write(_HEAD.pack(_MAGIC, _VERSION, model.learning_rate, rule,
                            model.degenerate_count, len(ref)))
        fh.write(ref)
        fh.write(struct.pack("<H", model.m))
        for fmt, w in zip(model.formats, model.weights):
            fh.write(struct.pack("<HI", fmt.id, w.size))
            fh.write(w.astype("<f8").tobytes())
    return partitionings_path


def load_model(path) -> OgdModel:
    path = os.fspath(path)
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _HEAD.size:
        raise FileFormatError("checkpoint truncated")
    magic, version, lr, rule, degenerate, ref_len = _HEAD.unpack_from(data, 0)
    if magic != _MAGIC:
        raise FileFormatError("not an IDK-OGD checkpoint (bad magic)")
    if version != _VERSION:
        raise FileFormatError(f"unsupported checkpoint version {version}")
    pos = _HEAD.size
    ref = data[pos:pos + ref_len].decode("utf-8")
    pos += ref_len
    (m,) = struct.unpack_from("<H", data, pos)
    pos += 2
    ids, weights = [], []
    for _ in range(m):
        fid, dim = struct.unpack_from("<HI", data, pos)
        pos += 6
        weights.append(np.frombuffer(data, "<f8", dim, pos).astype(np.float64))
        pos += 8 * dim
        ids.append(fid)
    parts_path = os.path.join(os.path.dirname(os.path.abspath(path)), ref)
    parts = {p.format_id: p for p in isokernel.read_partitionings(parts_path)}
    missing = [i for i in ids if i not in parts]
    if missing:
        raise FileFormatError(f"partitioning file lacks formats {missing}")
    return OgdModel(
        [get_format(i) for i in ids], [parts[i] for i in ids], lr, UPDATE_RULES[rule],
        weights=weights, degenerate_count=degenerate,
    )
