"""Isolation Kernel feature maps and the Isolation Distributional Kernel.

A partitioning is ``psi`` centers drawn from the fitting data, each owning a
disc whose radius is the distance to its nearest fellow center. A point maps
to the nearest center of each of the ``t`` partitionings, or to nothing when
that distance exceeds the largest radius of the partitioning. A signal's
embedding is the mean of its points' one-hot maps; similarity is the inner
product of embeddings divided by ``t``.
"""
from __future__ import annotations

import io
import struct
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import _backend
from ._grid import GridIndex, build_grid
from .errors import ConfigError, FileFormatError, FitError
from .rng import SeedLike, as_generator

DEFAULT_PSI = 128
DEFAULT_T = 75


class Hypersphere(NamedTuple):
    center: tuple[float, float]
    radius: float


def as_points(data) -> np.ndarray:
    """Coerce a complex signal, list of signals or ``(n, 2)`` array to ``(n, 2)`` float64."""
    if isinstance(data, (list, tuple)) and data and np.ndim(data[0]) == 1 and np.iscomplexobj(data[0]):
        data = np.concatenate([np.asarray(d) for d in data])
    arr = np.asarray(data)
    if np.iscomplexobj(arr):
        arr = np.ascontiguousarray(arr.ravel(), dtype=np.complex128)
        return arr.view(np.float64).reshape(-1, 2)
    arr = np.asarray(arr, dtype=np.float64)
    if arr.ndim == 1 and arr.size == 2:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"expected complex samples or an (n, 2) array, got shape {arr.shape}")
    return np.ascontiguousarray(arr)


@dataclass(eq=False)
class IsolationPartitioning:
    """``t`` partitionings of ``psi`` hyperspheres; immutable once fitted."""

    centers: np.ndarray  # (t, psi, 2)
    radii2: np.ndarray  # (t, psi) squared radii
    seed: int | None = None
    format_id: int | None = None
    _index: GridIndex | None = field(default=None, repr=False)

    def __post_init__(self):
        self.centers = np.ascontiguousarray(self.centers, dtype=np.float64)
        self.radii2 = np.ascontiguousarray(self.radii2, dtype=np.float64)
        if self.centers.ndim != 3 or self.centers.shape[2] != 2:
            raise ValueError("centers must have shape (t, psi, 2)")
        if self.radii2.shape != self.centers.shape[:2]:
            raise ValueError("radii2 must have shape (t, psi)")
        if self.psi < 2:
            raise ValueError("psi must be at least 2")
        self.centers.setflags(write=False)
        self.radii2.setflags(write=False)

    @property
    def t(self) -> int:
        return self.centers.shape[0]

    @property
    def psi(self) -> int:
        return self.centers.shape[1]

    @property
    def dim(self) -> int:
        return self.t * self.psi

    @property
    def radii(self) -> np.ndarray:
        return np.sqrt(self.radii2)

    @property
    def index(self) -> GridIndex:
        if self._index is None:
            self._index = build_grid(self.centers, self.radii2)
        return self._index

    def spheres(self, j: int) -> list[Hypersphere]:
        radii = self.radii[j]
        return [
            Hypersphere((float(c[0]), float(c[1])), float(r))
            for c, r in zip(self.centers[j], radii)
        ]

    def __eq__(self, other):
        if not isinstance(other, IsolationPartitioning):
            return NotImplemented
        return (
            self.seed == other.seed
            and self.format_id == other.format_id
            and np.array_equal(self.centers, other.centers)
            and np.array_equal(self.radii2, other.radii2)
        )


def fit(points, psi: int = DEFAULT_PSI, t: int = DEFAULT_T, seed: SeedLike = None,
        format_id: int | None = None) -> IsolationPartitioning:
    """Draw ``t`` partitionings of ``psi`` distinct sample indices from ``points``."""
    pts = as_points(points)
    if psi < 2:
        raise FitError(f"psi must be at least 2, got {psi}")
    if t < 1:
        raise FitError(f"t must be at least 1, got {t}")
    if pts.shape[0] < psi:
        raise FitError(f"fitting needs at least psi={psi} points, got {pts.shape[0]}")
    rng = as_generator(seed)
    centers = np.empty((t, psi, 2))
    radii2 = np.empty((t, psi))
    for j in range(t):
        c = pts[rng.choice(pts.shape[0], size=psi, replace=False)]
        d = c[:, None, :] - c[None, :, :]
        d2 = d[..., 0] * d[..., 0] + d[..., 1] * d[..., 1]
        np.fill_diagonal(d2, np.inf)
        centers[j] = c
        radii2[j] = d2.min(axis=1)
    stored_seed = int(seed) if isinstance(seed, (int, np.integer)) else None
    return IsolationPartitioning(centers, radii2, seed=stored_seed, format_id=format_id)


def map_points(p: IsolationPartitioning, points, backend: str | None = None) -> np.ndarray:
    """Active sphere index per point and partitioning, shape ``(n, t)``; -1 is "none"."""
    return _backend.get(backend).assign(as_points(points), p.index)


def map_point(p: IsolationPartitioning, x, backend: str | None = None) -> np.ndarray:
    """Sparse feature map of one point: ``t`` indices, -1 where no sphere is active."""
    return map_points(p, x, backend)[0]


def dense_feature(p: IsolationPartitioning, active) -> np.ndarray:
    """Expand a sparse point feature into the binary ``t * psi`` vector."""
    vec = np.zeros(p.dim)
    active = np.asarray(active)
    on = active >= 0
    vec[np.arange(p.t)[on] * p.psi + active[on]] = 1.0
    return vec


@dataclass(frozen=True, eq=False)
class DistributionEmbedding:
    vector: np.ndarray
    sample_count: int
    t: int

    def __len__(self):
        return self.vector.size


def embed_many(p: IsolationPartitioning, signals: Sequence, backend: str | None = None) -> np.ndarray:
    """Embedding vectors of several signals as a ``(n, t * psi)`` array."""
    return _backend.get(backend).embed(list(signals), p.index)


def embed(p: IsolationPartitioning, signal, backend: str | None = None) -> DistributionEmbedding:
    signal = np.asarray(signal)
    if not np.iscomplexobj(signal):
        pts = as_points(signal)
        signal = pts[:, 0] + 1j * pts[:, 1]
    if signal.size == 0:
        raise ValueError("cannot embed an empty signal")
    vec = embed_many(p, [signal], backend)[0]
    return DistributionEmbedding(vec, int(signal.size), p.t)


def similarity(a: DistributionEmbedding, b: DistributionEmbedding) -> float:
    if a.vector.shape != b.vector.shape or a.t != b.t:
        raise ConfigError(
            f"embedding dimensions differ: {a.vector.size} (t={a.t}) vs {b.vector.size} (t={b.t})"
        )
    return float(np.dot(a.vector, b.vector)) / a.t


def similarity_matrix(embeddings: np.ndarray, t: int) -> np.ndarray:
    """Pairwise similarities of the rows of ``embeddings``."""
    e = np.asarray(embeddings, dtype=np.float64)
    gram = e @ e.T / t
    return (gram + gram.T) / 2.0


class Reference(NamedTuple):
    format: object
    partitioning: IsolationPartitioning
    embedding: DistributionEmbedding


def classify_by_similarity(signal, references: Sequence[Reference]):
    """Return the reference format whose embedding is most similar to ``signal``.

    Each reference is scored under its own partitioning; ties go to the lowest
    format id.
    """
    if not references:
        raise ConfigError("classify_by_similarity needs at least one reference")
    best = None
    for ref in references:
        score = similarity(embed(ref.partitioning, signal), ref.embedding)
        key = (-score, _format_id(ref.format))
        if best is None or key < best[0]:
            best = (key, ref.format)
    return best[1]


def _format_id(fmt):
    return fmt if isinstance(fmt, (int, np.integer)) else fmt.id


# --- serialization -------------------------------------------------------

_MAGIC = b"IDKPART\0"
_VERSION = 1
_HEADER = struct.Struct("<8sHI")
_ENTRY = struct.Struct("<iIIq")


def dump_partitionings(parts: Sequence[IsolationPartitioning]) -> bytes:
    """Little-endian binary form: header, then per entry
    (format id, psi, t, seed) followed by centers and squared radii as float64."""
    buf = io.BytesIO()
    buf.write(_HEADER.pack(_MAGIC, _VERSION, len(parts)))
    for p in parts:
        fid = -1 if p.format_id is None else int(p.format_id)
        seed = -1 if p.seed is None else int(p.seed)
        buf.write(_ENTRY.pack(fid, p.psi, p.t, seed))
        buf.write(p.centers.astype("<f8").tobytes())
        buf.write(p.radii2.astype("<f8").tobytes())
    return buf.getvalue()


def load_partitionings(data: bytes) -> list[IsolationPartitioning]:
    if len(data) < _HEADER.size:
        raise FileFormatError("partitioning file truncated")
    magic, version, count = _HEADER.unpack_from(data, 0)
    if magic != _MAGIC:
        raise FileFormatError("not a partitioning file (bad magic)")
    if version != _VERSION:
        raise FileFormatError(f"unsupported partitioning file version {version}")
    pos = _HEADER.size
    parts = []
    for _ in range(count):
        if pos + _ENTRY.size > len(data):
            raise FileFormatError("partitioning file truncated")
        fid, psi, t, seed = _ENTRY.unpack_from(data, pos)
        pos += _ENTRY.size
        n_c, n_r = t * psi * 2, t * psi
        need = 8 * (n_c + n_r)
        if pos + need > len(data):
            raise FileFormatError("partitioning file truncated")
        centers = np.frombuffer(data, "<f8", n_c, pos).reshape(t, psi, 2)
        pos += 8 * n_c
        radii2 = np.frombuffer(data, "<f8", n_r, pos).reshape(t, psi)
        pos += 8 * n_r
        parts.append(IsolationPartitioning(
            centers.astype(np.float64), radii2.astype(np.float64),
            seed=None if seed < 0 else seed,
            format_id=None if fid < 0 else fid,
        ))
    return parts


def save_partitionings(path, parts: Sequence[IsolationPartitioning]) -> None:
    with open(path, "wb") as fh:
        fh.write(dump_partitionings(parts))


def read_partitionings(path) -> list[IsolationPartitioning]:
    with open(path, "rb") as fh:
        return load_partitionings(fh.read())
