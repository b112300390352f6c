"""Binary dataset files of labeled I/Q signals.

Layout (little-endian throughout)::

    magic      8 bytes   b"IDKAMCDS"
    version    u16
    m          u16       number of formats in the name table
    names      m x (u8 length, ASCII bytes)
    L          u32       samples per signal
    count      u64       number of records
    records    count x (u8 format index, 3 x f32 condition, 2L x f32 interleaved I/Q)

The condition floats are SNR (dB), phase noise (dBc/Hz) and I/Q imbalance
(dB). The format index points into the name table.
"""
from __future__ import annotations

import os
import struct
from dataclasses import dataclass

import numpy as np

from .channel import ChannelCondition
from .constellation import get_format
from .errors import ConfigError, FileFormatError

MAGIC = b"IDKAMCDS"
VERSION = 1
_HEAD = struct.Struct("<8sHH")
_TAIL = struct.Struct("<IQ")


def record_dtype(length: int) -> np.dtype:
    return np.dtype([("fmt", "u1"), ("cond", "<f4", (3,)), ("iq", "<f4", (2 * length,))])


@dataclass(eq=False)
class DatasetFile:
    """Labeled signals stored at float32 precision.

    ``labels`` index into ``format_names``; ``conditions`` is ``(n, 3)``
    float32; ``samples`` is ``(n, L)`` complex64.
    """

    format_names: tuple
    signal_length: int
    labels: np.ndarray
    conditions: np.ndarray
    samples: np.ndarray

    def __post_init__(self):
        self.format_names = tuple(get_format(n).name for n in self.format_names)
        if not 1 <= len(self.format_names) <= 255:
            raise ConfigError("dataset needs between 1 and 255 formats")
        self.labels = np.asarray(self.labels, dtype=np.uint8)
        self.conditions = np.asarray(self.conditions, dtype=np.float32).reshape(-1, 3)
        self.samples = np.asarray(self.samples, dtype=np.complex64).reshape(-1, self.signal_length)
        n = self.labels.size
        if self.conditions.shape[0] != n or self.samples.shape[0] != n:
            raise ConfigError("labels, conditions and samples disagree on the record count")
        if n and int(self.labels.max()) >= len(self.format_names):
            raise ConfigError("label index outside the format table")

    def __len__(self):
        return self.labels.size

    def __eq__(self, other):
        if not isinstance(other, DatasetFile):
            return NotImplemented
        return (self.format_names == other.format_names
                and self.signal_length == other.signal_length
                and np.array_equal(self.labels, other.labels)
                and self.conditions.tobytes() == other.conditions.tobytes()
                and self.samples.tobytes() == other.samples.tobytes())

    @property
    def format_ids(self) -> np.ndarray:
        """Global format ids of each record."""
        table = np.array([get_format(n).id for n in self.format_names], dtype=np.int64)
        return table[self.labels]

    def condition(self, i: int) -> ChannelCondition:
        return ChannelCondition(*(float(v) for v in self.conditions[i]))

    def signals(self) -> list[np.ndarray]:
        return [s.astype(np.complex128) for s in self.samples]

    @classmethod
    def from_signals(cls, format_names, signals, format_ids, conditions) -> "DatasetFile":
        names = tuple(get_format(n).name for n in format_names)
        pos = {get_format(n).id: i for i, n in enumerate(names)}
        signals = list(signals)
        length = len(signals[0]) if signals else 0
        if any(len(s) != length for s in signals):
            raise ConfigError("all signals must have the same length")
        conds = [(c.snr_db, c.phase_noise_dbc_hz, c.iq_imbalance_db) for c in conditions]
        return cls(names, length, [pos[int(i)] for i in format_ids], np.array(conds, dtype=np.float32),
                   np.array(signals, dtype=np.complex64).reshape(len(signals), length))

    def to_bytes(self) -> bytes:
        parts = [_HEAD.pack(MAGIC, VERSION, len(self.format_names))]
        for name in self.format_names:
            raw = name.encode("ascii")
            parts.append(struct.pack("<B", len(raw)) + raw)
        parts.append(_TAIL.pack(self.signal_length, len(self)))
        rec = np.empty(len(self), dtype=record_dtype(self.signal_length))
        rec["fmt"] = self.labels
        rec["cond"] = self.conditions
        rec["iq"] = self.samples.view(np.float32).reshape(len(self), 2 * self.signal_length)
        parts.append(rec.tobytes())
        return b"".join(parts)

    @classmethod
    def from_bytes(cls, data: bytes) -> "DatasetFile":
        if len(data) < _HEAD.size:
            raise FileFormatError("dataset file truncated")
        magic, version, m = _HEAD.unpack_from(data, 0)
        if magic != MAGIC:
            raise FileFormatError("not a dataset file (bad magic)")
        if version != VERSION:
            raise FileFormatError(f"unsupported dataset version {version}")
        pos = _HEAD.size
        names = []
        for _ in range(m):
            if pos >= len(data):
                raise FileFormatError("dataset file truncated in the format table")
            n = data[pos]
            names.append(data[pos + 1:pos + 1 + n].decode("ascii"))
            pos += 1 + n
        if pos + _TAIL.size > len(data):
            raise FileFormatError("dataset file truncated")
        length, count = _TAIL.unpack_from(data, pos)
        pos += _TAIL.size
        dt = record_dtype(length)
        if len(data) - pos != count * dt.itemsize:
            raise FileFormatError(
                f"dataset body is {len(data) - pos} bytes, expected {count * dt.itemsize}")
        rec = np.frombuffer(data, dtype=dt, count=count, offset=pos)
        samples = np.ascontiguousarray(rec["iq"]).view(np.complex64).reshape(count, length)
        return cls(tuple(names), length, rec["fmt"].copy(), rec["cond"].copy(), samples)


def write_dataset(path, ds: DatasetFile) -> None:
    with open(os.fspath(path), "wb") as fh:
        fh.write(ds.to_bytes())


def read_dataset(path) -> DatasetFile:
    with open(os.fspath(path), "rb") as fh:
        return DatasetFile.from_bytes(fh.read())
