"""Candidate modulation formats and clean baseband signal generation.

Signals are plain one-dimensional ``complex128`` numpy arrays, one complex
sample per symbol.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigError
from .rng import SeedLike, as_generator

FORMAT_NAMES = (
    "4ASK",
    "8ASK",
    "BPSK",
    "QPSK",
    "8PSK",
    "16APSK",
    "32APSK",
    "16QAM",
    "32QAM",
    "64QAM",
)

_ORDERS = {"BPSK": 2, "QPSK": 4}

# DVB-S2 ring layouts
APSK16_RATIO = 2.57
APSK32_RATIOS = (2.53, 4.30)


@dataclass(frozen=True)
class ModulationFormat:
    id: int
    name: str
    order: int

    def __str__(self):
        return self.name


def _order_of(name):
    if name in _ORDERS:
        return _ORDERS[name]
    digits = ""
    for ch in name:
        if not ch.isdigit():
            break
        digits += ch
    return int(digits)


ALL_FORMATS = tuple(
    ModulationFormat(i, name, _order_of(name)) for i, name in enumerate(FORMAT_NAMES)
)


def get_format(key) -> ModulationFormat:
    """Look up a format by name (case-insensitive), id, or pass one through."""
    if isinstance(key, ModulationFormat):
        return key
    if isinstance(key, (int, np.integer)):
        if 0 <= int(key) < len(ALL_FORMATS):
            return ALL_FORMATS[int(key)]
        raise ConfigError(f"unknown modulation format id {key!r}")
    name = str(key).strip().upper()
    for fmt in ALL_FORMATS:
        if fmt.name == name:
            return fmt
    raise ConfigError(
        f"unknown modulation format {key!r}; expected one of {', '.join(FORMAT_NAMES)}"
    )


def parse_formats(spec) -> list[ModulationFormat]:
    """Parse ``"BPSK,QPSK"`` or a list of names/ids into formats."""
    if isinstance(spec, str):
        spec = [s for s in spec.split(",") if s.strip()]
    fmts = [get_format(s) for s in spec]
    if len({f.id for f in fmts}) != len(fmts):
        raise ConfigError("duplicate modulation formats in list")
    return fmts


def _gray(n):
    return n ^ (n >> 1)


def _ask(order):
    return np.arange(-(order - 1), order, 2, dtype=np.float64).astype(np.complex128)


def _psk(order):
    return np.exp(2j * np.pi * np.arange(order) / order)


def _ring(n, radius, offset):
    return radius * np.exp(1j * (offset + 2 * np.pi * np.arange(n) / n))


def _apsk16():
    return np.concatenate([
        _ring(4, 1.0, np.pi / 4),
        _ring(12, APSK16_RATIO, np.pi / 12),
    ])


def _apsk32():
    r2, r3 = APSK32_RATIOS
    return np.concatenate([
        _ring(4, 1.0, np.pi / 4),
        _ring(12, r2, np.pi / 12),
        _ring(16, r3, 0.0),
    ])


def _square_qam(order):
    side = int(round(np.sqrt(order)))
    levels = np.arange(-(side - 1), side, 2, dtype=np.float64)
    pts = np.empty(order, dtype=np.complex128)
    # symbol label -> Gray-adjacent grid position on each rail
    for pi in range(side):
        for pq in range(side):
            label = _gray(pi) * side + _gray(pq)
            pts[label] = levels[pi] + 1j * levels[pq]
    return pts


def _cross_qam32():
    levels = np.arange(-5, 6, 2, dtype=np.float64)
    pts = [
        i + 1j * q
        for i in levels
        for q in levels
        if not (abs(i) == 5 and abs(q) == 5)
    ]
    return np.array(pts, dtype=np.complex128)


_BUILDERS = {
    "4ASK": lambda: _ask(4),
    "8ASK": lambda: _ask(8),
    "BPSK": lambda: _psk(2),
    "QPSK": lambda: _psk(4) * np.exp(1j * np.pi / 4),
    "8PSK": lambda: _psk(8),
    "16APSK": _apsk16,
    "32APSK": _apsk32,
    "16QAM": lambda: _square_qam(16),
    "32QAM": _cross_qam32,
    "64QAM": lambda: _square_qam(64),
}


@lru_cache(maxsize=None)
def _table(name):
    pts = _BUILDERS[name]()
    pts = pts / np.sqrt(np.mean(np.abs(pts) ** 2))
    # exact zeros instead of 1e-17 residue from exp()
    pts = np.round(pts.real, 15) + 1j * np.round(pts.imag, 15)
    pts = pts / np.sqrt(np.mean(np.abs(pts) ** 2))
    pts.setflags(write=False)
    return pts


def build_table(fmt) -> np.ndarray:
    """Return the unit-energy constellation of ``fmt`` as a read-only array.

    QPSK sits on the diagonals, ``(+-1 +-1j)/sqrt(2)``; the other PSK
    formats start at angle 0.
    """
    return _table(get_format(fmt).name)


def generate_signal(fmt, length: int, seed: SeedLike = None) -> np.ndarray:
    """Draw ``length`` i.i.d. uniform symbols from the constellation of ``fmt``."""
    if length <= 0:
        raise ConfigError(f"signal length must be positive, got {length}")
    table = build_table(fmt)
    rng = as_generator(seed)
    return table[rng.integers(0, table.size, size=length)]
