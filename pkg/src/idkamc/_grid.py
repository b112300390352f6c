"""Exact uniform-grid index for nearest-center lookup in 2-D.

For each partitioning the bounding box of its centers is grown by the
largest radius; a point outside that box is farther than the largest radius
from every center and maps to nothing. Inside, the box is cut into
``G x G`` cells and each cell keeps the centers that can be nearest to some
point of the cell: center ``c`` is kept when its minimum distance to the cell
does not exceed the smallest maximum distance of any center to the cell.
Candidate lists are sorted by center index so a strict ``<`` scan keeps the
lowest index among equidistant centers.

``code`` resolves whole cells where possible: ``k >= 0`` when center ``k`` is
the only candidate and the cell lies within the largest radius of it, ``-1``
when the cell lies beyond the largest radius of every center, ``-2`` when the
candidate list has to be scanned.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend

# relative slack on the pruning test and cell boxes; extra candidates are harmless
_SLACK = 1e-9


@dataclass(frozen=True)
class GridIndex:
    lo: np.ndarray  # (t, 2)
    hi: np.ndarray  # (t, 2)
    inv_h: np.ndarray  # (t, 2)
    grid: int
    max_r2: np.ndarray  # (t,)
    ptr: np.ndarray  # (t * grid * grid + 1,) int64 offsets into idx
    idx: np.ndarray  # int32 center indices
    code: np.ndarray  # (t * grid * grid,) int32 resolved cells
    centers: np.ndarray  # (t, psi, 2)

    @property
    def t(self):
        return self.centers.shape[0]

    @property
    def psi(self):
        return self.centers.shape[1]

    def padded(self):
        """Candidate table padded with -1, shape ``(t, grid*grid, width)``."""
        cached = getattr(self, "_padded", None)
        if cached is not None:
            return cached
        counts = np.diff(self.ptr)
        width = int(counts.max())
        pad = np.full((counts.size, width), -1, dtype=np.int64)
        cols = np.arange(self.idx.size) - np.repeat(self.ptr[:-1], counts)
        rows = np.repeat(np.arange(counts.size), counts)
        pad[rows, cols] = self.idx
        pad = pad.reshape(self.t, self.grid * self.grid, width)
        object.__setattr__(self, "_padded", pad)
        return pad


def default_grid_size(psi: int) -> int:
    # about 16 cells per center; finer grids stop paying off once the
    # lookup is bound by memory latency rather than the candidate scan
    return max(1, int(np.ceil(4.0 * np.sqrt(psi))))


def build_grid(centers: np.ndarray, radii2: np.ndarray, grid: int | None = None,
               backend: str | None = None) -> GridIndex:
    """Build the index from ``centers`` (t, psi, 2) and squared radii (t, psi)."""
    centers = np.ascontiguousarray(centers, dtype=np.float64)
    t, psi, _ = centers.shape
    g = default_grid_size(psi) if grid is None else int(grid)
    if g < 1:
        raise ValueError("grid size must be at least 1")
    max_r2 = radii2.max(axis=1)
    max_r = np.sqrt(max_r2)

    margin = max_r * (1.0 + _SLACK) + _SLACK
    lo = centers.min(axis=1) - margin[:, None]
    hi = centers.max(axis=1) + margin[:, None]
    width = np.maximum(hi - lo, 1e-300)
    inv_h = g / width
    h = width / g
    ptr, idx, code = _backend.get(backend).grid_tables(centers, lo, h, max_r2, g, _SLACK)
    return GridIndex(
        lo=lo,
        hi=hi,
        inv_h=inv_h,
        grid=g,
        max_r2=max_r2,
        ptr=ptr,
        idx=idx,
        code=code,
        centers=centers,
    )
