"""Vectorized numpy implementation of the hot kernels.

Same arithmetic as the compiled module, so both backends return identical
indices and embeddings.
"""
import numpy as np


def assign(points, index):
    """Active center per (point, partitioning): int32 array (n, t), -1 = none."""
    pts = np.ascontiguousarray(points, dtype=np.float64).reshape(-1, 2)
    n = pts.shape[0]
    t = index.t
    out = np.empty((n, t), dtype=np.int32)
    if n == 0:
        return out
    pad = index.padded()
    g = index.grid
    # chunk so the (t, chunk, width) temporaries stay small
    chunk = max(1, 2_000_000 // max(1, t * pad.shape[2]))
    rows = np.arange(t)[:, None]
    for start in range(0, n, chunk):
        x = pts[start:start + chunk, 0][None, :]
        y = pts[start:start + chunk, 1][None, :]
        lo_x = index.lo[:, 0:1]
        lo_y = index.lo[:, 1:2]
        outside = (x < lo_x) | (x > index.hi[:, 0:1]) | (y < lo_y) | (y > index.hi[:, 1:2])
        fx = np.where(outside, 0.0, (x - lo_x) * index.inv_h[:, 0:1])
        fy = np.where(outside, 0.0, (y - lo_y) * index.inv_h[:, 1:2])
        ix = np.minimum(fx.astype(np.int64), g - 1)
        iy = np.minimum(fy.astype(np.int64), g - 1)
        cand = pad[rows, ix * g + iy]  # (t, c, width)
        valid = cand >= 0
        safe = np.where(valid, cand, 0)
        cc = index.centers[rows[:, :, None], safe]  # (t, c, width, 2)
        dx = x[:, :, None] - cc[..., 0]
        dy = y[:, :, None] - cc[..., 1]
        d2 = dx * dx + dy * dy
        d2[~valid] = np.inf
        k = np.argmin(d2, axis=2)
        best = np.take_along_axis(d2, k[:, :, None], axis=2)[:, :, 0]
        center = np.take_along_axis(cand, k[:, :, None], axis=2)[:, :, 0]
        miss = outside | (best > index.max_r2[:, None])
        out[start:start + chunk] = np.where(miss, -1, center).T
    return out


def embed(signals, index):
    """Mean feature maps of each signal: float64 array (n_signals, t * psi)."""
    n_sig = len(signals)
    t, psi = index.t, index.psi
    out = np.zeros((n_sig, t * psi), dtype=np.float64)
    offsets = np.arange(t, dtype=np.int64) * psi
    for s, sig in enumerate(signals):
        sig = np.ascontiguousarray(sig, dtype=np.complex128)
        if sig.size == 0:
            continue
        act = assign(sig.view(np.float64).reshape(-1, 2), index)
        flat = (act + offsets[None, :])[act >= 0]
        out[s] = np.bincount(flat, minlength=t * psi) / sig.size
    return out


def grid_tables(centers, lo, h, max_r2, g, slack):
    """Candidate lists and cell codes of the grid index (see ``_grid``).

    Returns ``(ptr, idx, code)`` over all ``t * g * g`` cells.
    """
    t, psi, _ = centers.shape
    ptrs = [np.zeros(1, dtype=np.int64)]
    idxs = []
    codes = []
    offset = 0
    steps = np.arange(g)
    cells = np.arange(g * g)
    grow = 1.0 + 4 * slack
    shrink = 1.0 - 4 * slack
    floor = slack * slack
    for j in range(t):
        # cell boxes, slightly enlarged against rounding in the cell lookup
        x0 = lo[j, 0] + steps * h[j, 0]
        y0 = lo[j, 1] + steps * h[j, 1]
        ex = h[j, 0] * slack
        ey = h[j, 1] * slack
        bx0 = np.repeat(x0 - ex, g)[:, None]
        bx1 = np.repeat((x0 + h[j, 0]) + ex, g)[:, None]
        by0 = np.tile(y0 - ey, g)[:, None]
        by1 = np.tile((y0 + h[j, 1]) + ey, g)[:, None]
        cx = centers[j, :, 0][None, :]
        cy = centers[j, :, 1][None, :]
        dx_min = np.maximum(np.maximum(bx0 - cx, cx - bx1), 0.0)
        dy_min = np.maximum(np.maximum(by0 - cy, cy - by1), 0.0)
        dmin2 = dx_min * dx_min + dy_min * dy_min
        dx_max = np.maximum(np.abs(cx - bx0), np.abs(cx - bx1))
        dy_max = np.maximum(np.abs(cy - by0), np.abs(cy - by1))
        dmax2 = dx_max * dx_max + dy_max * dy_max
        bound = dmax2.min(axis=1, keepdims=True)
        keep = dmin2 <= bound * grow + floor
        cell, center = np.nonzero(keep)  # row-major: sorted by cell then center
        counts = np.bincount(cell, minlength=g * g)

        code = np.full(g * g, -2, dtype=np.int32)
        first = np.argmax(keep, axis=1)
        inside = (counts == 1) & (dmax2[cells, first] <= max_r2[j] * shrink)
        code[inside] = first[inside]
        code[dmin2.min(axis=1) > max_r2[j] * grow + floor] = -1
        codes.append(code)
        ptrs.append(offset + np.cumsum(counts))
        idxs.append(center.astype(np.int32))
        offset += center.size
    return (
        np.concatenate(ptrs).astype(np.int64),
        np.concatenate(idxs).astype(np.int32),
        np.concatenate(codes).astype(np.int32),
    )
