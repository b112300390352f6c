# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled nearest-center kernels; see ``_pykernels`` for the reference."""
import numpy as np

from libc.math cimport INFINITY
from libc.stdint cimport int32_t, int64_t


cdef struct Grid:
    const double* lo       # (t, 2)
    const double* hi       # (t, 2)
    const double* inv_h    # (t, 2)
    const double* max_r2   # (t,)
    const int64_t* ptr     # (t * g * g + 1,)
    const int32_t* idx
    const int32_t* code    # (t * g * g,)
    const double* centers  # (t, psi, 2)
    Py_ssize_t g
    Py_ssize_t t
    Py_ssize_t psi


cdef inline int32_t _scan(const int32_t* idx, int64_t start, int64_t stop, const double* c,
                          double x, double y, double max_r2) noexcept nogil:
    cdef int64_t p
    cdef int32_t k, best_k = -1
    cdef double dx, dy, d2, best = INFINITY
    for p in range(start, stop):
        k = idx[p]
        dx = x - c[2 * k]
        dy = y - c[2 * k + 1]
        d2 = dx * dx + dy * dy
        if d2 < best:
            best = d2
            best_k = k
    if best_k < 0 or best > max_r2:
        return -1
    return best_k


cdef inline int32_t _lookup(const Grid* gr, double x, double y, Py_ssize_t j) noexcept nogil:
    cdef Py_ssize_t ix, iy, cell, g = gr.g
    cdef int32_t k
    cdef const double* lo = gr.lo + 2 * j
    cdef const double* hi = gr.hi + 2 * j
    cdef const double* c = gr.centers + 2 * gr.psi * j
    if x < lo[0] or x > hi[0] or y < lo[1] or y > hi[1]:
        return -1
    ix = <Py_ssize_t>((x - lo[0]) * gr.inv_h[2 * j])
    iy = <Py_ssize_t>((y - lo[1]) * gr.inv_h[2 * j + 1])
    if ix > g - 1:
        ix = g - 1
    if iy > g - 1:
        iy = g - 1
    cell = (j * g + ix) * g + iy
    k = gr.code[cell]
    if k >= -1:
        return k
    return _scan(gr.idx, gr.ptr[cell], gr.ptr[cell + 1], c, x, y, gr.max_r2[j])


cdef class _Holder:
    """Keeps the contiguous arrays alive while the raw pointers are in use."""
    cdef Grid grid
    cdef object refs

    def __init__(self, index):
        cdef const double[:, ::1] lo = np.ascontiguousarray(index.lo, dtype=np.float64)
        cdef const double[:, ::1] hi = np.ascontiguousarray(index.hi, dtype=np.float64)
        cdef const double[:, ::1] inv_h = np.ascontiguousarray(index.inv_h, dtype=np.float64)
        cdef const double[::1] max_r2 = np.ascontiguousarray(index.max_r2, dtype=np.float64)
        cdef const int64_t[::1] ptr = np.ascontiguousarray(index.ptr, dtype=np.int64)
        cdef const int32_t[::1] idx = np.ascontiguousarray(index.idx, dtype=np.int32)
        cdef const int32_t[::1] code = np.ascontiguousarray(index.code, dtype=np.int32)
        cdef const double[:, :, ::1] centers = np.ascontiguousarray(index.centers, dtype=np.float64)
        self.refs = (lo, hi, inv_h, max_r2, ptr, idx, code, centers)
        self.grid.lo = &lo[0, 0]
        self.grid.hi = &hi[0, 0]
        self.grid.inv_h = &inv_h[0, 0]
        self.grid.max_r2 = &max_r2[0]
        self.grid.ptr = &ptr[0]
        self.grid.idx = &idx[0] if idx.shape[0] > 0 else NULL
        self.grid.code = &code[0]
        self.grid.centers = &centers[0, 0, 0]
        self.grid.g = index.grid
        self.grid.t = centers.shape[0]
        self.grid.psi = centers.shape[1]


def assign(points, index):
    cdef _Holder h = _Holder(index)
    cdef const Grid* gr = &h.grid
    pts_arr = np.ascontiguousarray(points, dtype=np.float64).reshape(-1, 2)
    cdef Py_ssize_t n = pts_arr.shape[0], t = gr.t, i, j
    out_arr = np.empty((n, t), dtype=np.int32)
    if n == 0:
        return out_arr
    cdef const double[:, ::1] pts = pts_arr
    cdef int32_t[:, ::1] out = out_arr
    with nogil:
        for j in range(t):
            for i in range(n):
                out[i, j] = _lookup(gr, pts[i, 0], pts[i, 1], j)
    return out_arr


def embed(signals, index):
    cdef _Holder h = _Holder(index)
    cdef const Grid* gr = &h.grid
    cdef Py_ssize_t t = gr.t, psi = gr.psi
    cdef Py_ssize_t n_sig = len(signals), s, i, j, n, dim = t * psi
    cdef int32_t k
    cdef const double* pts
    cdef const double[::1] flat
    out_arr = np.zeros((n_sig, dim), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    counts_arr = np.zeros(dim, dtype=np.int64)
    cdef int64_t[::1] counts = counts_arr
    for s in range(n_sig):
        sig = np.ascontiguousarray(signals[s], dtype=np.complex128)
        n = sig.size
        if n == 0:
            continue
        flat = sig.view(np.float64)
        pts = &flat[0]
        with nogil:
            for j in range(dim):
                counts[j] = 0
            # partitioning-major keeps one partitioning's tables in cache
            for j in range(t):
                for i in range(n):
                    k = _lookup(gr, pts[2 * i], pts[2 * i + 1], j)
                    if k >= 0:
                        counts[j * psi + k] += 1
            for j in range(dim):
                out[s, j] = <double>counts[j] / <double>n
    return out_arr


def grid_tables(centers, lo, h, max_r2, Py_ssize_t g, double slack):
    cdef const double[:, :, ::1] c = np.ascontiguousarray(centers, dtype=np.float64)
    cdef const double[:, ::1] lo_v = np.ascontiguousarray(lo, dtype=np.float64)
    cdef const double[:, ::1] h_v = np.ascontiguousarray(h, dtype=np.float64)
    cdef const double[::1] mr2 = np.ascontiguousarray(max_r2, dtype=np.float64)
    cdef Py_ssize_t t = c.shape[0], psi = c.shape[1], n_cells = g * g
    cdef Py_ssize_t j, ix, iy, cell, k, n, cnt, first, total = 0
    cdef double grow = 1.0 + 4 * slack, shrink = 1.0 - 4 * slack, floor = slack * slack
    cdef double x0, y0, ex, ey, bx0, bx1, by0, by1, cx, cy, a, b, dx, dy
    cdef double bound, least, lim
    ptr_arr = np.zeros(t * n_cells + 1, dtype=np.int64)
    code_arr = np.empty(t * n_cells, dtype=np.int32)
    buf_arr = np.empty(n_cells * psi, dtype=np.int32)
    dmin_arr = np.empty(psi, dtype=np.float64)
    dmax_arr = np.empty(psi, dtype=np.float64)
    cdef int64_t[::1] ptr = ptr_arr
    cdef int32_t[::1] code = code_arr
    cdef int32_t[::1] buf = buf_arr
    cdef double[::1] dmin2 = dmin_arr
    cdef double[::1] dmax2 = dmax_arr
    parts = []
    for j in range(t):
        n = 0
        with nogil:
            ex = h_v[j, 0] * slack
            ey = h_v[j, 1] * slack
            for ix in range(g):
                x0 = lo_v[j, 0] + <double>ix * h_v[j, 0]
                bx0 = x0 - ex
                bx1 = (x0 + h_v[j, 0]) + ex
                for iy in range(g):
                    y0 = lo_v[j, 1] + <double>iy * h_v[j, 1]
                    by0 = y0 - ey
                    by1 = (y0 + h_v[j, 1]) + ey
                    cell = j * n_cells + ix * g + iy
                    bound = INFINITY
                    least = INFINITY
                    for k in range(psi):
                        cx = c[j, k, 0]
                        cy = c[j, k, 1]
                        a = bx0 - cx
                        b = cx - bx1
                        dx = a if a > b else b
                        if dx < 0.0:
                            dx = 0.0
                        a = by0 - cy
                        b = cy - by1
                        dy = a if a > b else b
                        if dy < 0.0:
                            dy = 0.0
                        dmin2[k] = dx * dx + dy * dy
                        if dmin2[k] < least:
                            least = dmin2[k]
                        a = cx - bx0 if cx - bx0 >= 0.0 else bx0 - cx
                        b = cx - bx1 if cx - bx1 >= 0.0 else bx1 - cx
                        dx = a if a > b else b
                        a = cy - by0 if cy - by0 >= 0.0 else by0 - cy
                        b = cy - by1 if cy - by1 >= 0.0 else by1 - cy
                        dy = a if a > b else b
                        dmax2[k] = dx * dx + dy * dy
                        if dmax2[k] < bound:
                            bound = dmax2[k]
                    lim = bound * grow + floor
                    first = -1
                    cnt = 0
                    for k in range(psi):
                        if dmin2[k] <= lim:
                            if first < 0:
                                first = k
                            buf[n] = <int32_t>k
                            n += 1
                            cnt += 1
                    ptr[cell + 1] = total + n
                    code[cell] = -2
                    if cnt == 1 and dmax2[first] <= mr2[j] * shrink:
                        code[cell] = <int32_t>first
                    if least > mr2[j] * grow + floor:
                        code[cell] = -1
        parts.append(buf_arr[:n].copy())
        total += n
    idx_arr = np.concatenate(parts).astype(np.int32) if parts else np.zeros(0, np.int32)
    return ptr_arr, idx_arr, code_arr
