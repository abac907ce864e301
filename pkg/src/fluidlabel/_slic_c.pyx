# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled superpixel kernels: assignment sweep, cluster sums, and
4-connected component labeling.

Arithmetic mirrors the numpy fallback operation-for-operation (see
_slic_py.py); the build disables FP contraction so results stay
bit-identical across backends.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND_NAME = "compiled"


def assign_step(
    const double[:, ::1] intensity,
    const double[:, ::1] centers,
    int region_size,
    double scale2,
    const int[:, ::1] prev,
):
    cdef int h = intensity.shape[0]
    cdef int w = intensity.shape[1]
    cdef int num_centers = centers.shape[0]
    cdef cnp.ndarray best_arr = np.full((h, w), np.inf, dtype=np.float64)
    cdef cnp.ndarray assign_arr = np.asarray(prev).copy()
    cdef double[:, ::1] best = best_arr
    cdef int[:, ::1] assignment = assign_arr
    cdef int k, px, py, x0, x1, y0, y1, x, y
    cdef double cx, cy, ci, dx, dy, di, dxy, d2

    for k in range(num_centers):
        cx = centers[k, 0]
        cy = centers[k, 1]
        ci = centers[k, 2]
        px = <int>(cx + 0.5)
        py = <int>(cy + 0.5)
        x0 = px - region_size
        if x0 < 0:
            x0 = 0
        x1 = px + region_size
        if x1 > w - 1:
            x1 = w - 1
        y0 = py - region_size
        if y0 < 0:
            y0 = 0
        y1 = py + region_size
        if y1 > h - 1:
            y1 = h - 1
        for y in range(y0, y1 + 1):
            dy = y - cy
            for x in range(x0, x1 + 1):
                dx = x - cx
                dxy = dx * dx + dy * dy
                di = intensity[y, x] - ci
                d2 = di * di + dxy * scale2
                if d2 < best[y, x]:
                    best[y, x] = d2
                    assignment[y, x] = k
    return assign_arr


def update_step(const unsigned char[:, ::1] image, const int[:, ::1] assignment, int num_centers):
    cdef int h = image.shape[0]
    cdef int w = image.shape[1]
    cdef cnp.ndarray counts_arr = np.zeros(num_centers, dtype=np.int64)
    cdef cnp.ndarray sx_arr = np.zeros(num_centers, dtype=np.int64)
    cdef cnp.ndarray sy_arr = np.zeros(num_centers, dtype=np.int64)
    cdef cnp.ndarray si_arr = np.zeros(num_centers, dtype=np.int64)
    cdef long long[::1] counts = counts_arr
    cdef long long[::1] sx = sx_arr
    cdef long long[::1] sy = sy_arr
    cdef long long[::1] si = si_arr
    cdef int x, y, k

    for y in range(h):
        for x in range(w):
            k = assignment[y, x]
            counts[k] += 1
            sx[k] += x
            sy[k] += y
            si[k] += image[y, x]
    return (
        counts_arr.astype(np.float64),
        sx_arr.astype(np.float64),
        sy_arr.astype(np.float64),
        si_arr.astype(np.float64),
    )


def label_components(const int[:, ::1] assignment):
    """Flood-fill labeling; component ids follow first appearance in raster order."""
    cdef int h = assignment.shape[0]
    cdef int w = assignment.shape[1]
    cdef int n = h * w
    cdef cnp.ndarray comps_arr = np.full((h, w), -1, dtype=np.int32)
    cdef int[:, ::1] comps = comps_arr
    cdef cnp.ndarray queue_arr = np.empty(n, dtype=np.int64)
    cdef long long[::1] queue = queue_arr
    cdef int ncomp = 0
    cdef int x, y, qx, qy
    cdef long long head, tail
    cdef int value

    for y in range(h):
        for x in range(w):
            if comps[y, x] != -1:
                continue
            value = assignment[y, x]
            comps[y, x] = ncomp
            queue[0] = <long long>y * w + x
            head = 0
            tail = 1
            while head < tail:
                qy = <int>(queue[head] // w)
                qx = <int>(queue[head] % w)
                head += 1
                if qy > 0 and comps[qy - 1, qx] == -1 and assignment[qy - 1, qx] == value:
                    comps[qy - 1, qx] = ncomp
                    queue[tail] = <long long>(qy - 1) * w + qx
                    tail += 1
                if qy < h - 1 and comps[qy + 1, qx] == -1 and assignment[qy + 1, qx] == value:
                    comps[qy + 1, qx] = ncomp
                    queue[tail] = <long long>(qy + 1) * w + qx
                    tail += 1
                if qx > 0 and comps[qy, qx - 1] == -1 and assignment[qy, qx - 1] == value:
                    comps[qy, qx - 1] = ncomp
                    queue[tail] = <long long>qy * w + qx - 1
                    tail += 1
                if qx < w - 1 and comps[qy, qx + 1] == -1 and assignment[qy, qx + 1] == value:
                    comps[qy, qx + 1] = ncomp
                    queue[tail] = <long long>qy * w + qx + 1
                    tail += 1
            ncomp += 1
    return comps_arr, ncomp
