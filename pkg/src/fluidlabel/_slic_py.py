"""Pure-Python (numpy) superpixel kernels.

Fallback used when the compiled extension is unavailable. Every floating
point expression mirrors the compiled kernel operation-for-operation so the
two backends produce bit-identical assignments.
"""

from __future__ import annotations

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

BACKEND_NAME = "python"


def assign_step(
    intensity: np.ndarray,
    centers: np.ndarray,
    region_size: int,
    scale2: float,
    prev: np.ndarray,
) -> np.ndarray:
    """One cluster-assignment sweep.

    Each center claims pixels inside its search window when its distance
    d2 = (I - ci)^2 + ((x - cx)^2 + (y - cy)^2) * scale2 beats the best seen
    so far (strict <, centers visited in ascending id, so ties keep the
    lower id). Pixels outside every window keep their previous assignment.
    """
    h, w = intensity.shape
    half = region_size
    best = np.full((h, w), np.inf, dtype=np.float64)
    assignment = prev.copy()
    xs = np.arange(w, dtype=np.float64)
    ys = np.arange(h, dtype=np.float64)
    for k in range(centers.shape[0]):
        cx, cy, ci = centers[k]
        px = int(cx + 0.5)
        py = int(cy + 0.5)
        x0 = max(0, px - half)
        x1 = min(w - 1, px + half)
        y0 = max(0, py - half)
        y1 = min(h - 1, py + half)
        if x0 > x1 or y0 > y1:
            continue
        dx = xs[x0 : x1 + 1] - cx
        dy = ys[y0 : y1 + 1] - cy
        dxy = (dx * dx)[None, :] + (dy * dy)[:, None]
        di = intensity[y0 : y1 + 1, x0 : x1 + 1] - ci
        d2 = di * di + dxy * scale2
        window_best = best[y0 : y1 + 1, x0 : x1 + 1]
        better = d2 < window_best
        window_best[better] = d2[better]
        assignment[y0 : y1 + 1, x0 : x1 + 1][better] = k
    return assignment


def update_step(
    image: np.ndarray, assignment: np.ndarray, num_centers: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Per-cluster pixel count and integer coordinate/intensity sums.

    Sums of exact integer values stay exact in float64, so summation order
    does not matter and the result matches the compiled kernel bit-for-bit.
    """
    h, w = image.shape
    flat = assignment.ravel()
    counts = np.bincount(flat, minlength=num_centers).astype(np.float64)
    xs = np.tile(np.arange(w, dtype=np.float64), h)
    ys = np.repeat(np.arange(h, dtype=np.float64), w)
    sum_x = np.bincount(flat, weights=xs, minlength=num_centers)
    sum_y = np.bincount(flat, weights=ys, minlength=num_centers)
    sum_i = np.bincount(
        flat, weights=image.ravel().astype(np.float64), minlength=num_centers
    )
    return counts, sum_x, sum_y, sum_i


def label_components(assignment: np.ndarray) -> tuple[np.ndarray, int]:
    """4-connected components of equal-valued pixels.

    Component ids are 0-based and numbered by first appearance in raster
    order, matching the compiled flood-fill kernel.
    """
    h, w = assignment.shape
    n = h * w
    idx = np.arange(n, dtype=np.int64).reshape(h, w)
    same_r = assignment[:, :-1] == assignment[:, 1:]
    same_d = assignment[:-1, :] == assignment[1:, :]
    rows = np.concatenate([idx[:, :-1][same_r], idx[:-1, :][same_d]])
    cols = np.concatenate([idx[:, 1:][same_r], idx[1:, :][same_d]])
    graph = coo_matrix(
        (np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n, n)
    )
    ncomp, raw = connected_components(graph, directed=False)
    # renumber to first-encounter raster order (csgraph numbering is
    # implementation-defined)
    _, first = np.unique(raw, return_index=True)
    remap = np.empty(ncomp, dtype=np.int32)
    remap[raw[np.sort(first)]] = np.arange(ncomp, dtype=np.int32)
    return remap[raw].reshape(h, w), ncomp
