"""SLIC superpixel segmentation on grayscale rasters, plus the block-level
artifacts the label-growing stage consumes: per-block intensity histograms,
histogram cosine similarity, and the block adjacency graph with
above/below direction tags.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ValidationError
from .rasters import GrayImage

DEFAULT_REGION_SIZE = 13
DEFAULT_COMPACTNESS = 10.0
DEFAULT_ITERATIONS = 10


@dataclass(frozen=True)
class SuperpixelMap:
    """Partition of an image into 4-connected superpixel blocks.

    Block ids run 1..num_blocks. block_pixels[k-1] holds the flat
    (row-major) pixel indices of block k in ascending order; centroids[k-1]
    is the (x, y) pixel mean of block k.
    """

    assignment: np.ndarray  # (h, w) int32, values 1..K
    num_blocks: int
    block_pixels: tuple[np.ndarray, ...]
    centroids: np.ndarray  # (K, 2) float64, columns (x, y)

    @property
    def width(self) -> int:
        return self.assignment.shape[1]

    @property
    def height(self) -> int:
        return self.assignment.shape[0]

    @classmethod
    def from_assignment(cls, assignment: np.ndarray) -> "SuperpixelMap":
        assignment = np.ascontiguousarray(assignment, dtype=np.int32)
        if assignment.ndim != 2:
            raise ValidationError("assignment must be 2-D")
        h, w = assignment.shape
        num_blocks = int(assignment.max())
        flat = assignment.ravel()
        counts = np.bincount(flat, minlength=num_blocks + 1)
        if counts[0] != 0 or (num_blocks > 0 and np.any(counts[1:] == 0)):
            raise ValidationError("block ids must be contiguous in 1..K with no empty block")
        order = np.argsort(flat, kind="stable")
        bounds = np.cumsum(counts[1:])
        block_pixels = tuple(np.split(order, bounds[:-1]))
        sum_x = np.bincount(flat, weights=np.tile(np.arange(w, dtype=np.float64), h),
                            minlength=num_blocks + 1)[1:]
        sum_y = np.bincount(flat, weights=np.repeat(np.arange(h, dtype=np.float64), w),
                            minlength=num_blocks + 1)[1:]
        centroids = np.stack(
            [sum_x / counts[1:], sum_y / counts[1:]], axis=1
        )
        assignment.flags.writeable = False
        centroids.flags.writeable = False
        return cls(assignment, num_blocks, block_pixels, centroids)


def slic(
    image: GrayImage,
    region_size: int = DEFAULT_REGION_SIZE,
    compactness: float = DEFAULT_COMPACTNESS,
    iterations: int = DEFAULT_ITERATIONS,
) -> SuperpixelMap:
    """Cluster the image into roughly region_size x region_size blocks.

    Grid-initialized centers (no perturbation, so output is reproducible
    bit-for-bit) are refined by iterative assignment under the combined
    intensity/spatial distance, then orphan fragments are cleaned up so
    every block is one 4-connected component.
    """
    h, w = image.height, image.width
    if region_size < 2:
        raise ValidationError(f"region_size must be >= 2, got {region_size}")
    if iterations < 1:
        raise ValidationError(f"iterations must be >= 1, got {iterations}")
    if region_size > min(w, h):
        raise ValidationError(
            f"region_size {region_size} exceeds the smaller image side "
            f"({w}x{h})"
        )

    s = region_size
    grid_x = math.ceil(w / s)
    grid_y = math.ceil(h / s)
    centers = np.empty((grid_x * grid_y, 3), dtype=np.float64)
    k = 0
    for gy in range(grid_y):
        cy = min(gy * s + s // 2, h - 1)
        for gx in range(grid_x):
            cx = min(gx * s + s // 2, w - 1)
            centers[k] = (cx, cy, float(image.pixels[cy, cx]))
            k += 1

    intensity = image.pixels.astype(np.float64)
    scale = compactness / s
    scale2 = scale * scale
    assignment = np.zeros((h, w), dtype=np.int32)
    for _ in range(iterations):
        assignment = kernels.assign_step(intensity, centers, s, scale2, assignment)
        counts, sum_x, sum_y, sum_i = kernels.update_step(
            image.pixels, assignment, centers.shape[0]
        )
        occupied = counts > 0
        centers[occupied, 0] = sum_x[occupied] / counts[occupied]
        centers[occupied, 1] = sum_y[occupied] / counts[occupied]
        centers[occupied, 2] = sum_i[occupied] / counts[occupied]

    assignment = _compact_ids(assignment)
    assignment = _enforce_connectivity(assignment, min_size=s * s / 4.0)
    return SuperpixelMap.from_assignment(assignment + 1)


def _compact_ids(assignment: np.ndarray) -> np.ndarray:
    """Renumber 0-based ids densely, dropping centers that own no pixels."""
    present = np.unique(assignment)
    remap = np.zeros(int(present.max()) + 1, dtype=np.int32)
    remap[present] = np.arange(len(present), dtype=np.int32)
    return remap[assignment]


def _enforce_connectivity(assignment: np.ndarray, min_size: float) -> np.ndarray:
    """Split every block into 4-connected components and resolve fragments.

    The largest component of each block keeps its id. Smaller fragments
    merge into the largest adjacent block; fragments of at least min_size
    pixels are promoted to new blocks. Merge targets are restricted to
    blocks already anchored this pass so merged regions stay connected;
    anything unresolved is retried on the next pass.
    """
    assignment = assignment.copy()
    num_blocks = int(assignment.max()) + 1
    for _ in range(1000):
        comps, ncomp = kernels.label_components(assignment)
        flat_c = comps.ravel()
        flat_a = assignment.ravel()
        sizes = np.bincount(flat_c, minlength=ncomp)
        # component ids follow first-encounter raster order, so the first
        # occurrence of comp c is increasing in c
        _, first_idx = np.unique(flat_c, return_index=True)
        parents = flat_a[first_idx].astype(np.int64)

        # main component per block: largest size, ties to the earlier comp
        order = np.lexsort((np.arange(ncomp), -sizes, parents))
        firsts = np.ones(ncomp, dtype=bool)
        firsts[1:] = parents[order][1:] != parents[order][:-1]
        is_main = np.zeros(ncomp, dtype=bool)
        is_main[order[firsts]] = True
        fragments = np.flatnonzero(~is_main)
        if fragments.size == 0:
            return assignment

        adjacency = _component_adjacency(comps, ncomp)
        block_sizes = np.bincount(flat_a, minlength=num_blocks).tolist()
        comp_block = parents.copy()
        comp_block[fragments] = -1  # not yet anchored to a block
        for c in fragments:
            size_c = int(sizes[c])
            if size_c >= min_size:
                comp_block[c] = num_blocks
                block_sizes.append(size_c)
                block_sizes[int(parents[c])] -= size_c
                num_blocks += 1
                continue
            target = -1
            target_size = -1
            for b in comp_block[adjacency[c]].tolist():
                if b < 0:
                    continue  # neighbor fragment not yet anchored
                bs = block_sizes[b]
                if bs > target_size or (bs == target_size and b < target):
                    target, target_size = b, bs
            if target < 0:
                continue  # surrounded by unanchored fragments; next pass
            comp_block[c] = target
            block_sizes[target] += size_c
            block_sizes[int(parents[c])] -= size_c
        unresolved = comp_block < 0
        if np.any(unresolved):
            comp_block[unresolved] = parents[unresolved]
        assignment = comp_block[comps].astype(np.int32)
    raise RuntimeError("connectivity enforcement did not converge")


def _component_adjacency(comps: np.ndarray, ncomp: int) -> list[np.ndarray]:
    """adjacency[c]: comps sharing a 4-connected border with comp c, ascending."""
    a = np.concatenate([comps[:, :-1].ravel(), comps[:-1, :].ravel()]).astype(np.int64)
    b = np.concatenate([comps[:, 1:].ravel(), comps[1:, :].ravel()]).astype(np.int64)
    differ = a != b
    a, b = a[differ], b[differ]
    keys = np.unique(np.concatenate([a * ncomp + b, b * ncomp + a]))
    src = keys // ncomp
    dst = keys % ncomp
    bounds = np.cumsum(np.bincount(src, minlength=ncomp))
    return np.split(dst, bounds[:-1])


@dataclass(frozen=True)
class BlockHistogram:
    """Occurrence count of each of the 256 intensity values inside one block."""

    counts: np.ndarray  # (256,) int64

    def __post_init__(self):
        arr = np.ascontiguousarray(self.counts, dtype=np.int64)
        if arr.shape != (256,):
            raise ValidationError("histogram must have 256 bins")
        if np.any(arr < 0):
            raise ValidationError("histogram counts must be nonnegative")
        arr.flags.writeable = False
        object.__setattr__(self, "counts", arr)

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def block_histogram(image: GrayImage, spmap: SuperpixelMap, k: int) -> BlockHistogram:
    """Intensity histogram of block k (1-based)."""
    if not 1 <= k <= spmap.num_blocks:
        raise ValidationError(
            f"block id {k} out of range 1..{spmap.num_blocks}"
        )
    values = image.pixels.ravel()[spmap.block_pixels[k - 1]]
    return BlockHistogram(np.bincount(values, minlength=256))


def all_block_histograms(image: GrayImage, spmap: SuperpixelMap) -> np.ndarray:
    """(K, 256) int64 histogram matrix for every block at once."""
    flat = image.pixels.ravel().astype(np.int64)
    combined = (spmap.assignment.ravel().astype(np.int64) - 1) * 256 + flat
    counts = np.bincount(combined, minlength=spmap.num_blocks * 256)
    return counts.reshape(spmap.num_blocks, 256)


def cosine_similarity(a: BlockHistogram, b: BlockHistogram) -> float:
    """Cosine of the angle between two intensity histograms, in [0, 1]."""
    return _cosine(a.counts, b.counts)


def _cosine(a: np.ndarray, b: np.ndarray) -> float:
    a = a.astype(np.float64)
    b = b.astype(np.float64)
    na = math.sqrt(float(np.dot(a, a)))
    nb = math.sqrt(float(np.dot(b, b)))
    if na == 0.0 or nb == 0.0:
        raise ValidationError("cosine similarity is undefined for an all-zero histogram")
    value = float(np.dot(a, b)) / (na * nb)
    return min(max(value, 0.0), 1.0)


@dataclass(frozen=True)
class AdjacencyGraph:
    """Which blocks share a 4-connected border, plus an "above" tag per edge.

    neighbors[k-1] lists block k's neighbors in ascending id order;
    above[k-1][i] is True when that neighbor's centroid lies strictly above
    block k's (smaller y).
    """

    neighbors: tuple[np.ndarray, ...]
    above: tuple[np.ndarray, ...]

    def neighbors_of(self, k: int) -> np.ndarray:
        return self.neighbors[k - 1]

    def upper_neighbors_of(self, k: int) -> np.ndarray:
        return self.neighbors[k - 1][self.above[k - 1]]


def build_adjacency(spmap: SuperpixelMap) -> AdjacencyGraph:
    a = spmap.assignment
    left = np.stack([a[:, :-1].ravel(), a[:, 1:].ravel()], axis=1)
    up = np.stack([a[:-1, :].ravel(), a[1:, :].ravel()], axis=1)
    pairs = np.concatenate([left, up])
    pairs = pairs[pairs[:, 0] != pairs[:, 1]]
    pairs = np.unique(np.concatenate([pairs, pairs[:, ::-1]]), axis=0)

    neighbors: list[np.ndarray] = []
    above: list[np.ndarray] = []
    ys = spmap.centroids[:, 1]
    for k in range(1, spmap.num_blocks + 1):
        ns = pairs[pairs[:, 0] == k, 1]
        neighbors.append(np.ascontiguousarray(ns, dtype=np.int32))
        above.append(ys[ns - 1] < ys[k - 1])
    return AdjacencyGraph(tuple(neighbors), tuple(above))
