"""Superpixel-guided pseudo-label generation.

Point annotations seed block-level labels; labels grow breadth-first to
adjacent blocks whose intensity histograms are similar enough, and every
pixel receives a trust value that decays with the growth distance from its
seed. The result is a dense pseudo-label map plus a trust map suitable for
loss weighting.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import SeedConflictError, ValidationError
from .rasters import (
    DEFAULT_NUM_CLASSES,
    PED,
    GrayImage,
    LabelMap,
    PointAnnotationSet,
    TrustMap,
    rasterize_points,
)
from .superpixels import (
    DEFAULT_COMPACTNESS,
    DEFAULT_ITERATIONS,
    DEFAULT_REGION_SIZE,
    AdjacencyGraph,
    SuperpixelMap,
    all_block_histograms,
    build_adjacency,
    slic,
)


@dataclass(frozen=True)
class GrowthConfig:
    """Similarity thresholds and trust assignment knobs.

    threshold_srf_irf gates growth for classes 1 and 2, threshold_ped for
    class 3; a threshold above 1.0 disables growth for its classes since
    similarities never exceed 1. Trust starts at trust_init everywhere, is
    trust_seed on seed blocks, and loses decay_per_hop per growth step.
    """

    threshold_srf_irf: float = 0.6
    threshold_ped: float = 0.5
    trust_init: float = 0.5
    trust_seed: float = 1.0
    decay_per_hop: float = 0.05

    def __post_init__(self):
        for name in ("threshold_srf_irf", "threshold_ped"):
            v = getattr(self, name)
            if not (v >= 0.0 and math.isfinite(v)):
                raise ValidationError(f"{name} must be a finite value >= 0, got {v}")
        for name in ("trust_init", "trust_seed"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValidationError(f"{name} must lie in [0, 1], got {v}")
        if self.decay_per_hop < 0.0:
            raise ValidationError("decay_per_hop must be nonnegative")

    def threshold_for(self, cls: int) -> float:
        return self.threshold_ped if cls == PED else self.threshold_srf_irf


@dataclass(frozen=True)
class BlockLabels:
    """Class id per superpixel block plus the growth hop count.

    labels[k-1] is block k's class (0 = untouched); hops[k-1] is the BFS
    distance from the seed that labeled it (-1 on unlabeled blocks).
    """

    labels: np.ndarray  # (K,) int32
    hops: np.ndarray  # (K,) int32, -1 where undefined

    def __post_init__(self):
        labels = np.ascontiguousarray(self.labels, dtype=np.int32)
        hops = np.ascontiguousarray(self.hops, dtype=np.int32)
        if labels.shape != hops.shape:
            raise ValidationError("labels and hops must align")
        labels.flags.writeable = False
        hops.flags.writeable = False
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "hops", hops)


def seed_block_labels(points: LabelMap, spmap: SuperpixelMap) -> BlockLabels:
    """Lift point annotations onto superpixel blocks.

    A block containing any nonzero-labeled pixel takes that class and hop
    distance 0. Two different nonzero classes inside one block are rejected
    rather than tie-broken.
    """
    if (points.height, points.width) != (spmap.height, spmap.width):
        raise ValidationError("point map and superpixel map dimensions differ")
    labels = np.zeros(spmap.num_blocks, dtype=np.int32)
    hops = np.full(spmap.num_blocks, -1, dtype=np.int32)
    flat = points.pixels.ravel()
    for k in range(1, spmap.num_blocks + 1):
        block_values = flat[spmap.block_pixels[k - 1]]
        classes = np.unique(block_values[block_values != 0])
        if len(classes) > 1:
            raise SeedConflictError(k, (int(classes[0]), int(classes[1])))
        if len(classes) == 1:
            labels[k - 1] = int(classes[0])
            hops[k - 1] = 0
    return BlockLabels(labels, hops)


def grow(
    image: GrayImage,
    spmap: SuperpixelMap,
    graph: AdjacencyGraph,
    seeds: BlockLabels,
    cfg: GrowthConfig = GrowthConfig(),
) -> BlockLabels:
    """Expand seed blocks across similar neighbors, breadth-first.

    Each seed is processed to exhaustion before the next one (seeds in
    ascending block id within a class, classes in order 1, 2, 3); a block,
    once labeled, is never overwritten. Classes 1 and 2 may spread to any
    neighbor, class 3 only to neighbors whose centroid lies strictly above
    the current frontier block. A neighbor joins when the cosine similarity
    of its intensity histogram with the frontier block's is at least the
    class threshold, and its hop count is the frontier block's plus one.
    """
    hists = all_block_histograms(image, spmap).astype(np.float64)
    norms = np.sqrt((hists * hists).sum(axis=1))
    labels = seeds.labels.copy()
    hops = seeds.hops.copy()

    for cls in (1, 2, 3):
        threshold = cfg.threshold_for(cls)
        seed_ids = np.flatnonzero((seeds.labels == cls) & (seeds.hops == 0)) + 1
        for seed in seed_ids:
            frontier = deque([int(seed)])
            while frontier:
                ms = frontier.popleft()
                if cls == PED:
                    candidates = graph.upper_neighbors_of(ms)
                else:
                    candidates = graph.neighbors_of(ms)
                for ns in candidates:
                    ns = int(ns)
                    if labels[ns - 1] != 0:
                        continue
                    sim = float(np.dot(hists[ms - 1], hists[ns - 1])) / (
                        norms[ms - 1] * norms[ns - 1]
                    )
                    sim = min(max(sim, 0.0), 1.0)
                    if sim >= threshold:
                        labels[ns - 1] = cls
                        hops[ns - 1] = hops[ms - 1] + 1
                        frontier.append(ns)
    return BlockLabels(labels, hops)


def to_pixel_labels(grown: BlockLabels, spmap: SuperpixelMap) -> LabelMap:
    """Broadcast block labels back to pixels."""
    if grown.labels.shape[0] != spmap.num_blocks:
        raise ValidationError("block labels do not match the superpixel map")
    lut = np.concatenate([[0], grown.labels]).astype(np.uint8)
    return LabelMap(lut[spmap.assignment], DEFAULT_NUM_CLASSES)


def trust_value(distance: int) -> float:
    """Trust assigned to a block grown `distance` hops from its seed."""
    if distance < 0:
        raise ValidationError("distance must be a nonnegative integer")
    return max(1.0 - 0.1 * distance / 2, 0.0)


def build_trust_map(
    grown: BlockLabels, spmap: SuperpixelMap, cfg: GrowthConfig = GrowthConfig()
) -> TrustMap:
    """Per-pixel trust: trust_init on unlabeled blocks, trust_seed on seed
    blocks, and seed trust decayed by the hop count on grown blocks."""
    if grown.labels.shape[0] != spmap.num_blocks:
        raise ValidationError("block labels do not match the superpixel map")
    per_block = np.full(spmap.num_blocks + 1, cfg.trust_init, dtype=np.float64)
    for k in range(1, spmap.num_blocks + 1):
        hop = int(grown.hops[k - 1])
        if grown.labels[k - 1] != 0 and hop >= 0:
            per_block[k] = max(cfg.trust_seed - cfg.decay_per_hop * hop, 0.0)
    return TrustMap(per_block[spmap.assignment].astype(np.float32))


def generate(
    image: GrayImage,
    points: PointAnnotationSet,
    cfg: GrowthConfig = GrowthConfig(),
    region_size: int = DEFAULT_REGION_SIZE,
    compactness: float = DEFAULT_COMPACTNESS,
    iterations: int = DEFAULT_ITERATIONS,
    spmap: SuperpixelMap | None = None,
) -> tuple[LabelMap, TrustMap, SuperpixelMap]:
    """Full pipeline: superpixels, point seeding, growth, trust assignment.

    Deterministic for identical inputs. A precomputed SuperpixelMap can be
    supplied to skip the SLIC step (the annotation service caches it).
    """
    if spmap is None:
        spmap = slic(image, region_size, compactness, iterations)
    point_map = rasterize_points(points, image.width, image.height)
    seeds = seed_block_labels(point_map, spmap)
    graph = build_adjacency(spmap)
    grown = grow(image, spmap, graph, seeds, cfg)
    return to_pixel_labels(grown, spmap), build_trust_map(grown, spmap, cfg), spmap
