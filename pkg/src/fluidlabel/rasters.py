"""Core raster data model: grayscale images, class maps, trust maps,
probability maps, and point annotations.

All types are immutable value objects: the wrapped numpy arrays are made
read-only at construction, so instances can be shared freely between
threads. Arrays are row-major, shape (height, width); probability maps are
channel-major, shape (num_classes, height, width).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

# Class ids for the four-way segmentation task.
BACKGROUND, IRF, SRF, PED = 0, 1, 2, 3
DEFAULT_NUM_CLASSES = 4

PROB_SUM_TOL = 1e-4


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class GrayImage:
    """8-bit grayscale raster, the raw input slice."""

    pixels: np.ndarray  # (h, w) uint8

    def __post_init__(self):
        arr = np.asarray(self.pixels)
        if arr.ndim != 2:
            raise ValidationError(f"image must be 2-D, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValidationError("image must be at least 1x1")
        if arr.dtype != np.uint8:
            if not np.issubdtype(arr.dtype, np.integer):
                raise ValidationError(f"intensities must be integers, got {arr.dtype}")
            if np.any(arr < 0) or np.any(arr > 255):
                raise ValidationError("intensity values must be in [0, 255]")
            arr = arr.astype(np.uint8)
        object.__setattr__(self, "pixels", _freeze(arr))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class LabelMap:
    """Per-pixel class ids in {0, ..., num_classes-1}."""

    pixels: np.ndarray  # (h, w) uint8
    num_classes: int = DEFAULT_NUM_CLASSES

    def __post_init__(self):
        arr = np.asarray(self.pixels)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValidationError(f"label map must be 2-D, got shape {arr.shape}")
        if self.num_classes < 1:
            raise ValidationError("num_classes must be >= 1")
        if arr.dtype != np.bool_ and not np.issubdtype(arr.dtype, np.integer):
            raise ValidationError(f"class ids must be integers, got {arr.dtype}")
        if np.any(arr < 0) or np.any(arr >= self.num_classes):
            bad = int(np.asarray(arr).max())
            raise ValidationError(
                f"label value {bad} out of range for {self.num_classes} classes"
            )
        object.__setattr__(self, "pixels", _freeze(arr.astype(np.uint8)))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def class_counts(self) -> np.ndarray:
        """Pixel count per class id, length num_classes."""
        return np.bincount(self.pixels.ravel(), minlength=self.num_classes)


@dataclass(frozen=True)
class TrustMap:
    """Per-pixel label confidence in [0, 1], stored as float32."""

    values: np.ndarray  # (h, w) float32

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float32)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValidationError(f"trust map must be 2-D, got shape {arr.shape}")
        if np.any(arr < 0.0) or np.any(arr > 1.0) or not np.all(np.isfinite(arr)):
            raise ValidationError("trust values must lie in [0, 1]")
        object.__setattr__(self, "values", _freeze(arr))

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class ProbMap:
    """Per-pixel, per-class predicted probabilities (external model output)."""

    values: np.ndarray  # (num_classes, h, w) float32

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float32)
        if arr.ndim != 3 or arr.shape[0] < 1:
            raise ValidationError(
                f"probability map must be (classes, h, w), got shape {arr.shape}"
            )
        if np.any(arr < 0.0) or np.any(arr > 1.0) or not np.all(np.isfinite(arr)):
            raise ValidationError("probabilities must lie in [0, 1]")
        sums = arr.sum(axis=0, dtype=np.float64)
        if np.any(np.abs(sums - 1.0) > PROB_SUM_TOL):
            worst = float(np.abs(sums - 1.0).max())
            raise ValidationError(
                f"per-pixel class probabilities must sum to 1 within "
                f"{PROB_SUM_TOL}; worst deviation {worst:.2e}"
            )
        object.__setattr__(self, "values", _freeze(arr))

    @property
    def num_classes(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[2]

    @property
    def height(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class PointAnnotationSet:
    """Click annotations: single points for IRF/SRF, polylines for PED.

    Polyline vertices implicitly carry class PED; every pixel the rasterized
    line passes through becomes a point annotation.
    """

    points: tuple[tuple[int, int, int], ...] = ()  # (x, y, class)
    ped_polylines: tuple[tuple[tuple[int, int], ...], ...] = field(default=())

    def __post_init__(self):
        pts = tuple((int(x), int(y), int(c)) for x, y, c in self.points)
        for x, y, c in pts:
            if c not in (IRF, SRF, PED):
                raise ValidationError(
                    f"point ({x},{y}) has class {c}; expected 1 (IRF), 2 (SRF) or 3 (PED)"
                )
            if x < 0 or y < 0:
                raise ValidationError(f"point ({x},{y}) has negative coordinates")
        lines = tuple(tuple((int(x), int(y)) for x, y in line) for line in self.ped_polylines)
        for line in lines:
            if len(line) < 2:
                raise ValidationError("a PED polyline needs at least 2 vertices")
            for x, y in line:
                if x < 0 or y < 0:
                    raise ValidationError(f"polyline vertex ({x},{y}) has negative coordinates")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "ped_polylines", lines)

    def __len__(self) -> int:
        return len(self.points) + sum(len(line) for line in self.ped_polylines)

    def is_empty(self) -> bool:
        return not self.points and not self.ped_polylines


def bresenham_line(x0: int, y0: int, x1: int, y1: int) -> list[tuple[int, int]]:
    """Integer pixels of the 8-connected segment from (x0,y0) to (x1,y1), inclusive."""
    pixels = []
    dx = abs(x1 - x0)
    dy = -abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    while True:
        pixels.append((x0, y0))
        if x0 == x1 and y0 == y1:
            break
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x0 += sx
        if e2 <= dx:
            err += dx
            y0 += sy
    return pixels


def rasterize_points(
    annotations: PointAnnotationSet, width: int, height: int
) -> LabelMap:
    """Burn point annotations into a dense class map.

    Single points set their class id at their pixel; PED polylines are
    rasterized segment-by-segment with Bresenham interpolation and every
    covered pixel set to PED. Later annotations overwrite earlier ones at
    the same pixel (last-writer-wins in input order).
    """
    out = np.zeros((height, width), dtype=np.uint8)
    for x, y, c in annotations.points:
        if not (0 <= x < width and 0 <= y < height):
            raise ValidationError(
                f"point ({x},{y}) lies outside the {width}x{height} image"
            )
        out[y, x] = c
    for line in annotations.ped_polylines:
        for x, y in line:
            if not (0 <= x < width and 0 <= y < height):
                raise ValidationError(
                    f"polyline vertex ({x},{y}) lies outside the {width}x{height} image"
                )
        for (x0, y0), (x1, y1) in zip(line, line[1:]):
            for x, y in bresenham_line(x0, y0, x1, y1):
                out[y, x] = PED
    return LabelMap(out, DEFAULT_NUM_CLASSES)
