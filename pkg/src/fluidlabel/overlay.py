"""PNG overlay rendering for the annotation UI: the grayscale image with
translucent class-colored label regions and superpixel boundaries."""

from __future__ import annotations

import io

import numpy as np
from PIL import Image

from .rasters import GrayImage, LabelMap
from .superpixels import SuperpixelMap

# red IRF, blue SRF, green PED
CLASS_COLORS = {
    1: (255, 64, 64),
    2: (64, 96, 255),
    3: (64, 200, 64),
}
BOUNDARY_COLOR = (255, 240, 80)
LABEL_ALPHA = 0.45
BOUNDARY_ALPHA = 0.6


def boundary_mask(spmap: SuperpixelMap) -> np.ndarray:
    """Pixels whose right or lower 4-neighbor belongs to another block."""
    a = spmap.assignment
    mask = np.zeros(a.shape, dtype=bool)
    mask[:, :-1] |= a[:, :-1] != a[:, 1:]
    mask[:-1, :] |= a[:-1, :] != a[1:, :]
    return mask


def render_overlay(
    image: GrayImage,
    spmap: SuperpixelMap | None,
    labels: LabelMap | None,
) -> bytes:
    rgb = np.repeat(image.pixels[:, :, np.newaxis], 3, axis=2).astype(np.float64)
    if labels is not None:
        for cls, color in CLASS_COLORS.items():
            mask = labels.pixels == cls
            for ch in range(3):
                rgb[:, :, ch][mask] = (
                    (1 - LABEL_ALPHA) * rgb[:, :, ch][mask] + LABEL_ALPHA * color[ch]
                )
    if spmap is not None:
        mask = boundary_mask(spmap)
        for ch in range(3):
            rgb[:, :, ch][mask] = (
                (1 - BOUNDARY_ALPHA) * rgb[:, :, ch][mask]
                + BOUNDARY_ALPHA * BOUNDARY_COLOR[ch]
            )
    out = Image.fromarray(np.clip(rgb, 0, 255).astype(np.uint8), mode="RGB")
    buf = io.BytesIO()
    out.save(buf, format="PNG")
    return buf.getvalue()
