"""Segmentation overlap metrics: per-class Dice and IoU with the means
reported in evaluation tables (Dice averaged over foreground classes,
IoU over all classes present)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .rasters import LabelMap

FOREGROUND_CLASSES = (1, 2, 3)


@dataclass(frozen=True)
class SegScores:
    """Per-class and mean overlap scores.

    A class absent from both maps scores 1.0 by convention and is excluded
    from the means; mean_dice covers foreground classes only, mean_iou all
    classes present in either map.
    """

    dice_per_class: tuple[float, ...]
    mean_dice: float
    iou_per_class: tuple[float, ...]
    mean_iou: float


def evaluate(pred: LabelMap, gt: LabelMap) -> SegScores:
    """Compute Dice and IoU for every class of a prediction/truth pair."""
    if (pred.height, pred.width) != (gt.height, gt.width):
        raise ValidationError("prediction and ground truth dimensions differ")
    if pred.num_classes != gt.num_classes:
        raise ValidationError(
            f"class count mismatch: {pred.num_classes} vs {gt.num_classes}"
        )
    m = pred.num_classes
    p = pred.pixels.ravel()
    g = gt.pixels.ravel()

    dice: list[float] = []
    iou: list[float] = []
    present: list[bool] = []
    for c in range(m):
        in_p = p == c
        in_g = g == c
        inter = int(np.count_nonzero(in_p & in_g))
        np_c = int(np.count_nonzero(in_p))
        ng_c = int(np.count_nonzero(in_g))
        union = np_c + ng_c - inter
        if np_c + ng_c == 0:
            dice.append(1.0)
            iou.append(1.0)
            present.append(False)
        else:
            dice.append(2.0 * inter / (np_c + ng_c))
            iou.append(inter / union)
            present.append(True)

    fg = [dice[c] for c in FOREGROUND_CLASSES if c < m and present[c]]
    all_present = [iou[c] for c in range(m) if present[c]]
    mean_dice = sum(fg) / len(fg) if fg else 1.0
    mean_iou = sum(all_present) / len(all_present) if all_present else 1.0
    return SegScores(tuple(dice), mean_dice, tuple(iou), mean_iou)


def dice(pred: LabelMap, gt: LabelMap) -> SegScores:
    """Overlap scores, of which the Dice half is the headline."""
    return evaluate(pred, gt)


def miou(pred: LabelMap, gt: LabelMap) -> SegScores:
    """Overlap scores, of which the IoU half is the headline."""
    return evaluate(pred, gt)
