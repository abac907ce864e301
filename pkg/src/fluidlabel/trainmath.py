"""Teacher-student training calculus as pure functions.

Everything a trainer needs from this toolkit without pulling in a deep
learning framework: EMA weight tracking, trust-weighted cross-entropy,
soft Dice, consistency MSE, the Gaussian ramp schedule, Gaussian input
perturbation, and total-loss assembly. No autograd, no network.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .rasters import GrayImage, LabelMap, ProbMap, TrustMap

LOG_CLAMP = 1e-7
DICE_SMOOTH = 1e-5


@dataclass(frozen=True)
class LossWeights:
    """Loss term weights and schedule parameters."""

    alpha: float = 1.0
    beta: float = 1.0
    w_max: float = 0.1
    t_max: int = 1000
    ema_decay: float = 0.99

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0 or self.w_max < 0:
            raise ValidationError("loss weights must be nonnegative")
        if self.t_max < 1:
            raise ValidationError("t_max must be at least 1")
        if not 0.0 <= self.ema_decay < 1.0:
            raise ValidationError("ema_decay must lie in [0, 1)")


def ema_update(teacher: np.ndarray, student: np.ndarray, decay: float) -> np.ndarray:
    """Exponential moving average: decay * teacher + (1 - decay) * student."""
    teacher = np.asarray(teacher, dtype=np.float64)
    student = np.asarray(student, dtype=np.float64)
    if teacher.shape != student.shape:
        raise ValidationError(
            f"parameter vectors differ in length: {teacher.shape} vs {student.shape}"
        )
    if not (np.all(np.isfinite(teacher)) and np.all(np.isfinite(student))):
        raise ValidationError("parameter vectors must be finite")
    return decay * teacher + (1.0 - decay) * student


def perturb(image: GrayImage, sigma: float, rng_seed: int) -> GrayImage:
    """Add Gaussian intensity noise, rounded and clamped to [0, 255].

    Deterministic for a fixed seed.
    """
    if sigma < 0:
        raise ValidationError("sigma must be nonnegative")
    if sigma == 0:
        return GrayImage(image.pixels)
    rng = np.random.default_rng(rng_seed)
    noise = rng.normal(0.0, sigma, size=image.pixels.shape)
    noisy = np.rint(image.pixels.astype(np.float64) + noise)
    return GrayImage(np.clip(noisy, 0, 255).astype(np.uint8))


def weighted_cross_entropy(probs: ProbMap, target: LabelMap, weights: TrustMap) -> float:
    """Mean over pixels of weight * -log(probability of the target class)."""
    _check_probs_target(probs, target)
    if (weights.height, weights.width) != (target.height, target.width):
        raise ValidationError("weight map dimensions differ from target")
    m = probs.num_classes
    flat_probs = probs.values.reshape(m, -1).astype(np.float64)
    flat_target = target.pixels.ravel()
    picked = flat_probs[flat_target, np.arange(flat_target.size)]
    losses = -np.log(np.maximum(picked, LOG_CLAMP))
    return float(np.mean(weights.values.ravel().astype(np.float64) * losses))


def dice_loss(probs: ProbMap, target: LabelMap) -> float:
    """One minus the mean per-class soft Dice overlap."""
    _check_probs_target(probs, target)
    m = probs.num_classes
    flat_probs = probs.values.reshape(m, -1).astype(np.float64)
    flat_target = target.pixels.ravel()
    scores = []
    for c in range(m):
        mask = (flat_target == c).astype(np.float64)
        inter = float(np.sum(flat_probs[c] * mask))
        denom = float(np.sum(flat_probs[c])) + float(np.sum(mask))
        scores.append((2.0 * inter + DICE_SMOOTH) / (denom + DICE_SMOOTH))
    return 1.0 - sum(scores) / m


def consistency_mse(student: ProbMap, teacher: ProbMap) -> float:
    """Mean squared difference over every pixel-class entry."""
    if student.values.shape != teacher.values.shape:
        raise ValidationError(
            f"probability maps differ in shape: {student.values.shape} "
            f"vs {teacher.values.shape}"
        )
    diff = student.values.astype(np.float64) - teacher.values.astype(np.float64)
    return float(np.mean(diff * diff))


def ramp_weight(t: int, cfg: LossWeights = LossWeights()) -> float:
    """Consistency weight w_max * exp(-5 * (1 - t/t_max)^2), clamped past t_max."""
    if t < 0:
        raise ValidationError("iteration must be nonnegative")
    if t >= cfg.t_max:
        return cfg.w_max
    frac = 1.0 - t / cfg.t_max
    return cfg.w_max * math.exp(-5.0 * frac * frac)


def total_loss(
    l_f: float, l_p: float, l_con: float, t: int, cfg: LossWeights = LossWeights()
) -> float:
    """alpha * fully-labeled loss + beta * pseudo-labeled loss + ramp * consistency."""
    for name, v in (("l_f", l_f), ("l_p", l_p), ("l_con", l_con)):
        if not math.isfinite(v):
            raise ValidationError(f"{name} must be finite, got {v}")
    return cfg.alpha * l_f + cfg.beta * l_p + ramp_weight(t, cfg) * l_con


def _check_probs_target(probs: ProbMap, target: LabelMap) -> None:
    if (probs.height, probs.width) != (target.height, target.width):
        raise ValidationError("probability map and target dimensions differ")
    if target.num_classes != probs.num_classes:
        raise ValidationError(
            f"class count mismatch: probabilities have {probs.num_classes}, "
            f"target has {target.num_classes}"
        )
