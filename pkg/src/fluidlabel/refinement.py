"""Label-noise detection and repair for pseudo-labels.

Given an external model's per-pixel class probabilities, estimate which
pseudo-label pixels are mislabeled (per-class confidence thresholds, a
calibrated confusion matrix, and the joint distribution between given and
latent labels, pruned by noise rate), then rewrite flagged pixels from the
probabilities and refresh their trust values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateJointError, ValidationError
from .rasters import LabelMap, ProbMap, TrustMap


@dataclass(frozen=True)
class RefineConfig:
    """Error-map filtering and trust-rewrite knobs.

    Of the pruned candidates, the self_confidence_keep_fraction with the
    lowest predicted probability for their current label are flagged, plus
    every candidate whose trust is below trust_gate. Flagged pixels get
    trust delta; delta="static" leaves the trust map untouched.
    """

    self_confidence_keep_fraction: float = 0.8
    trust_gate: float = 0.8
    delta: float | str = 1.0

    def __post_init__(self):
        if not 0.0 <= self.self_confidence_keep_fraction <= 1.0:
            raise ValidationError("self_confidence_keep_fraction must lie in [0, 1]")
        if not 0.0 <= self.trust_gate <= 1.0:
            raise ValidationError("trust_gate must lie in [0, 1]")
        if isinstance(self.delta, str):
            if self.delta != "static":
                raise ValidationError('delta must be a float in [0, 1] or "static"')
        elif not 0.0 <= float(self.delta) <= 1.0:
            raise ValidationError("delta must lie in [0, 1]")


@dataclass(frozen=True)
class ClassThresholds:
    """Mean self-probability per class; NaN where a class has no labeled pixel."""

    values: np.ndarray  # (m,) float64

    def defined(self, j: int) -> bool:
        return not math.isnan(self.values[j])


@dataclass(frozen=True)
class JointEstimate:
    """Confusion counts plus their calibrated and normalized forms."""

    confusion: np.ndarray  # (m, m) int64
    calibrated: np.ndarray | None = None  # (m, m) float64
    joint: np.ndarray | None = None  # (m, m) float64


@dataclass(frozen=True)
class ErrorMap:
    """Per-pixel bit, 1 where the label was judged wrong."""

    bits: np.ndarray  # (h, w) uint8

    def __post_init__(self):
        arr = np.ascontiguousarray(self.bits, dtype=np.uint8)
        if arr.ndim != 2 or np.any(arr > 1):
            raise ValidationError("error map must be a 2-D bit array")
        arr.flags.writeable = False
        object.__setattr__(self, "bits", arr)

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]


def _check_dims(probs: ProbMap, labels: LabelMap) -> None:
    if (probs.height, probs.width) != (labels.height, labels.width):
        raise ValidationError("probability map and label map dimensions differ")
    if probs.num_classes != labels.num_classes:
        raise ValidationError(
            f"class count mismatch: probabilities have {probs.num_classes}, "
            f"labels have {labels.num_classes}"
        )


def class_thresholds(probs: ProbMap, labels: LabelMap) -> ClassThresholds:
    """Per-class mean predicted probability over pixels carrying that label.

    Uses exactly-rounded summation so the value is independent of pixel
    order; classes with no labeled pixels are marked undefined (NaN) and
    never participate in confusion counting.
    """
    _check_dims(probs, labels)
    m = probs.num_classes
    flat_labels = labels.pixels.ravel()
    flat_probs = probs.values.reshape(m, -1).astype(np.float64)
    out = np.full(m, np.nan, dtype=np.float64)
    for j in range(m):
        members = flat_probs[j, flat_labels == j]
        if members.size:
            out[j] = math.fsum(members) / members.size
    return ClassThresholds(out)


def confusion(
    probs: ProbMap, labels: LabelMap, thresholds: ClassThresholds
) -> JointEstimate:
    """Count pixels per (given label, inferred latent label) cell.

    A pixel labeled i lands in cell (i, j) where j is the highest-probability
    class among those whose probability clears its class threshold (ties to
    the smaller class id); pixels clearing no threshold are left uncounted.
    """
    _check_dims(probs, labels)
    m = probs.num_classes
    flat_labels = labels.pixels.ravel()
    flat_probs = probs.values.reshape(m, -1).astype(np.float64)

    eligible = np.zeros_like(flat_probs, dtype=bool)
    for j in range(m):
        if thresholds.defined(j):
            eligible[j] = flat_probs[j] >= thresholds.values[j]
    masked = np.where(eligible, flat_probs, -1.0)
    best = masked.argmax(axis=0)  # first max wins: smaller class id on ties
    counted = eligible.any(axis=0)

    counts = np.zeros((m, m), dtype=np.int64)
    np.add.at(counts, (flat_labels[counted], best[counted]), 1)
    return JointEstimate(confusion=counts)


def calibrate_and_joint(est: JointEstimate, labels: LabelMap) -> JointEstimate:
    """Rescale confusion rows to the observed label counts and normalize.

    Row i of the calibrated matrix sums to the number of pixels labeled i;
    the joint is the calibrated matrix divided by its grand total.
    """
    c = est.confusion
    if not np.any(c):
        raise DegenerateJointError(
            "no pixel cleared any class threshold; cannot estimate the joint"
        )
    m = c.shape[0]
    label_counts = labels.class_counts().astype(np.float64)
    row_sums = c.sum(axis=1)
    calibrated = np.zeros((m, m), dtype=np.float64)
    for i in range(m):
        if row_sums[i] > 0:
            for j in range(m):
                calibrated[i, j] = c[i, j] / row_sums[i] * label_counts[i]
    total = math.fsum(calibrated.ravel())
    joint = calibrated / total
    return JointEstimate(confusion=c, calibrated=calibrated, joint=joint)


def _round_half_away(x: float) -> int:
    return int(math.floor(x + 0.5))


def estimate_error_map(
    probs: ProbMap,
    labels: LabelMap,
    trust: TrustMap,
    cfg: RefineConfig = RefineConfig(),
    est: JointEstimate | None = None,
) -> ErrorMap:
    """Flag probably-mislabeled pixels.

    For every off-diagonal joint cell (i, j), the n*Q[i][j] pixels labeled i
    with the highest probability of class j become candidates (prune by
    noise rate). Of the candidate pool, the keep-fraction with the lowest
    self-confidence is flagged, united with candidates whose trust falls
    below the gate. All ranking ties break toward the smaller pixel index.
    """
    _check_dims(probs, labels)
    if (trust.height, trust.width) != (labels.height, labels.width):
        raise ValidationError("trust map and label map dimensions differ")
    if est is None or est.joint is None:
        thresholds = class_thresholds(probs, labels)
        est = calibrate_and_joint(confusion(probs, labels, thresholds), labels)
    assert est.joint is not None

    m = probs.num_classes
    n = labels.width * labels.height
    flat_labels = labels.pixels.ravel()
    flat_probs = probs.values.reshape(m, -1)
    flat_trust = trust.values.ravel()

    candidates = np.zeros(n, dtype=bool)
    for i in range(m):
        members = np.flatnonzero(flat_labels == i)
        if members.size == 0:
            continue
        for j in range(m):
            if j == i:
                continue
            take = _round_half_away(n * est.joint[i, j])
            if take <= 0:
                continue
            take = min(take, members.size)
            order = np.argsort(-flat_probs[j, members], kind="stable")
            candidates[members[order[:take]]] = True

    pool = np.flatnonzero(candidates)
    bits = np.zeros(n, dtype=np.uint8)
    if pool.size:
        keep = _round_half_away(cfg.self_confidence_keep_fraction * pool.size)
        self_conf = flat_probs[flat_labels[pool], pool]
        order = np.argsort(self_conf, kind="stable")
        bits[pool[order[:keep]]] = 1
        bits[pool[flat_trust[pool] < cfg.trust_gate]] = 1
    return ErrorMap(bits.reshape(labels.height, labels.width))


def refine_labels(pseudo: LabelMap, probs: ProbMap, err: ErrorMap) -> LabelMap:
    """Rewrite flagged pixels with the argmax class of the probabilities
    (ties to the smaller class id); unflagged pixels are untouched."""
    _check_dims(probs, pseudo)
    if (err.height, err.width) != (pseudo.height, pseudo.width):
        raise ValidationError("error map and label map dimensions differ")
    predicted = probs.values.argmax(axis=0).astype(np.uint8)
    out = np.where(err.bits == 1, predicted, pseudo.pixels)
    return LabelMap(out, pseudo.num_classes)


def refine_trust(
    trust: TrustMap, err: ErrorMap, cfg: RefineConfig = RefineConfig()
) -> TrustMap:
    """Set flagged pixels' trust to delta; delta="static" keeps every value."""
    if (err.height, err.width) != (trust.height, trust.width):
        raise ValidationError("error map and trust map dimensions differ")
    if cfg.delta == "static":
        return TrustMap(trust.values)
    out = np.where(err.bits == 1, np.float32(cfg.delta), trust.values)
    return TrustMap(out)
