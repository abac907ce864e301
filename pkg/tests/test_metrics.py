import numpy as np
import pytest

from fluidlabel import LabelMap, ValidationError, evaluate
from fluidlabel.metrics import dice, miou

from oracles import metrics_oracle


def label_map(arr, m=4) -> LabelMap:
    return LabelMap(np.asarray(arr, dtype=np.uint8), m)


class TestDice:
    def test_identical_maps(self):
        rng = np.random.default_rng(1)
        arr = rng.integers(0, 4, size=(10, 10))
        scores = dice(label_map(arr), label_map(arr))
        assert all(d == 1.0 for d in scores.dice_per_class)
        assert scores.mean_dice == 1.0

    def test_disjoint_masks(self):
        a = np.zeros((4, 4), dtype=np.uint8)
        b = np.zeros((4, 4), dtype=np.uint8)
        a[:2] = 1
        b[2:] = 1
        scores = dice(label_map(a), label_map(b))
        assert scores.dice_per_class[1] == 0.0

    def test_half_overlap(self):
        # gt region of 10 px, prediction covers 5 of them and nothing else
        gt = np.zeros((5, 4), dtype=np.uint8)
        gt[:, :2] = 1  # 10 pixels
        pred = np.zeros((5, 4), dtype=np.uint8)
        pred[:, 0] = 1  # 5 pixels, all true positives
        scores = dice(label_map(pred), label_map(gt))
        assert scores.dice_per_class[1] == pytest.approx(2 * 5 / (5 + 10), abs=1e-12)
        assert scores.dice_per_class[1] == pytest.approx(2 / 3, abs=1e-12)

    def test_absent_class_convention(self):
        scores = evaluate(label_map(np.zeros((3, 3))), label_map(np.zeros((3, 3))))
        # classes 1..3 absent from both: excluded from mean, scored 1.0
        assert scores.dice_per_class[1:] == (1.0, 1.0, 1.0)
        assert scores.mean_dice == 1.0

    def test_dimension_mismatch(self):
        with pytest.raises(ValidationError):
            evaluate(label_map(np.zeros((2, 2))), label_map(np.zeros((3, 3))))


class TestIoU:
    def test_identical(self):
        rng = np.random.default_rng(2)
        arr = rng.integers(0, 4, size=(8, 8))
        assert miou(label_map(arr), label_map(arr)).mean_iou == 1.0

    def test_dice_identity_on_single_class_masks(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            a = (rng.random((8, 8)) < 0.4).astype(np.uint8)
            b = (rng.random((8, 8)) < 0.4).astype(np.uint8)
            scores = evaluate(label_map(a, 2), label_map(b, 2))
            d = scores.dice_per_class[1]
            i = scores.iou_per_class[1]
            if d < 1.0:
                assert i == pytest.approx(d / (2 - d), abs=1e-12)

    def test_random_pairs_match_set_oracle(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            a = rng.integers(0, 4, size=(16, 16)).astype(np.uint8)
            b = rng.integers(0, 4, size=(16, 16)).astype(np.uint8)
            scores = evaluate(label_map(a), label_map(b))
            exp_dice, exp_dsc, exp_iou, exp_miou = metrics_oracle(a, b, 4)
            for got, want in zip(scores.dice_per_class, exp_dice):
                assert got == pytest.approx(want, abs=1e-9)
            for got, want in zip(scores.iou_per_class, exp_iou):
                assert got == pytest.approx(want, abs=1e-9)
            assert scores.mean_dice == pytest.approx(exp_dsc, abs=1e-9)
            assert scores.mean_iou == pytest.approx(exp_miou, abs=1e-9)


class TestProperties:
    def test_symmetry(self):
        rng = np.random.default_rng(5)
        a = rng.integers(0, 4, size=(12, 12)).astype(np.uint8)
        b = rng.integers(0, 4, size=(12, 12)).astype(np.uint8)
        s1 = evaluate(label_map(a), label_map(b))
        s2 = evaluate(label_map(b), label_map(a))
        assert s1 == s2

    def test_iou_bounded_by_dice(self):
        rng = np.random.default_rng(6)
        a = rng.integers(0, 4, size=(12, 12)).astype(np.uint8)
        b = rng.integers(0, 4, size=(12, 12)).astype(np.uint8)
        scores = evaluate(label_map(a), label_map(b))
        for d, i in zip(scores.dice_per_class, scores.iou_per_class):
            assert i <= d <= 1.0

    def test_permutation_invariance(self):
        rng = np.random.default_rng(7)
        a = rng.integers(0, 4, size=(6, 6)).astype(np.uint8)
        b = rng.integers(0, 4, size=(6, 6)).astype(np.uint8)
        perm = rng.permutation(36)
        pa = a.ravel()[perm].reshape(6, 6)
        pb = b.ravel()[perm].reshape(6, 6)
        assert evaluate(label_map(a), label_map(b)) == evaluate(
            label_map(pa), label_map(pb)
        )
