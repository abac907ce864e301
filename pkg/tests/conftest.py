"""Shared fixtures: the stripe fixture used across CLI/server tests and a
synthetic corpus (stripes, nested rectangles, gradient ramps, seeded noise)
for the growth-oracle equivalence checks."""

from __future__ import annotations

import numpy as np
import pytest

from fluidlabel import GrayImage, PointAnnotationSet


def stripe_array() -> np.ndarray:
    """39x39, three 13-wide vertical stripes: 50 / 50 / 200."""
    arr = np.zeros((39, 39), dtype=np.uint8)
    arr[:, :13] = 50
    arr[:, 13:26] = 50
    arr[:, 26:] = 200
    return arr


@pytest.fixture
def stripe_image() -> GrayImage:
    return GrayImage(stripe_array())


@pytest.fixture
def stripe_points() -> PointAnnotationSet:
    return PointAnnotationSet(points=((6, 6, 1),))


def _noise_patches(rng: np.random.Generator, size: int, levels) -> np.ndarray:
    """Blocky image whose regions have overlapping intensity distributions."""
    arr = np.empty((size, size), dtype=np.uint8)
    third = size // 3
    for i, level in enumerate(levels):
        lo = max(0, level - 12)
        hi = min(255, level + 12)
        cols = slice(i * third, size if i == len(levels) - 1 else (i + 1) * third)
        arr[:, cols] = rng.integers(lo, hi + 1, size=(size, arr[:, cols].shape[1]))
    return arr


def growth_corpus() -> list[dict]:
    """>= 20 synthetic annotation scenarios, every image <= 64x64."""
    rng = np.random.default_rng(20240817)
    cases: list[dict] = []

    def add(name, arr, points=(), polylines=(), region_size=13, **cfg):
        cases.append(
            dict(
                name=name,
                image=GrayImage(arr),
                points=PointAnnotationSet(points=tuple(points),
                                          ped_polylines=tuple(polylines)),
                region_size=region_size,
                cfg=cfg,
            )
        )

    # vertical stripes, assorted intensities and seeds
    for idx, levels in enumerate(
        [(50, 50, 200), (50, 120, 200), (10, 240, 10), (90, 90, 90)]
    ):
        arr = np.zeros((39, 39), dtype=np.uint8)
        arr[:, :13] = levels[0]
        arr[:, 13:26] = levels[1]
        arr[:, 26:] = levels[2]
        add(f"vstripes{idx}-irf", arr, points=[(6, 19, 1)])
        add(f"vstripes{idx}-srf", arr, points=[(32, 6, 2)])

    # horizontal stripes with a PED polyline in the bottom band (grows up)
    for idx, levels in enumerate([(200, 60, 60), (60, 60, 200), (128, 128, 128)]):
        arr = np.zeros((39, 39), dtype=np.uint8)
        arr[:13, :] = levels[0]
        arr[13:26, :] = levels[1]
        arr[26:, :] = levels[2]
        add(f"hstripes{idx}-ped", arr, polylines=[((4, 32), (30, 32))])

    # nested rectangles
    for idx, (outer, ring, core) in enumerate([(30, 100, 220), (40, 45, 230)]):
        arr = np.full((52, 52), outer, dtype=np.uint8)
        arr[10:42, 10:42] = ring
        arr[20:32, 20:32] = core
        add(f"nested{idx}-core", arr, points=[(26, 26, 1)])
        add(f"nested{idx}-ring", arr, points=[(12, 26, 2)])

    # gradient ramps
    ramp_x = np.tile(np.linspace(0, 255, 64, dtype=np.uint8), (64, 1))
    add("ramp-x", ramp_x, points=[(8, 32, 1)], region_size=8)
    ramp_y = ramp_x.T.copy()
    add("ramp-y", ramp_y, points=[(32, 8, 2)], region_size=8)
    gentle = np.tile(np.linspace(100, 140, 64, dtype=np.uint8), (64, 1))
    add("ramp-gentle", gentle, points=[(32, 32, 1)], region_size=8)
    add("ramp-gentle-ped", gentle, polylines=[((10, 56), (50, 56))], region_size=8)

    # seeded noise with overlapping distributions, assorted thresholds
    for idx in range(4):
        arr = _noise_patches(rng, 48, (80, 96, 112))
        add(f"noise{idx}", arr, points=[(8, 24, 1)], region_size=12,
            threshold_srf_irf=0.5 + 0.1 * idx)
    add("noise-ped", _noise_patches(rng, 48, (100, 104, 108)),
        polylines=[((6, 40), (40, 40))], region_size=12, threshold_ped=0.6)

    # uniform flood + two-class scene
    add("uniform", np.full((26, 26), 128, dtype=np.uint8), points=[(6, 6, 1)])
    two = np.zeros((39, 39), dtype=np.uint8)
    two[:, :13] = 70
    two[:, 13:] = 180
    add("two-class", two, points=[(6, 6, 1), (32, 32, 2)])

    assert len(cases) >= 20
    return cases


@pytest.fixture(scope="session")
def corpus() -> list[dict]:
    return growth_corpus()
