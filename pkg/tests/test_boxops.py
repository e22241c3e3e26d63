"""Both kernel backends must agree with each other and the scalar
reference exactly."""

import random

import numpy as np
import pytest

from pointqa.boxops import _kernels_py
from pointqa.geometry import BoundingBox, iou

from oracles import brute_force_containing, cell_count_iou

try:
    from pointqa.boxops import _kernels_cy

    BACKENDS = [_kernels_py, _kernels_cy]
except ImportError:
    BACKENDS = [_kernels_py]


def random_boxes(rng, n, span=40, max_side=20):
    return np.array(
        [
            [rng.randrange(0, span), rng.randrange(0, span), rng.randrange(1, max_side), rng.randrange(1, max_side)]
            for _ in range(n)
        ],
        dtype=np.float64,
    )


@pytest.mark.parametrize("kernels", BACKENDS, ids=lambda k: k.BACKEND)
def test_iou_matrix_matches_scalar_and_cell_oracle(kernels):
    rng = random.Random(5)
    a = random_boxes(rng, 12)
    b = random_boxes(rng, 9)
    mat = kernels.iou_matrix(a, b)
    for i in range(len(a)):
        for j in range(len(b)):
            scalar = iou(BoundingBox(*a[i]), BoundingBox(*b[j]))
            assert mat[i, j] == scalar
            assert mat[i, j] == cell_count_iou(
                tuple(int(v) for v in a[i]), tuple(int(v) for v in b[j])
            )


@pytest.mark.parametrize("kernels", BACKENDS, ids=lambda k: k.BACKEND)
def test_contains_mask_matches_brute_force(kernels):
    rng = random.Random(11)
    for _ in range(100):
        boxes = random_boxes(rng, 15)
        px, py = rng.randrange(0, 50), rng.randrange(0, 50)
        mask = np.asarray(kernels.contains_mask(boxes, float(px), float(py)))
        assert set(np.flatnonzero(mask)) == brute_force_containing(boxes, px, py)


@pytest.mark.parametrize("kernels", BACKENDS, ids=lambda k: k.BACKEND)
def test_greedy_dedup_collapses_duplicates(kernels):
    boxes = np.array(
        [
            [0, 0, 10, 10],
            [1, 0, 10, 10],  # iou 9/11 with the first
            [30, 30, 5, 5],
        ],
        dtype=np.float64,
    )
    keep = np.asarray(kernels.greedy_dedup_mask(boxes, 0.5))
    assert keep.sum() == 2
    assert keep[2]
    assert keep[0] != keep[1]


def test_backends_agree():
    if len(BACKENDS) < 2:
        pytest.skip("compiled backend not built")
    rng = random.Random(21)
    for _ in range(50):
        boxes = random_boxes(rng, 10)
        np.testing.assert_array_equal(
            BACKENDS[0].iou_matrix(boxes, boxes), BACKENDS[1].iou_matrix(boxes, boxes)
        )
        np.testing.assert_array_equal(
            np.asarray(BACKENDS[0].contains_mask(boxes, 7.0, 9.0)),
            np.asarray(BACKENDS[1].contains_mask(boxes, 7.0, 9.0)),
        )
        np.testing.assert_array_equal(
            np.asarray(BACKENDS[0].greedy_dedup_mask(boxes, 0.4)),
            np.asarray(BACKENDS[1].greedy_dedup_mask(boxes, 0.4)),
        )
