import random

import pytest

from pointqa.errors import InvalidGeometryError
from pointqa.geometry import BoundingBox, Point, center_point, contains, iou

from oracles import cell_count_iou


def test_iou_identical_boxes():
    a = BoundingBox(0, 0, 10, 10)
    assert iou(a, BoundingBox(0, 0, 10, 10)) == 1.0


def test_iou_disjoint_boxes():
    assert iou(BoundingBox(0, 0, 10, 10), BoundingBox(20, 20, 5, 5)) == 0.0


def test_iou_partial_overlap_matches_cell_count():
    a, b = BoundingBox(0, 0, 10, 10), BoundingBox(5, 0, 10, 10)
    expected = cell_count_iou((0, 0, 10, 10), (5, 0, 10, 10))
    assert expected == pytest.approx(1 / 3)
    assert iou(a, b) == expected


def test_iou_degenerate_box_rejected():
    with pytest.raises(InvalidGeometryError):
        BoundingBox(0, 0, 0, 10)
    with pytest.raises(InvalidGeometryError):
        BoundingBox(0, 0, 5, -1)


def test_iou_symmetric_and_matches_oracle_on_random_pairs():
    rng = random.Random(1234)
    for _ in range(1000):
        a = (rng.randrange(0, 30), rng.randrange(0, 30), rng.randrange(1, 20), rng.randrange(1, 20))
        b = (rng.randrange(0, 30), rng.randrange(0, 30), rng.randrange(1, 20), rng.randrange(1, 20))
        box_a, box_b = BoundingBox(*a), BoundingBox(*b)
        assert iou(box_a, box_b) == iou(box_b, box_a)
        assert iou(box_a, box_b) == cell_count_iou(a, b)


def test_contains_interior_point():
    assert contains(BoundingBox(0, 0, 10, 10), Point(5, 5))


def test_contains_half_open_right_edge():
    assert not contains(BoundingBox(0, 0, 10, 10), Point(10, 5))


def test_contains_closed_top_left_corner():
    assert contains(BoundingBox(2, 3, 4, 4), Point(2, 3))


def test_half_open_convention_partitions_shared_edges():
    rng = random.Random(7)
    left = BoundingBox(0, 0, 10, 10)
    right = BoundingBox(10, 0, 10, 10)
    above = BoundingBox(0, 0, 10, 10)
    below = BoundingBox(0, 10, 10, 10)
    for _ in range(200):
        p = Point(10, rng.randrange(0, 10))
        assert contains(left, p) + contains(right, p) == 1
        p = Point(rng.randrange(0, 10), 10)
        assert contains(above, p) + contains(below, p) == 1


def test_center_point_examples():
    assert center_point(BoundingBox(0, 0, 10, 10)) == Point(5, 5)
    assert center_point(BoundingBox(3, 3, 1, 1)) == Point(3, 3)
    assert center_point(BoundingBox(2, 4, 5, 7)) == Point(4, 7)


def test_center_point_always_contained():
    rng = random.Random(99)
    for _ in range(500):
        box = BoundingBox(
            rng.randrange(0, 50), rng.randrange(0, 50), rng.randrange(1, 40), rng.randrange(1, 40)
        )
        assert contains(box, center_point(box))
