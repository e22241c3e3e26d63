import random

import numpy as np
import pytest

from pointqa.errors import ContractError, CorruptFeatureError
from pointqa.features import (
    FeatureStore,
    ProposalSet,
    geometry_features,
    load_proposals,
    save_proposals,
    select_regions,
)
from pointqa.geometry import BoundingBox, Point

from oracles import brute_force_containing


def random_proposals(rng, image_id="img", p=10, d=8, span=100):
    boxes = np.array(
        [
            [rng.randrange(0, span), rng.randrange(0, span), rng.randrange(1, 40), rng.randrange(1, 40)]
            for _ in range(p)
        ],
        dtype=np.float32,
    )
    return ProposalSet(
        image_id=image_id,
        boxes=boxes,
        scores=np.array([rng.random() for _ in range(p)], dtype=np.float32),
        features=np.arange(p * d, dtype=np.float32).reshape(p, d) / (p * d),
    )


def test_all_containing_keeps_containing_subset():
    proposals = ProposalSet(
        "img",
        boxes=np.array([[0, 0, 10, 10], [5, 5, 10, 10], [50, 50, 10, 10]], dtype=np.float32),
        scores=np.array([0.9, 0.5, 0.8], dtype=np.float32),
        features=np.eye(3, 8, dtype=np.float32),
    )
    out = select_regions(proposals, Point(6, 6), "all_containing", n=5)
    assert out.mask.tolist() == [True, True, False, False, False]
    np.testing.assert_array_equal(out.boxes[0], [0, 0, 10, 10])
    np.testing.assert_array_equal(out.boxes[1], [5, 5, 10, 10])
    assert not out.used_fallback
    # padding rows are exactly zero
    assert not out.features[2:].any()
    assert not out.boxes[2:].any()


def test_top_score_and_smallest_pick_single_member():
    proposals = ProposalSet(
        "img",
        boxes=np.array([[0, 0, 20, 20], [2, 2, 6, 6], [1, 1, 12, 12]], dtype=np.float32),
        scores=np.array([0.7, 0.2, 0.9], dtype=np.float32),
        features=np.eye(3, 8, dtype=np.float32),
    )
    top = select_regions(proposals, Point(4, 4), "top_score", n=4)
    assert top.valid_count == 1
    np.testing.assert_array_equal(top.boxes[0], [1, 1, 12, 12])
    smallest = select_regions(proposals, Point(4, 4), "smallest", n=4)
    assert smallest.valid_count == 1
    np.testing.assert_array_equal(smallest.boxes[0], [2, 2, 6, 6])


def test_select_regions_matches_brute_force_on_10000_cases():
    rng = random.Random(2024)
    for _ in range(10_000):
        proposals = random_proposals(rng, p=rng.randrange(1, 12))
        point = Point(rng.randrange(0, 110), rng.randrange(0, 110))
        out = select_regions(proposals, point, "all_containing", n=12)
        expected = brute_force_containing(proposals.boxes, point.x, point.y)
        if expected:
            assert not out.used_fallback
            got = {
                i
                for i in range(proposals.count)
                if any(
                    out.mask[j] and np.array_equal(out.boxes[j], proposals.boxes[i])
                    for j in range(out.valid_count)
                )
            }
            assert expected <= got
            assert out.valid_count == len(expected)
        else:
            assert out.used_fallback
            assert out.valid_count == 1


def test_fallback_nearest_center():
    proposals = ProposalSet(
        "img",
        boxes=np.array([[0, 0, 10, 10], [80, 80, 10, 10]], dtype=np.float32),
        scores=np.array([0.5, 0.5], dtype=np.float32),
        features=np.eye(2, 8, dtype=np.float32),
    )
    out = select_regions(proposals, Point(70, 70), "all_containing", n=4)
    assert out.used_fallback
    np.testing.assert_array_equal(out.boxes[0], [80, 80, 10, 10])


def test_full_image_and_gt_box_strategies():
    proposals = ProposalSet(
        "img",
        boxes=np.array([[0, 0, 10, 10], [1, 1, 10, 10], [50, 50, 20, 20]], dtype=np.float32),
        scores=np.array([0.9, 0.8, 0.7], dtype=np.float32),
        features=np.eye(3, 8, dtype=np.float32),
    )
    full = select_regions(proposals, None, "full_image", n=4)
    assert full.valid_count == 3
    gt = select_regions(proposals, None, "gt_box", n=4, gt_box=BoundingBox(0, 0, 10, 10))
    assert gt.valid_count == 2  # both overlapping boxes have iou >= 0.5


def test_truncation_keeps_highest_scores_in_order():
    rng = random.Random(3)
    proposals = random_proposals(rng, p=10)
    out = select_regions(proposals, None, "full_image", n=4)
    kept_scores = sorted(proposals.scores.tolist(), reverse=True)[:4]
    got = []
    for j in range(4):
        idx = next(
            i for i in range(10) if np.array_equal(proposals.boxes[i], out.boxes[j])
        )
        got.append(idx)
    assert got == sorted(got)  # original order preserved
    assert sorted(proposals.scores[got].tolist(), reverse=True) == kept_scores


def test_single_region_strategies_pick_from_containing_set():
    rng = random.Random(77)
    checked = 0
    for _ in range(500):
        proposals = random_proposals(rng, p=rng.randrange(2, 12))
        point = Point(rng.randrange(0, 110), rng.randrange(0, 110))
        containing = brute_force_containing(proposals.boxes, point.x, point.y)
        if not containing:
            continue
        for strategy in ("top_score", "smallest"):
            out = select_regions(proposals, point, strategy, n=12)
            assert out.valid_count == 1
            member = any(
                np.array_equal(out.boxes[0], proposals.boxes[i]) for i in containing
            )
            assert member
        checked += 1
    assert checked > 50


def test_strategy_argument_contract():
    rng = random.Random(1)
    proposals = random_proposals(rng, p=3)
    with pytest.raises(ContractError):
        select_regions(proposals, None, "all_containing", n=4)
    with pytest.raises(ContractError):
        select_regions(proposals, Point(0, 0), "gt_box", n=4)
    with pytest.raises(ContractError):
        select_regions(proposals, Point(0, 0), "nope", n=4)


def test_pqf_round_trip(tmp_path):
    rng = random.Random(8)
    proposals = random_proposals(rng, p=7, d=16)
    path = tmp_path / "img.pqf"
    save_proposals(proposals, path)
    loaded = load_proposals(path, "img")
    np.testing.assert_array_equal(loaded.boxes, proposals.boxes)
    np.testing.assert_array_equal(loaded.scores, proposals.scores)
    np.testing.assert_array_equal(loaded.features, proposals.features)


def test_pqf_minimal_file_size(tmp_path):
    proposals = ProposalSet(
        "one",
        boxes=np.array([[1, 2, 3, 4]], dtype=np.float32),
        scores=np.array([0.5], dtype=np.float32),
        features=np.zeros((1, 8), dtype=np.float32),
    )
    path = tmp_path / "one.pqf"
    save_proposals(proposals, path)
    # magic + P + D + one 5-f32 record + 8 f32 features
    assert path.stat().st_size == 4 + 4 + 4 + 20 + 32
    assert load_proposals(path).feature_dim == 8


def test_pqf_bad_magic_and_truncation(tmp_path):
    path = tmp_path / "bad.pqf"
    path.write_bytes(b"NOPE" + b"\x00" * 20)
    with pytest.raises(CorruptFeatureError):
        load_proposals(path)
    rng = random.Random(9)
    proposals = random_proposals(rng, p=3, d=8)
    good = tmp_path / "good.pqf"
    save_proposals(proposals, good)
    blob = good.read_bytes()
    truncated = tmp_path / "trunc.pqf"
    truncated.write_bytes(blob[:-10])
    with pytest.raises(CorruptFeatureError) as err:
        load_proposals(truncated)
    assert err.value.offset is not None


def test_feature_store_save_and_open(tmp_path):
    rng = random.Random(10)
    sets = {f"img{i}": random_proposals(rng, f"img{i}") for i in range(3)}
    store = FeatureStore.in_memory(sets)
    store.save(tmp_path / "features")
    reopened = FeatureStore.open(tmp_path / "features")
    assert reopened.image_ids() == ["img0", "img1", "img2"]
    np.testing.assert_array_equal(reopened.get("img1").features, sets["img1"].features)
    assert "img1" in reopened
    with pytest.raises(KeyError):
        reopened.get("missing")


def test_geometry_features_zero_rows_stay_zero():
    boxes = np.array([[10, 20, 30, 40], [0, 0, 0, 0]], dtype=np.float32)
    geo = geometry_features(boxes, 100, 200)
    np.testing.assert_allclose(geo[0], [0.1, 0.1, 0.3, 0.2, 0.06], rtol=1e-6)
    assert not geo[1].any()
