from pointqa.builders import VerbalSpatialConfig, build_dv_ds, detect_verbal_disambiguation
from pointqa.builders.verify import check_dv_ds
from pointqa.geometry import contains
from pointqa.scene_graph import load_annotations

from conftest import box, image_record, obj, write_jsonl


def test_detect_prepositional_phrase():
    assert detect_verbal_disambiguation("What color is the car on the left?") == (
        "car",
        "on the left",
    )


def test_detect_none_without_phrase():
    assert detect_verbal_disambiguation("What color is the car?") is None


def test_detect_stops_before_trailing_verb():
    assert detect_verbal_disambiguation("What is the man in the red shirt holding?") == (
        "man",
        "in the red shirt",
    )


def test_detect_multiword_preposition():
    assert detect_verbal_disambiguation("What color is the car in front of the house?") == (
        "car",
        "in front of the house",
    )


def _qa(qa_id, question, answer):
    return {"qa_id": qa_id, "question": question, "answer": answer}


def _two_car_record(image_id="img1"):
    return image_record(
        image_id,
        [
            obj("c1", "car", box(0, 50, 60, 40), ["red", "left"]),
            obj("c2", "car", box(120, 50, 60, 40), ["blue"]),
        ],
        [_qa(f"{image_id}:q1", "What color is the car on the left?", "red")],
    )


def test_build_dv_ds_pairs(tmp_path):
    store = load_annotations(write_jsonl(tmp_path / "a.jsonl", [_two_car_record()]))
    dv, ds, _ = build_dv_ds(store, VerbalSpatialConfig(seed=0))
    assert len(dv) == len(ds) == 1
    assert dv[0].qa_id == ds[0].qa_id
    assert dv[0].point is None
    assert ds[0].question == "What color is the car?"
    assert ds[0].answer == dv[0].answer == "red"
    assert contains(ds[0].gt_box, ds[0].point)
    # attribute overlap with the phrase picks the left car
    assert ds[0].gt_box.x == 0
    assert check_dv_ds(dv, ds) == []


def test_subject_must_repeat(tmp_path):
    rec = image_record(
        "img1",
        [obj("c1", "car", box(0, 50, 60, 40), ["red"])],
        [_qa("q1", "What color is the car on the left?", "red")],
    )
    store = load_annotations(write_jsonl(tmp_path / "a.jsonl", [rec]))
    dv, ds, report = build_dv_ds(store, VerbalSpatialConfig(seed=0))
    assert dv == [] and ds == []
    assert report.skip_reasons["subject_not_repeated"] == 1


def test_no_disambiguation_excluded(tmp_path):
    rec = image_record(
        "img1",
        [
            obj("c1", "car", box(0, 50, 60, 40), ["red"]),
            obj("c2", "car", box(120, 50, 60, 40), ["blue"]),
        ],
        [_qa("q1", "What color is the car?", "red")],
    )
    store = load_annotations(write_jsonl(tmp_path / "a.jsonl", [rec]))
    dv, ds, report = build_dv_ds(store, VerbalSpatialConfig(seed=0))
    assert dv == [] and ds == []
    assert report.skip_reasons["no_verbal_disambiguation"] == 1


def test_qa_id_sets_identical_across_many_images(tmp_path):
    records = [_two_car_record(f"img{i}") for i in range(9)]
    store = load_annotations(write_jsonl(tmp_path / "a.jsonl", records))
    dv, ds, _ = build_dv_ds(store, VerbalSpatialConfig(seed=2))
    assert {i.qa_id for i in dv} == {i.qa_id for i in ds}
    assert len(dv) == len(ds) == 9
    assert check_dv_ds(dv, ds) == []
