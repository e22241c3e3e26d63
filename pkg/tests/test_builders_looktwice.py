import random

import pytest

from pointqa.builders import (
    LookTwiceConfig,
    bin_count_answer,
    build_looktwice_dataset,
    count_instances,
    extract_count_subject,
    generalize_question,
    match_subject_to_region,
)
from pointqa.builders.verify import check_looktwice
from pointqa.errors import ContractError, UnmappedClassError
from pointqa.scene_graph import load_annotations
from pointqa.text import singularize

from conftest import box, image_record, obj, write_jsonl

SUPER_MAP = {
    "truck": "vehicles",
    "car": "vehicles",
    "person": "beings",
    "dog": "beings",
    "umbrella": "objects",
    "sign": "objects",
    "chair": "objects",
}


def test_extract_subject_examples():
    assert extract_count_subject("How many trucks are there?") == "truck"
    assert extract_count_subject("What color is the car?") is None
    assert extract_count_subject("How many people are in the photo?") == "person"
    assert singularize("people") == "person"


def test_extract_subject_takes_head_noun():
    assert extract_count_subject("How many red cars are there?") == "car"
    assert extract_count_subject("How many of these are there?") is None


def test_match_subject_seeded_choice(tmp_path):
    rec = image_record(
        "img1",
        [
            obj("t1", "truck", box(0, 0, 30, 30)),
            obj("t2", "truck", box(100, 0, 30, 30)),
        ],
    )
    store = load_annotations(write_jsonl(tmp_path / "a.jsonl", [rec]))
    img = store["img1"]
    picks = {match_subject_to_region("truck", img, random.Random(9)).object_id for _ in range(5)}
    assert len(picks) == 1  # same seeded rng state each call start
    assert match_subject_to_region("zebra", img, random.Random(9)) is None
    single = image_record("img2", [obj("t1", "truck", box(0, 0, 30, 30))])
    store2 = load_annotations(write_jsonl(tmp_path / "b.jsonl", [single]))
    assert match_subject_to_region("truck", store2["img2"], random.Random(0)).object_id == "t1"


def test_bin_count_answer():
    assert bin_count_answer(1) == "1"
    assert bin_count_answer(2) == "2"
    assert bin_count_answer(7) == ">2"
    with pytest.raises(ContractError):
        bin_count_answer(0)


def test_generalize_question():
    assert generalize_question("truck", SUPER_MAP) == (
        "How many of these vehicles are there?",
        "How many of these are there?",
    )
    assert generalize_question("person", SUPER_MAP)[0] == "How many of these beings are there?"
    assert generalize_question("umbrella", SUPER_MAP)[0] == "How many of these objects are there?"
    with pytest.raises(UnmappedClassError):
        generalize_question("unicorn", SUPER_MAP)


def test_count_instances_with_dedup(tmp_path):
    rec = image_record(
        "img1",
        [
            obj("c1", "car", box(0, 0, 20, 20)),
            obj("c2", "car", box(60, 0, 20, 20)),
            obj("c3", "car", box(120, 0, 20, 20)),
            obj("d1", "dog", box(0, 100, 20, 20)),
            obj("d2", "dog", box(2, 100, 20, 20)),  # iou 18/22 with d1
        ],
    )
    store = load_annotations(write_jsonl(tmp_path / "a.jsonl", [rec]))
    img = store["img1"]
    assert count_instances(img, "car", 0.5) == 3
    assert count_instances(img, "dog", 0.5) == 1
    # low-overlap boxes stay distinct
    rec2 = image_record(
        "img2",
        [
            obj("d1", "dog", box(0, 0, 20, 20)),
            obj("d2", "dog", box(12, 0, 20, 20)),  # iou = 160/640 = 0.25 < 0.5
        ],
    )
    store2 = load_annotations(write_jsonl(tmp_path / "b.jsonl", [rec2]))
    assert count_instances(store2["img2"], "dog", 0.5) == 2
    with pytest.raises(ContractError):
        count_instances(img, "zebra", 0.5)


def _counting_image(image_id, class_counts: dict[str, int], qa_answers: dict[str, int]):
    objects = []
    i = 0
    for cls, count in class_counts.items():
        for _ in range(count):
            col, row = i % 5, i // 5
            objects.append(obj(f"{cls}{i}", cls, box(col * 40, row * 40, 30, 30)))
            i += 1
    qas = [
        {
            "qa_id": f"{image_id}:{cls}",
            "question": f"How many {cls}s are there?",
            "answer": str(n),
        }
        for cls, n in qa_answers.items()
    ]
    return image_record(image_id, objects, qas)


def make_counting_store(tmp_path, n_images=12):
    rng = random.Random(4)
    records = []
    for i in range(n_images):
        counts = {"car": rng.choice([1, 3]), "sign": rng.choice([2, 4])}
        while bin_count_answer(counts["car"]) == bin_count_answer(counts["sign"]):
            counts["sign"] = rng.choice([1, 2, 4])
        records.append(
            _counting_image(f"img{i:02d}", counts, {cls: n for cls, n in counts.items()})
        )
    return load_annotations(write_jsonl(tmp_path / "count.jsonl", records))


def test_build_looktwice_three_forms_share_point_and_answer(tmp_path):
    store = make_counting_store(tmp_path)
    config = LookTwiceConfig(
        seed=5, supercategory_map=SUPER_MAP, min_class_frequency=1,
        val_fraction=0.2, test_fraction=0.2,
    )
    instances, report = build_looktwice_dataset(store, config)
    groups = {}
    for inst in instances:
        groups.setdefault(inst.meta["group"], []).append(inst)
    for group in groups.values():
        assert len(group) == 3
        assert len({g.answer for g in group}) == 1
        assert len({(g.point.x, g.point.y) for g in group}) == 1
        assert {g.meta["question_form"] for g in group} == {"object", "supercategory", "generic"}
    assert check_looktwice(instances) == []


def test_eval_constraint_and_synthesized_counterparts(tmp_path):
    store = make_counting_store(tmp_path)
    config = LookTwiceConfig(
        seed=5, supercategory_map=SUPER_MAP, min_class_frequency=1,
        val_fraction=0.2, test_fraction=0.2,
    )
    instances, _ = build_looktwice_dataset(store, config)
    eval_instances = [i for i in instances if i.split != "train"]
    assert eval_instances
    assert all(not i.meta["synthesized"] for i in eval_instances)
    by_image = {}
    for inst in eval_instances:
        by_image.setdefault(inst.image_id, []).append(inst)
    for insts in by_image.values():
        assert any(
            a.meta["object_class"] != b.meta["object_class"] and a.answer != b.answer
            for i, a in enumerate(insts)
            for b in insts[i + 1 :]
        )
    synthesized = [i for i in instances if i.meta["synthesized"]]
    assert synthesized
    sources = {i.meta["group"]: i for i in instances if not i.meta["synthesized"]}
    for inst in synthesized:
        assert inst.split == "train"
        source = sources[inst.meta["group"][: -len(":counter")]]
        assert inst.meta["object_class"] != source.meta["object_class"]
        assert inst.answer != source.answer
        assert inst.question.startswith("How many ")


def test_rare_class_filtered(tmp_path):
    store = make_counting_store(tmp_path)
    config = LookTwiceConfig(seed=5, supercategory_map=SUPER_MAP, min_class_frequency=1000)
    instances, report = build_looktwice_dataset(store, config)
    assert instances == []
    assert report.skip_reasons["rare_class"] > 0


def test_demotion_when_constraint_unsatisfied(tmp_path):
    # every question in the image is about the same class
    rec = _counting_image("only", {"car": 3}, {"car": 3})
    store = load_annotations(write_jsonl(tmp_path / "a.jsonl", [rec]))
    config = LookTwiceConfig(
        seed=1, supercategory_map=SUPER_MAP, min_class_frequency=1,
        val_fraction=0.5, test_fraction=0.5,
    )
    instances, _ = build_looktwice_dataset(store, config)
    assert instances
    assert all(i.split == "train" for i in instances)


def test_determinism(tmp_path):
    store = make_counting_store(tmp_path)
    config = LookTwiceConfig(seed=5, supercategory_map=SUPER_MAP, min_class_frequency=1)
    first, _ = build_looktwice_dataset(store, config)
    second, _ = build_looktwice_dataset(store, config)
    assert first == second
