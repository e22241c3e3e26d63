"""Dataset constraint checkers behind the `verify` subcommand.

Each checker re-derives the builder's invariants from the emitted files
alone (brute force, no shared code paths with the builders' filtering).
"""

from __future__ import annotations

from collections import Counter

from ..geometry import contains, iou
from .base import PointQAInstance


def _fail(failures: list[str], message: str) -> None:
    failures.append(message)


def check_local(instances: list[PointQAInstance], iou_threshold: float = 0.2) -> list[str]:
    failures: list[str] = []
    groups: dict[tuple[str, str], list[PointQAInstance]] = {}
    split_by_image: dict[str, set[str]] = {}
    for inst in instances:
        groups.setdefault((inst.image_id, inst.question), []).append(inst)
        split_by_image.setdefault(inst.image_id, set()).add(inst.split)
        if inst.point is None or inst.gt_box is None:
            _fail(failures, f"{inst.qa_id}: missing point or gt_box")
            continue
        if not contains(inst.gt_box, inst.point):
            _fail(failures, f"{inst.qa_id}: point outside gt_box")
        answer_set = inst.meta.get("answer_set") or []
        if inst.answer not in answer_set:
            _fail(failures, f"{inst.qa_id}: answer not in answer_set")

    for image_id, splits in split_by_image.items():
        if len(splits) > 1:
            _fail(failures, f"{image_id}: instances span multiple splits {sorted(splits)}")

    for (image_id, question), group in groups.items():
        answers = {g.answer for g in group}
        if len(answers) < 2:
            _fail(
                failures,
                f"point-necessity violated: {image_id!r} / {question!r} has a single answer",
            )
        for inst in group:
            partners = [
                other
                for other in group
                if other.answer != inst.answer
                and inst.gt_box is not None
                and other.gt_box is not None
                and iou(inst.gt_box, other.gt_box) < iou_threshold
            ]
            if not partners:
                _fail(failures, f"{inst.qa_id}: no low-overlap partner with another answer")
    return failures


def check_looktwice(instances: list[PointQAInstance]) -> list[str]:
    failures: list[str] = []
    groups: dict[str, list[PointQAInstance]] = {}
    for inst in instances:
        groups.setdefault(inst.meta.get("group", inst.qa_id), []).append(inst)
        if inst.meta.get("synthesized") and inst.split != "train":
            _fail(failures, f"{inst.qa_id}: synthesized instance outside train")

    for group_id, group in groups.items():
        if len(group) != 3:
            _fail(failures, f"{group_id}: expected 3 question forms, got {len(group)}")
        keys = {
            (g.image_id, g.answer, g.split, g.point.x if g.point else None,
             g.point.y if g.point else None)
            for g in group
        }
        if len(keys) != 1:
            _fail(failures, f"{group_id}: forms disagree on point/answer/image/split")
        forms = sorted(g.meta.get("question_form", "") for g in group)
        if forms != ["generic", "object", "supercategory"]:
            _fail(failures, f"{group_id}: question forms are {forms}")

    # synthesized counterparts differ from their source in class and answer
    by_group = {gid: group[0] for gid, group in groups.items() if group}
    for gid, inst in by_group.items():
        if not gid.endswith(":counter"):
            continue
        source = by_group.get(gid[: -len(":counter")])
        if source is None:
            continue
        if inst.meta.get("object_class") == source.meta.get("object_class"):
            _fail(failures, f"{gid}: counterpart shares the source object class")
        if inst.answer == source.answer:
            _fail(failures, f"{gid}: counterpart shares the source answer")

    # eval images must contain two human questions with different classes
    # and different answers
    eval_images: dict[str, list[PointQAInstance]] = {}
    for inst in instances:
        if inst.split != "train" and not inst.meta.get("synthesized"):
            eval_images.setdefault(inst.image_id, []).append(inst)
    for image_id, insts in eval_images.items():
        ok = any(
            a.meta.get("object_class") != b.meta.get("object_class")
            and a.answer != b.answer
            for i, a in enumerate(insts)
            for b in insts[i + 1 :]
        )
        if not ok:
            _fail(failures, f"{image_id}: eval image fails the two-question constraint")
    return failures


def check_general(instances: list[PointQAInstance]) -> list[str]:
    failures: list[str] = []
    per_split = Counter()
    per_split_yes = Counter()
    per_image = Counter()
    per_image_yes = Counter()
    siblings: dict[str, list[PointQAInstance]] = {}
    for inst in instances:
        per_split[inst.split] += 1
        per_image[inst.image_id] += 1
        if inst.answer == "yes":
            per_split_yes[inst.split] += 1
            per_image_yes[inst.image_id] += 1
        elif inst.answer != "no":
            _fail(failures, f"{inst.qa_id}: answer {inst.answer!r} is not yes/no")
        siblings.setdefault(inst.meta.get("source_qa_id", ""), []).append(inst)

    for split, total in per_split.items():
        if per_split_yes[split] * 2 != total:
            _fail(failures, f"split {split}: yes/no imbalance {per_split_yes[split]}/{total}")
    for image_id, total in per_image.items():
        if per_image_yes[image_id] * 2 != total:
            _fail(failures, f"image {image_id}: yes/no imbalance")

    for source_id, pair in siblings.items():
        if len(pair) != 2:
            _fail(failures, f"{source_id}: incomplete sibling pair")
            continue
        a, b = pair
        if {a.answer, b.answer} != {"yes", "no"}:
            _fail(failures, f"{source_id}: pair answers are not yes+no")
        if a.image_id != b.image_id or a.question != b.question:
            _fail(failures, f"{source_id}: siblings disagree on image or question")
        if a.split != b.split:
            _fail(failures, f"{source_id}: siblings in different splits")
        if a.point == b.point:
            _fail(failures, f"{source_id}: siblings share the same point")
        yes = a if a.answer == "yes" else b
        no = b if a.answer == "yes" else a
        if yes.gt_box is not None and no.gt_box is not None and yes.gt_box == no.gt_box:
            _fail(failures, f"{source_id}: the no point comes from the correct box")
    return failures


def check_dv_ds(dv: list[PointQAInstance], ds: list[PointQAInstance]) -> list[str]:
    failures: list[str] = []
    dv_ids = {i.qa_id for i in dv}
    ds_ids = {i.qa_id for i in ds}
    if len(dv) != len(ds):
        _fail(failures, f"|D_V| = {len(dv)} but |D_S| = {len(ds)}")
    if dv_ids != ds_ids:
        _fail(failures, "D_V and D_S qa_id sets differ")
    ds_by_id = {i.qa_id: i for i in ds}
    for v in dv:
        s = ds_by_id.get(v.qa_id)
        if s is None:
            continue
        if v.point is not None:
            _fail(failures, f"{v.qa_id}: D_V instance carries a point")
        if s.point is None or s.gt_box is None:
            _fail(failures, f"{s.qa_id}: D_S instance lacks point or box")
        elif not contains(s.gt_box, s.point):
            _fail(failures, f"{s.qa_id}: D_S point outside matched box")
        if (v.answer, v.split) != (s.answer, s.split):
            _fail(failures, f"{v.qa_id}: answer/split mismatch across D_V and D_S")
        phrase = v.meta.get("prep_phrase", "")
        reduced = " ".join(v.question.rstrip("?").replace(phrase, "", 1).split()) + "?"
        if reduced != s.question:
            _fail(failures, f"{v.qa_id}: D_S question is not D_V minus the phrase")
    return failures
