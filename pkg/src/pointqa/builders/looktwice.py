"""PointQA-LookTwice builder: counting questions at three levels of
verbal specificity, point-disambiguated, with prior-counteracting
constraints on the eval splits and synthesized counterparts in train.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field

from .. import boxops
from ..errors import ConfigurationError, ContractError, UnmappedClassError
from ..geometry import center_point
from ..scene_graph import AnnotationStore, ImageAnnotation, ObjectAnnotation
from ..text import pluralize, singularize, tokenize
from .base import BuildReport, PointQAInstance, per_image_rng

COUNT_LABELS = ("1", "2", ">2")

# Tokens that end the subject noun phrase of a counting question.
_NP_BOUNDARY = {
    "is", "are", "was", "were", "do", "does", "did", "can", "could",
    "will", "would", "have", "has", "had", "in", "on", "at", "of",
    "?",
}

_NUMBER_WORDS = {
    "one": 1, "two": 2, "three": 3, "four": 4, "five": 5,
    "six": 6, "seven": 7, "eight": 8, "nine": 9, "ten": 10,
}


@dataclass
class LookTwiceConfig:
    seed: int = 0
    supercategory_map: dict[str, str] = field(default_factory=dict)
    min_class_frequency: int = 100
    dedup_iou: float = 0.5
    val_fraction: float = 0.10
    test_fraction: float = 0.10

    def validate(self) -> None:
        if not self.supercategory_map:
            raise ConfigurationError("supercategory map is required")
        bad = {v for v in self.supercategory_map.values()} - {"beings", "vehicles", "objects"}
        if bad:
            raise ConfigurationError(f"unknown supercategories: {sorted(bad)}")
        if self.val_fraction + self.test_fraction > 1.0 + 1e-9:
            raise ConfigurationError("val+test fractions of eligible images exceed 1")


def extract_count_subject(question: str) -> str | None:
    """Head noun of a "How many {NP} ...?" question, singularized.

    Returns None for anything that is not a counting question.
    """
    tokens = tokenize(question)
    if tokens[:2] != ["how", "many"]:
        return None
    np_tokens = []
    for tok in tokens[2:]:
        if tok in _NP_BOUNDARY:
            break
        np_tokens.append(tok)
    if not np_tokens:
        return None
    return singularize(np_tokens[-1])


def match_subject_to_region(
    subject: str, img: ImageAnnotation, rng: random.Random
) -> ObjectAnnotation | None:
    """Uniform seeded choice among same-class objects; None if no match."""
    matches = img.objects_named(subject)
    if not matches:
        return None
    return matches[rng.randrange(len(matches))]


def bin_count_answer(n: int) -> str:
    if n < 1:
        raise ContractError(f"count must be >= 1, got {n}")
    if n == 1:
        return "1"
    if n == 2:
        return "2"
    return ">2"


def generalize_question(object_class: str, super_map: dict[str, str]) -> tuple[str, str]:
    """The supercategory and fully generic forms of a counting question."""
    if object_class not in super_map:
        raise UnmappedClassError(object_class)
    supercategory = super_map[object_class]
    return (
        f"How many of these {supercategory} are there?",
        "How many of these are there?",
    )


def count_instances(img: ImageAnnotation, object_class: str, dedup_iou: float) -> int:
    """Count same-class objects after greedy IoU duplicate suppression."""
    objs = img.objects_named(object_class)
    if not objs:
        raise ContractError(f"class {object_class!r} not present in image {img.image_id}")
    boxes = [[o.box.x, o.box.y, o.box.w, o.box.h] for o in objs]
    return int(boxops.greedy_dedup_mask(boxes, dedup_iou).sum())


def _parse_count(answer: str) -> int | None:
    answer = answer.strip().lower().rstrip(".")
    if answer.isdigit():
        n = int(answer)
        return n if n >= 1 else None
    return _NUMBER_WORDS.get(answer)


@dataclass
class _Candidate:
    qa_id: str
    question: str
    subject: str
    region: ObjectAnnotation
    answer: str  # binned


def _emit_forms(
    qa_id: str,
    image_id: str,
    object_question: str,
    subject: str,
    supercategory: str,
    region: ObjectAnnotation,
    answer: str,
    split: str,
    synthesized: bool,
    super_form: str,
    generic_form: str,
) -> list[PointQAInstance]:
    point = center_point(region.box)
    forms = [
        ("object", object_question),
        ("supercategory", super_form),
        ("generic", generic_form),
    ]
    out = []
    for form_name, question in forms:
        out.append(
            PointQAInstance(
                qa_id=f"{qa_id}:{form_name}",
                image_id=image_id,
                question=question,
                answer=answer,
                split=split,
                point=point,
                gt_box=region.box,
                meta={
                    "task": "looktwice",
                    "object_class": subject,
                    "supercategory": supercategory,
                    "question_form": form_name,
                    "synthesized": synthesized,
                    "group": qa_id,
                },
            )
        )
    return out


def build_looktwice_dataset(
    store: AnnotationStore, config: LookTwiceConfig
) -> tuple[list[PointQAInstance], BuildReport]:
    config.validate()
    report = BuildReport(dataset="looktwice")

    # Convert each human counting question into a point-anchored candidate.
    candidates: dict[str, list[_Candidate]] = {}
    for img in store:
        rng = per_image_rng(config.seed, img.image_id)
        rows = []
        for qa in img.source_qas:
            subject = extract_count_subject(qa.question)
            if subject is None:
                report.skip("not_counting_question")
                continue
            n = _parse_count(qa.answer)
            if n is None:
                report.skip("non_numeric_answer")
                continue
            region = match_subject_to_region(subject, img, rng)
            if region is None:
                report.skip("no_matching_region")
                continue
            rows.append(_Candidate(qa.qa_id, qa.question, subject, region, bin_count_answer(n)))
        if rows:
            candidates[img.image_id] = rows

    # Drop questions about rare object classes.
    class_freq = Counter(c.subject for rows in candidates.values() for c in rows)
    for image_id in list(candidates):
        kept = []
        for c in candidates[image_id]:
            if class_freq[c.subject] < config.min_class_frequency:
                report.skip("rare_class")
            elif c.subject not in config.supercategory_map:
                report.skip("unmapped_class")
            else:
                kept.append(c)
        if kept:
            candidates[image_id] = kept
        else:
            del candidates[image_id]

    # Eval eligibility: the image must carry two questions with different
    # subjects and different answers, otherwise the point is not needed.
    def eligible(rows: list[_Candidate]) -> bool:
        return any(
            a.subject != b.subject and a.answer != b.answer
            for i, a in enumerate(rows)
            for b in rows[i + 1 :]
        )

    eligible_ids = sorted(i for i, rows in candidates.items() if eligible(rows))
    shuffled = list(eligible_ids)
    random.Random(config.seed).shuffle(shuffled)
    n_val = round(config.val_fraction * len(shuffled))
    n_test = round(config.test_fraction * len(shuffled))
    split_of = {i: "train" for i in candidates}
    for i in shuffled[:n_val]:
        split_of[i] = "val"
    for i in shuffled[n_val : n_val + n_test]:
        split_of[i] = "test"

    instances: list[PointQAInstance] = []
    for image_id in sorted(candidates):
        img = store[image_id]
        split = split_of[image_id]
        rng = per_image_rng(config.seed, image_id)
        for c in candidates[image_id]:
            super_form, generic_form = generalize_question(c.subject, config.supercategory_map)
            instances.extend(
                _emit_forms(
                    f"looktwice:{c.qa_id}",
                    image_id,
                    c.question,
                    c.subject,
                    config.supercategory_map[c.subject],
                    c.region,
                    c.answer,
                    split,
                    synthesized=False,
                    super_form=super_form,
                    generic_form=generic_form,
                )
            )
            if split != "train":
                continue
            # Counteract answer priors: synthesize a train counterpart with a
            # different object class and a different answer.  Counts come
            # from deduplicated annotations and may under-count, which is
            # why synthesized questions never reach the eval splits.
            classes = sorted(
                {o.canonical_name for o in img.objects}
                & set(config.supercategory_map)
                - {c.subject}
            )
            options = []
            for cls in classes:
                binned = bin_count_answer(count_instances(img, cls, config.dedup_iou))
                if binned != c.answer:
                    options.append((cls, binned))
            if not options:
                report.skip("no_counterpart_class")
                continue
            cls, binned = options[rng.randrange(len(options))]
            region = match_subject_to_region(cls, img, rng)
            super_form, generic_form = generalize_question(cls, config.supercategory_map)
            instances.extend(
                _emit_forms(
                    f"looktwice:{c.qa_id}:counter",
                    image_id,
                    f"How many {pluralize(cls)} are there?",
                    cls,
                    config.supercategory_map[cls],
                    region,
                    binned,
                    "train",
                    synthesized=True,
                    super_form=super_form,
                    generic_form=generic_form,
                )
            )

    report.instances = len(instances)
    report.images = len(candidates)
    for inst in instances:
        report.split_counts[inst.split] = report.split_counts.get(inst.split, 0) + 1
    return instances, report
