"""PointQA-Local builder: attribute questions about a pointed object,
constructed so the point is required (the image always contains at least
two valid answers for the question).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import ConfigurationError
from ..geometry import center_point, iou
from ..scene_graph import AnnotationStore, AttributeTaxonomy, ImageAnnotation, ObjectAnnotation
from .base import (
    LOCAL_SPLITS,
    BuildReport,
    PointQAInstance,
    assign_splits,
)

_QUESTION_FORMS = {
    "color": "What color is this {obj}?",
    "shape": "What shape is this {obj}?",
    "action": "What action is this {obj} doing?",
}


@dataclass
class BuilderConfig:
    """Knobs for the Local build; defaults follow the benchmark setup."""

    seed: int = 0
    iou_threshold: float = 0.2
    split_fractions: tuple[float, float, float, float] = (0.70, 0.10, 0.10, 0.10)
    taxonomy: AttributeTaxonomy = field(default_factory=AttributeTaxonomy)

    def validate(self) -> None:
        if not (0.0 < self.iou_threshold <= 1.0):
            raise ConfigurationError(f"iou_threshold must be in (0,1], got {self.iou_threshold}")
        if abs(sum(self.split_fractions) - 1.0) > 1e-9:
            raise ConfigurationError(f"split fractions must sum to 1: {self.split_fractions}")


def _attrs_by_category(
    obj: ObjectAnnotation, taxonomy: AttributeTaxonomy
) -> dict[str, set[str]]:
    out: dict[str, set[str]] = {}
    for attr in obj.attributes:
        canon = taxonomy.canonical(attr)
        cat = taxonomy.category_of.get(canon)
        if cat is not None:
            out.setdefault(cat, set()).add(canon)
    return out


def find_local_pairs(
    img: ImageAnnotation, taxonomy: AttributeTaxonomy, iou_threshold: float
) -> list[tuple[ObjectAnnotation, ObjectAnnotation, str]]:
    """All same-class object pairs with differing same-category attributes
    and box IoU below the threshold.

    Objects carrying two distinct canonical attributes in one category are
    excluded outright (an ambiguous object would poison its answers).
    """
    by_cat: dict[str, dict[str, str]] = {}
    eligible: list[ObjectAnnotation] = []
    for obj in img.objects:
        cats = _attrs_by_category(obj, taxonomy)
        if any(len(attrs) > 1 for attrs in cats.values()):
            continue
        eligible.append(obj)
        by_cat[obj.object_id] = {cat: next(iter(attrs)) for cat, attrs in cats.items()}

    by_class: dict[str, list[ObjectAnnotation]] = {}
    for obj in eligible:
        by_class.setdefault(obj.canonical_name, []).append(obj)

    pairs = []
    for _, objs in sorted(by_class.items()):
        for i in range(len(objs)):
            for j in range(i + 1, len(objs)):
                a, b = objs[i], objs[j]
                shared = sorted(set(by_cat[a.object_id]) & set(by_cat[b.object_id]))
                matching = [
                    cat
                    for cat in shared
                    if by_cat[a.object_id][cat] != by_cat[b.object_id][cat]
                ]
                if matching and iou(a.box, b.box) < iou_threshold:
                    for cat in matching:
                        pairs.append((a, b, cat))
    return pairs


def _answer_set(
    img: ImageAnnotation, object_class: str, category: str, taxonomy: AttributeTaxonomy
) -> list[str]:
    """All answers of this category valid somewhere in the image for this
    object class (the Modal-A oracle's choice set)."""
    answers = set()
    for obj in img.objects_named(object_class):
        answers.update(_attrs_by_category(obj, taxonomy).get(category, set()))
    return sorted(answers)


def build_local_dataset(
    store: AnnotationStore, config: BuilderConfig
) -> tuple[list[PointQAInstance], BuildReport]:
    """Emit two point-disambiguated instances per qualifying pair."""
    config.validate()
    if len(config.taxonomy) == 0:
        raise ConfigurationError("taxonomy is empty; run build_taxonomy first")

    report = BuildReport(dataset="local")
    per_image: dict[str, list[dict]] = {}
    for img in store:
        seen: set[tuple] = set()
        rows = []
        for obj_a, obj_b, category in find_local_pairs(
            img, config.taxonomy, config.iou_threshold
        ):
            question = _QUESTION_FORMS[category].format(obj=obj_a.canonical_name)
            answers = _answer_set(img, obj_a.canonical_name, category, config.taxonomy)
            for obj in (obj_a, obj_b):
                point = center_point(obj.box)
                key = (question, point.x, point.y)
                if key in seen:
                    report.skip("duplicate_question_point")
                    continue
                seen.add(key)
                attr = next(
                    a
                    for a in obj.attributes
                    if config.taxonomy.category(a) == category
                )
                rows.append(
                    {
                        "question": question,
                        "point": point,
                        "answer": config.taxonomy.canonical(attr),
                        "gt_box": obj.box,
                        "category": category,
                        "object_class": obj.canonical_name,
                        "answer_set": answers,
                    }
                )
        if rows:
            per_image[img.image_id] = rows

    split_of = assign_splits(
        list(per_image.keys()), config.split_fractions, config.seed, LOCAL_SPLITS
    )

    instances = []
    for image_id in sorted(per_image):
        rows = sorted(per_image[image_id], key=lambda r: (r["question"], r["point"].x, r["point"].y))
        for n, row in enumerate(rows):
            instances.append(
                PointQAInstance(
                    qa_id=f"local:{image_id}:{n}",
                    image_id=image_id,
                    question=row["question"],
                    answer=row["answer"],
                    split=split_of[image_id],
                    point=row["point"],
                    gt_box=row["gt_box"],
                    meta={
                        "task": "local",
                        "category": row["category"],
                        "object_class": row["object_class"],
                        "answer_set": row["answer_set"],
                    },
                )
            )

    report.instances = len(instances)
    report.images = len(per_image)
    for inst in instances:
        report.split_counts[inst.split] = report.split_counts.get(inst.split, 0) + 1
    return instances, report
