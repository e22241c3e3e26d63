"""PointQA-General builder: turns which-questions with box answers into
balanced yes/no pointing questions.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import ConfigurationError
from ..geometry import center_point
from ..scene_graph import AnnotationStore
from .base import EVAL_SPLITS, BuildReport, PointQAInstance, assign_splits, per_image_rng

# "Which X <verb> Y?" templates, keyed by the verb token.
_TEMPLATES = {
    "is": "Is this {x} {y}?",
    "are": "Are these {x} {y}?",
    "has": "Does this {x} have {y}?",
    "have": "Do these {x} have {y}?",
}


@dataclass
class GeneralConfig:
    seed: int = 0
    split_fractions: tuple[float, float, float] = (0.8, 0.1, 0.1)

    def validate(self) -> None:
        if abs(sum(self.split_fractions) - 1.0) > 1e-9:
            raise ConfigurationError(f"split fractions must sum to 1: {self.split_fractions}")


def transform_which_question(question: str) -> str | None:
    """Rewrite "Which X is/are/has/have Y?" as a pointing question.

    The earliest template verb that leaves a non-empty subject X and
    description Y anchors the rewrite; questions that match no template
    are dropped.
    """
    text = question.strip().rstrip("?").strip()
    words = text.split()
    if not words or words[0].lower() != "which":
        return None
    for i in range(1, len(words)):
        verb = words[i].lower()
        if verb in _TEMPLATES and i > 1 and i < len(words) - 1:
            x = " ".join(words[1:i])
            y = " ".join(words[i + 1 :])
            out = _TEMPLATES[verb].format(x=x, y=y)
            return out[0].upper() + out[1:]
    return None


def build_general_dataset(
    store: AnnotationStore, config: GeneralConfig
) -> tuple[list[PointQAInstance], BuildReport]:
    """Emit a yes/no pair per transformable which-question: the correct
    box's center answers "yes", a seeded-random incorrect box's center
    answers "no"."""
    config.validate()
    report = BuildReport(dataset="general")

    per_image: dict[str, list] = {}
    for img in store:
        rng = per_image_rng(config.seed, img.image_id)
        rows = []
        for qa in img.source_qas:
            if qa.answer_boxes is None:
                continue
            if len(qa.answer_boxes) != 4:
                report.skip("wrong_box_count")
                continue
            correct = [ab for ab in qa.answer_boxes if ab.correct]
            if len(correct) != 1:
                report.skip("no_unique_correct_box")
                continue
            question = transform_which_question(qa.question)
            if question is None:
                report.skip("untransformable_question")
                continue
            correct_center = center_point(correct[0].box)
            incorrect = [
                ab
                for ab in qa.answer_boxes
                if not ab.correct and center_point(ab.box) != correct_center
            ]
            if not incorrect:
                report.skip("degenerate_distractors")
                continue
            distractor = incorrect[rng.randrange(len(incorrect))]
            rows.append((qa.qa_id, question, correct[0].box, distractor.box))
        if rows:
            per_image[img.image_id] = rows

    split_of = assign_splits(
        list(per_image.keys()), config.split_fractions, config.seed, EVAL_SPLITS
    )

    instances = []
    for image_id in sorted(per_image):
        for qa_id, question, yes_box, no_box in per_image[image_id]:
            for label, box in (("yes", yes_box), ("no", no_box)):
                instances.append(
                    PointQAInstance(
                        qa_id=f"general:{qa_id}:{label}",
                        image_id=image_id,
                        question=question,
                        answer=label,
                        split=split_of[image_id],
                        point=center_point(box),
                        gt_box=box,
                        meta={"task": "general", "source_qa_id": qa_id},
                    )
                )

    report.instances = len(instances)
    report.images = len(per_image)
    for inst in instances:
        report.split_counts[inst.split] = report.split_counts.get(inst.split, 0) + 1
    return instances, report
