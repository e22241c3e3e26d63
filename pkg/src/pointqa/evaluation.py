"""Evaluation: accuracy reports with per-cell counts, attention
statistics, question-swap attention analysis, and context-word deltas.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import torch

from .builders.base import PointQAInstance
from .errors import ContractError
from .models.baselines import baseline_modal_answer
from .text import tokenize
from .training import TensorBatcher

# Table-style disambiguation columns -> point-stream selection strategies.
EVAL_STRATEGIES = {"none": "full_image", "point": "all_containing", "gt_box": "gt_box"}


@dataclass
class PredictionRecord:
    qa_id: str
    image_id: str
    question: str
    answer: str
    predicted: str
    correct: bool
    max_local_weight: float | None = None
    max_local_area: float | None = None
    max_global_weight: float | None = None
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "qa_id": self.qa_id,
            "image_id": self.image_id,
            "question": self.question,
            "answer": self.answer,
            "predicted": self.predicted,
            "correct": self.correct,
            "max_local_weight": self.max_local_weight,
            "max_local_area": self.max_local_area,
            "max_global_weight": self.max_global_weight,
        }


def _cell(records: list[PredictionRecord]) -> dict:
    correct = sum(r.correct for r in records)
    return {
        "correct": correct,
        "total": len(records),
        "accuracy": correct / len(records) if records else None,
    }


@dataclass
class EvalReport:
    overall: dict
    by_category: dict
    by_answer: dict
    by_question_form: dict
    attention_stats: dict
    predictions: list[PredictionRecord]

    @property
    def accuracy(self) -> float:
        return self.overall["accuracy"]

    def to_dict(self, include_predictions: bool = True) -> dict:
        d = {
            "overall": self.overall,
            "by_category": self.by_category,
            "by_answer": self.by_answer,
            "by_question_form": self.by_question_form,
            "attention_stats": self.attention_stats,
        }
        if include_predictions:
            d["predictions"] = [r.to_dict() for r in self.predictions]
        return d

    def write(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def read(cls, path: str | Path) -> "EvalReport":
        with Path(path).open("r", encoding="utf-8") as fh:
            d = json.load(fh)
        predictions = [
            PredictionRecord(**{k: v for k, v in p.items()}) for p in d.get("predictions", [])
        ]
        return cls(
            overall=d["overall"],
            by_category=d["by_category"],
            by_answer=d["by_answer"],
            by_question_form=d["by_question_form"],
            attention_stats=d["attention_stats"],
            predictions=predictions,
        )


def _median(values: list[float]) -> float | None:
    if not values:
        return None
    values = sorted(values)
    mid = len(values) // 2
    if len(values) % 2:
        return values[mid]
    return 0.5 * (values[mid - 1] + values[mid])


@torch.no_grad()
def run_model(
    model: torch.nn.Module, batcher: TensorBatcher, batch_size: int = 256
) -> list[PredictionRecord]:
    model.eval()
    labels = batcher.answers.labels
    records: list[PredictionRecord] = []
    for indices, batch in batcher.iter_batches(batch_size):
        logits, attn = model(batch)
        preds = logits.argmax(dim=1)
        local = attn.get("local")
        global_w = attn.get("global")
        for row, idx in enumerate(indices):
            inst = batcher.instances[idx]
            max_local = max_area = max_global = None
            if local is not None:
                j = int(local[row].argmax())
                max_local = float(local[row, j])
                box = batch["pt_boxes"][row, j]
                max_area = float(box[2] * box[3])
            if global_w is not None:
                max_global = float(global_w[row].max())
            predicted = labels[int(preds[row])]
            records.append(
                PredictionRecord(
                    qa_id=inst.qa_id,
                    image_id=inst.image_id,
                    question=inst.question,
                    answer=inst.answer,
                    predicted=predicted,
                    correct=predicted == inst.answer,
                    max_local_weight=max_local,
                    max_local_area=max_area,
                    max_global_weight=max_global,
                    meta=inst.meta,
                )
            )
    return records


def _report_from_records(records: list[PredictionRecord]) -> EvalReport:
    def group(key: str) -> dict:
        groups: dict[str, list[PredictionRecord]] = {}
        for r in records:
            value = r.meta.get(key)
            if value is not None:
                groups.setdefault(str(value), []).append(r)
        return {k: _cell(v) for k, v in sorted(groups.items())}

    by_answer: dict[str, list[PredictionRecord]] = {}
    for r in records:
        by_answer.setdefault(r.answer, []).append(r)

    local_weights = [r.max_local_weight for r in records if r.max_local_weight is not None]
    global_weights = [r.max_global_weight for r in records if r.max_global_weight is not None]
    areas = [r.max_local_area for r in records if r.max_local_area is not None]
    attention_stats = {
        "mean_max_local_weight": sum(local_weights) / len(local_weights) if local_weights else None,
        "mean_max_global_weight": (
            sum(global_weights) / len(global_weights) if global_weights else None
        ),
        "median_max_attention_area": _median(areas),
    }
    return EvalReport(
        overall=_cell(records),
        by_category=group("category"),
        by_answer={k: _cell(v) for k, v in sorted(by_answer.items())},
        by_question_form=group("question_form"),
        attention_stats=attention_stats,
        predictions=records,
    )


def evaluate(model: torch.nn.Module, batcher: TensorBatcher) -> EvalReport:
    """Accuracy plus breakdowns; the batcher's strategy already encodes
    the disambiguation column (none / point / gt box)."""
    if len(batcher) == 0:
        raise ContractError("cannot evaluate an empty dataset")
    return _report_from_records(run_model(model, batcher))


def evaluate_modal(instances: list[PointQAInstance], train_freq: Counter) -> EvalReport:
    """The answer-prior oracle restricted to each image's valid answers."""
    if not instances:
        raise ContractError("cannot evaluate an empty dataset")
    records = []
    for inst in instances:
        predicted = baseline_modal_answer(inst, train_freq)
        records.append(
            PredictionRecord(
                qa_id=inst.qa_id,
                image_id=inst.image_id,
                question=inst.question,
                answer=inst.answer,
                predicted=predicted,
                correct=predicted == inst.answer,
                meta=inst.meta,
            )
        )
    return _report_from_records(records)


def sign_test_p(n_increase: int, n_decrease: int) -> float:
    """One-sided exact binomial tail: P[X >= n_increase] under p=0.5."""
    m = n_increase + n_decrease
    if m == 0:
        return 1.0
    return sum(math.comb(m, k) for k in range(n_increase, m + 1)) / 2.0**m


def attention_analysis(
    model: torch.nn.Module,
    batcher: TensorBatcher,
    question_swap: tuple[str, str] | None = None,
) -> dict:
    """Attention statistics, optionally with a question-swap comparison.

    The swap re-asks every instance matching the first template with the
    second template at the same point and compares the pixel area of the
    max-attention region.
    """
    records = run_model(model, batcher)
    stats = _report_from_records(records).attention_stats
    out = dict(stats)

    if question_swap is not None:
        q_from, q_to = question_swap
        matching = [i for i, inst in enumerate(batcher.instances) if inst.question == q_from]
        if matching:
            swapped = batcher.subset_with_question(matching, q_to)
            swapped_records = run_model(model, swapped)
            base_areas = [records[i].max_local_area for i in matching]
            new_areas = [r.max_local_area for r in swapped_records]
            pairs = [
                (a, b)
                for a, b in zip(base_areas, new_areas)
                if a is not None and b is not None
            ]
            n_inc = sum(b > a for a, b in pairs)
            n_dec = sum(b < a for a, b in pairs)
            out["question_swap"] = {
                "from": q_from,
                "to": q_to,
                "pairs": len(pairs),
                "median_area_from": _median([a for a, _ in pairs]),
                "median_area_to": _median([b for _, b in pairs]),
                "n_area_increase": n_inc,
                "n_area_decrease": n_dec,
                "sign_test_p_increase": sign_test_p(n_inc, n_dec),
            }
        else:
            out["question_swap"] = {"from": q_from, "to": q_to, "pairs": 0}
    return out


def context_word_analysis(
    report_a: EvalReport, report_b: EvalReport, word_list: list[str]
) -> dict:
    """Per-word accuracy of both models on questions containing the word,
    and the delta (b minus a)."""
    b_by_id = {r.qa_id: r for r in report_b.predictions}
    out = {}
    for word in word_list:
        word_lower = word.lower()
        pairs = [
            (ra, b_by_id[ra.qa_id])
            for ra in report_a.predictions
            if ra.qa_id in b_by_id and word_lower in tokenize(ra.question)
        ]
        if not pairs:
            out[word] = {"count": 0, "accuracy_a": None, "accuracy_b": None, "delta": None}
            continue
        acc_a = sum(ra.correct for ra, _ in pairs) / len(pairs)
        acc_b = sum(rb.correct for _, rb in pairs) / len(pairs)
        out[word] = {
            "count": len(pairs),
            "accuracy_a": acc_a,
            "accuracy_b": acc_b,
            "delta": acc_b - acc_a,
        }
    return out
