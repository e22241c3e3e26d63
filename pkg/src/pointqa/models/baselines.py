"""Answer-prior baselines that need no visual input."""

from __future__ import annotations

from collections import Counter

from ..builders.base import PointQAInstance
from ..errors import ContractError


def training_answer_frequencies(instances: list[PointQAInstance]) -> Counter:
    return Counter(inst.answer for inst in instances)


def baseline_modal_answer(instance: PointQAInstance, train_freq: Counter) -> str:
    """Most frequent training answer among the answers valid in this
    image; ties break lexicographically."""
    answer_set = instance.meta.get("answer_set") or []
    if not answer_set:
        raise ContractError(f"instance {instance.qa_id} has no answer_set")
    return min(answer_set, key=lambda a: (-train_freq.get(a, 0), a))
