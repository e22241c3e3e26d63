"""Shared pieces of the dataset builders: the benchmark instance record,
deterministic split assignment, and JSON-Lines serialization.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ConfigurationError
from ..geometry import BoundingBox, Point

LOCAL_SPLITS = ("train", "val", "test_dev", "test_final")
EVAL_SPLITS = ("train", "val", "test")


@dataclass(frozen=True)
class PointQAInstance:
    """One benchmark example: question, optional point, answer, split."""

    qa_id: str
    image_id: str
    question: str
    answer: str
    split: str
    point: Point | None = None
    gt_box: BoundingBox | None = None
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d: dict = {
            "qa_id": self.qa_id,
            "image_id": self.image_id,
            "question": self.question,
            "answer": self.answer,
            "split": self.split,
        }
        if self.point is not None:
            d["point"] = self.point.to_dict()
        if self.gt_box is not None:
            d["gt_box"] = self.gt_box.to_dict()
        if self.meta:
            d["meta"] = self.meta
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PointQAInstance":
        return cls(
            qa_id=d["qa_id"],
            image_id=d["image_id"],
            question=d["question"],
            answer=d["answer"],
            split=d["split"],
            point=Point.from_dict(d["point"]) if d.get("point") else None,
            gt_box=BoundingBox.from_dict(d["gt_box"]) if d.get("gt_box") else None,
            meta=d.get("meta", {}),
        )


def assign_splits(
    image_ids: list[str], fractions: tuple[float, ...], seed: int, names: tuple[str, ...]
) -> dict[str, str]:
    """Deterministically assign each image to a split.

    Images are shuffled with the given seed and allocated by largest
    remainder, so every split size is within one image of its fraction.
    """
    if len(fractions) != len(names):
        raise ConfigurationError("fractions and split names must align")
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ConfigurationError(f"split fractions must sum to 1, got {fractions}")
    ids = sorted(image_ids)
    random.Random(seed).shuffle(ids)
    n = len(ids)
    quotas = [f * n for f in fractions]
    counts = [int(q) for q in quotas]
    remainders = sorted(
        range(len(fractions)), key=lambda i: (-(quotas[i] - counts[i]), i)
    )
    for i in range(n - sum(counts)):
        counts[remainders[i % len(fractions)]] += 1
    mapping: dict[str, str] = {}
    start = 0
    for name, count in zip(names, counts):
        for image_id in ids[start : start + count]:
            mapping[image_id] = name
        start += count
    return mapping


def write_jsonl(instances: list[PointQAInstance], path: str | Path) -> None:
    """Serialize instances one per line with sorted keys (byte-stable)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for inst in instances:
            fh.write(json.dumps(inst.to_dict(), sort_keys=True) + "\n")


def read_jsonl(path: str | Path) -> list[PointQAInstance]:
    out = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(PointQAInstance.from_dict(json.loads(line)))
    return out


def write_split_files(
    instances: list[PointQAInstance], out_dir: str | Path, prefix: str
) -> dict[str, int]:
    """Write one `{prefix}.{split}.jsonl` per split; returns counts."""
    out_dir = Path(out_dir)
    by_split: dict[str, list[PointQAInstance]] = {}
    for inst in instances:
        by_split.setdefault(inst.split, []).append(inst)
    counts = {}
    for split, insts in sorted(by_split.items()):
        write_jsonl(insts, out_dir / f"{prefix}.{split}.jsonl")
        counts[split] = len(insts)
    return counts


@dataclass
class BuildReport:
    """Counts, skip reasons, and constraint-check results for one build."""

    dataset: str
    instances: int = 0
    images: int = 0
    split_counts: dict = field(default_factory=dict)
    skip_reasons: dict = field(default_factory=dict)
    constraint_checks: dict = field(default_factory=dict)

    def skip(self, reason: str, n: int = 1) -> None:
        self.skip_reasons[reason] = self.skip_reasons.get(reason, 0) + n

    def to_dict(self) -> dict:
        return {
            "dataset": self.dataset,
            "instances": self.instances,
            "images": self.images,
            "split_counts": self.split_counts,
            "skip_reasons": self.skip_reasons,
            "constraint_checks": self.constraint_checks,
        }

    def write(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def per_image_rng(seed: int, image_id: str) -> random.Random:
    """Stable per-image RNG so results do not depend on worker count."""
    return random.Random(f"{seed}:{image_id}")
