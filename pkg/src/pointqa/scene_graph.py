"""Scene-graph-style annotation store: loading, normalization, and the
attribute taxonomy every builder consumes.

The input format is JSON Lines, one image per line; see the README for
the full schema.  All text is normalized (lowercase, trimmed, internal
whitespace collapsed) once at load time.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

from .errors import ConfigurationError, ContractError, CorruptInputError
from .geometry import BoundingBox
from .text import normalize

# The >10%-malformed rule only applies to files with at least this many
# records, so tiny hand-written fixtures with one bad line still load.
_CORRUPT_MIN_RECORDS = 10


@dataclass(frozen=True)
class ObjectAnnotation:
    """One annotated object: class names, box, and attribute strings."""

    object_id: str
    names: tuple[str, ...]
    box: BoundingBox
    attributes: tuple[str, ...]

    @property
    def canonical_name(self) -> str:
        return self.names[0]


@dataclass(frozen=True)
class AnswerBox:
    box: BoundingBox
    correct: bool


@dataclass(frozen=True)
class SourceQA:
    """A human-written QA pair; which-questions also carry answer boxes."""

    qa_id: str
    question: str
    answer: str
    answer_boxes: tuple[AnswerBox, ...] | None = None


@dataclass(frozen=True)
class ImageAnnotation:
    """One image's objects, source QA pairs, and dimensions."""

    image_id: str
    width: int
    height: int
    objects: tuple[ObjectAnnotation, ...]
    source_qas: tuple[SourceQA, ...]
    image_uri: str | None = None

    def objects_named(self, canonical_name: str) -> list[ObjectAnnotation]:
        return [o for o in self.objects if o.canonical_name == canonical_name]


class AnnotationStore:
    """Immutable, image_id-indexed collection of ImageAnnotations."""

    def __init__(self, images: dict[str, ImageAnnotation], skipped: int = 0) -> None:
        self._images = dict(sorted(images.items()))
        self.skipped = skipped

    def __len__(self) -> int:
        return len(self._images)

    def __iter__(self) -> Iterator[ImageAnnotation]:
        return iter(self._images.values())

    def __contains__(self, image_id: str) -> bool:
        return image_id in self._images

    def get(self, image_id: str) -> ImageAnnotation | None:
        return self._images.get(image_id)

    def __getitem__(self, image_id: str) -> ImageAnnotation:
        return self._images[image_id]

    def image_ids(self) -> list[str]:
        return list(self._images.keys())


def _parse_box(d: dict) -> BoundingBox:
    return BoundingBox(d["x"], d["y"], d["w"], d["h"])


def _parse_image(record: dict) -> ImageAnnotation:
    image_id = str(record["image_id"])
    width = int(record["width"])
    height = int(record["height"])
    if width <= 0 or height <= 0:
        raise ValueError("non-positive image dimensions")

    objects = []
    seen_ids = set()
    for raw in record["objects"]:
        box = _parse_box(raw["box"])
        if box.x < 0 or box.y < 0 or box.x + box.w > width or box.y + box.h > height:
            raise ValueError(f"object box out of image bounds: {raw['object_id']}")
        names = tuple(normalize(n) for n in raw["names"] if normalize(n))
        if not names:
            raise ValueError(f"object without names: {raw['object_id']}")
        object_id = str(raw["object_id"])
        if object_id in seen_ids:
            raise ValueError(f"duplicate object_id: {object_id}")
        seen_ids.add(object_id)
        attrs, seen_attrs = [], set()
        for a in raw.get("attributes", []):
            a = normalize(a)
            if a and a not in seen_attrs:
                seen_attrs.add(a)
                attrs.append(a)
        objects.append(ObjectAnnotation(object_id, names, box, tuple(attrs)))

    qas = []
    for raw in record.get("source_qas", []):
        question = raw["question"].strip()
        if not question.endswith("?"):
            raise ValueError(f"question does not end with '?': {raw['qa_id']}")
        answer_boxes = None
        if raw.get("answer_boxes") is not None:
            parsed = tuple(
                AnswerBox(_parse_box(ab["box"]), bool(ab.get("correct", False)))
                for ab in raw["answer_boxes"]
            )
            answer_boxes = parsed
        qas.append(
            SourceQA(str(raw["qa_id"]), question, str(raw["answer"]).strip(), answer_boxes)
        )

    return ImageAnnotation(
        image_id=image_id,
        width=width,
        height=height,
        objects=tuple(objects),
        source_qas=tuple(qas),
        image_uri=record.get("image_uri"),
    )


def load_annotations(path: str | Path) -> AnnotationStore:
    """Load a JSON-Lines annotation file into an indexed store.

    Malformed records are skipped and counted; when more than 10% of a
    non-trivial file is malformed the whole file is rejected.
    """
    path = Path(path)
    images: dict[str, ImageAnnotation] = {}
    skipped = 0
    total = 0
    with path.open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            total += 1
            try:
                record = json.loads(line)
                img = _parse_image(record)
            except (KeyError, TypeError, ValueError):
                skipped += 1
                continue
            images[img.image_id] = img
    if total >= _CORRUPT_MIN_RECORDS and skipped > 0.10 * total:
        raise CorruptInputError(skipped, total, str(path))
    return AnnotationStore(images, skipped=skipped)


@dataclass(frozen=True)
class AttributeTaxonomy:
    """Canonicalized attributes grouped into color/shape/action.

    ``category_of`` maps canonical attributes to their category;
    ``canonical_of`` collapses raw synonyms onto canonical forms.  Size
    attributes never survive: size is relative, not a property of the
    object alone.
    """

    category_of: dict[str, str] = field(default_factory=dict)
    canonical_of: dict[str, str] = field(default_factory=dict)
    uncategorized: tuple[str, ...] = ()

    def canonical(self, attribute: str) -> str:
        return self.canonical_of.get(attribute, attribute)

    def category(self, attribute: str) -> str | None:
        """Category of an attribute after canonicalization, or None."""
        return self.category_of.get(self.canonical(attribute))

    def __len__(self) -> int:
        return len(self.category_of)


def build_taxonomy(
    store: AnnotationStore,
    top_k: int,
    synonym_map: dict[str, str],
    category_map: dict[str, str],
) -> AttributeTaxonomy:
    """Keep the top_k most frequent attributes, collapse synonyms, group
    by category, and drop everything categorized as size.
    """
    if top_k < 1:
        raise ContractError(f"top_k must be >= 1, got {top_k}")
    for cat in set(category_map.values()):
        if cat not in ("color", "shape", "action", "size"):
            raise ConfigurationError(f"unknown attribute category: {cat}")

    synonym_map = {normalize(k): normalize(v) for k, v in synonym_map.items()}
    category_map = {normalize(k): v for k, v in category_map.items()}

    freq: Counter[str] = Counter()
    for img in store:
        for obj in img.objects:
            freq.update(obj.attributes)

    # Most frequent first; equal frequencies break lexicographically.
    ranked = sorted(freq.items(), key=lambda kv: (-kv[1], kv[0]))
    kept = [attr for attr, _ in ranked[:top_k]]

    category_of: dict[str, str] = {}
    canonical_of: dict[str, str] = {}
    uncategorized: list[str] = []
    for attr in kept:
        canon = synonym_map.get(attr, attr)
        cat = category_map.get(canon, category_map.get(attr))
        if cat is None:
            uncategorized.append(attr)
            continue
        if cat == "size":
            continue
        if attr != canon:
            canonical_of[attr] = canon
        category_of[canon] = cat

    return AttributeTaxonomy(
        category_of=category_of,
        canonical_of=canonical_of,
        uncategorized=tuple(uncategorized),
    )


def annotation_to_dict(img: ImageAnnotation) -> dict:
    d: dict = {
        "image_id": img.image_id,
        "width": img.width,
        "height": img.height,
        "objects": [
            {
                "object_id": o.object_id,
                "names": list(o.names),
                "box": o.box.to_dict(),
                "attributes": list(o.attributes),
            }
            for o in img.objects
        ],
        "source_qas": [
            {
                "qa_id": qa.qa_id,
                "question": qa.question,
                "answer": qa.answer,
                **(
                    {
                        "answer_boxes": [
                            {"box": ab.box.to_dict(), "correct": ab.correct}
                            for ab in qa.answer_boxes
                        ]
                    }
                    if qa.answer_boxes is not None
                    else {}
                ),
            }
            for qa in img.source_qas
        ],
    }
    if img.image_uri:
        d["image_uri"] = img.image_uri
    return d


def write_annotations(store: AnnotationStore, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for img in store:
            fh.write(json.dumps(annotation_to_dict(img), sort_keys=True) + "\n")


def load_json_map(path: str | Path) -> dict[str, str]:
    with Path(path).open("r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path}: expected a JSON object")
    return {str(k): str(v) for k, v in data.items()}
