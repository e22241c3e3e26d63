"""Paired verbal/spatial disambiguation datasets: D_V keeps the original
prepositional phrase, D_S replaces it with a point on the matched object.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import ConfigurationError
from ..geometry import center_point
from ..scene_graph import AnnotationStore, ImageAnnotation, ObjectAnnotation
from ..text import singularize, tokenize
from .base import EVAL_SPLITS, BuildReport, PointQAInstance, assign_splits

# Longest match wins, so multi-word prepositions come first.
_PREPOSITIONS = [
    ("in", "front", "of"),
    ("to", "the", "left", "of"),
    ("to", "the", "right", "of"),
    ("next", "to"),
    ("on",),
    ("in",),
    ("at",),
    ("near",),
    ("behind",),
    ("under",),
    ("above",),
    ("by",),
    ("with",),
]

_AUXILIARIES = {"is", "are", "was", "were", "do", "does", "did"}
_ARTICLES = {"the", "a", "an", "this", "that", "these", "those"}


def _match_preposition(words: list[str], i: int) -> int:
    """Length of the preposition starting at i, or 0."""
    for prep in _PREPOSITIONS:
        if tuple(w.lower() for w in words[i : i + len(prep)]) == prep:
            return len(prep)
    return 0


def detect_verbal_disambiguation(question: str) -> tuple[str, str] | None:
    """Find the question subject and a disambiguating prepositional phrase.

    Returns (subject, phrase) or None.  The subject is the last noun of
    the noun phrase following the first auxiliary verb; the phrase runs
    from the first listed preposition after it up to the next verb-like
    token or the end of the question.
    """
    words = question.strip().rstrip("?").split()
    lower = [w.lower() for w in words]
    try:
        aux = next(i for i, w in enumerate(lower) if w in _AUXILIARIES)
    except StopIteration:
        return None

    np_tokens: list[str] = []
    prep_start = prep_len = 0
    for i in range(aux + 1, len(words)):
        plen = _match_preposition(words, i)
        if plen and np_tokens:
            prep_start, prep_len = i, plen
            break
        np_tokens.append(lower[i])
    if not prep_len:
        return None

    subject_tokens = [t for t in np_tokens if t not in _ARTICLES]
    if not subject_tokens:
        return None
    subject = subject_tokens[-1]

    end = prep_start + prep_len
    while end < len(words):
        w = lower[end]
        if w in _AUXILIARIES or (len(w) > 4 and w.endswith("ing")):
            break
        end += 1
    phrase = " ".join(words[prep_start:end])
    return subject, phrase


def _remove_phrase(question: str, phrase: str) -> str:
    """Strip the phrase and re-normalize spacing and the trailing '?'."""
    body = question.strip().rstrip("?")
    stripped = body.replace(phrase, "", 1)
    return " ".join(stripped.split()) + "?"


def _pick_object(
    img: ImageAnnotation, matches: list[ObjectAnnotation], phrase: str
) -> ObjectAnnotation:
    """Prefer the object whose attributes overlap the phrase; ties go to
    the largest box."""
    phrase_tokens = set(tokenize(phrase))

    def score(obj: ObjectAnnotation) -> tuple:
        attr_tokens = {t for a in obj.attributes for t in tokenize(a)}
        return (-len(attr_tokens & phrase_tokens), -obj.box.area, obj.object_id)

    return min(matches, key=score)


@dataclass
class VerbalSpatialConfig:
    seed: int = 0
    split_fractions: tuple[float, float, float] = (0.8, 0.1, 0.1)

    def validate(self) -> None:
        if abs(sum(self.split_fractions) - 1.0) > 1e-9:
            raise ConfigurationError(f"split fractions must sum to 1: {self.split_fractions}")


def build_dv_ds(
    store: AnnotationStore, config: VerbalSpatialConfig
) -> tuple[list[PointQAInstance], list[PointQAInstance], BuildReport]:
    """Build the paired verbal (D_V) and spatial (D_S) datasets."""
    config.validate()
    report = BuildReport(dataset="verbal_spatial")

    per_image: dict[str, list] = {}
    for img in store:
        rows = []
        for qa in img.source_qas:
            if qa.answer_boxes is not None:
                continue
            detected = detect_verbal_disambiguation(qa.question)
            if detected is None:
                report.skip("no_verbal_disambiguation")
                continue
            subject, phrase = detected
            matches = img.objects_named(singularize(subject))
            if len(matches) < 2:
                report.skip("subject_not_repeated")
                continue
            target = _pick_object(img, matches, phrase)
            rows.append((qa, subject, phrase, target))
        if rows:
            per_image[img.image_id] = rows

    split_of = assign_splits(
        list(per_image.keys()), config.split_fractions, config.seed, EVAL_SPLITS
    )

    dv: list[PointQAInstance] = []
    ds: list[PointQAInstance] = []
    for image_id in sorted(per_image):
        split = split_of[image_id]
        for qa, subject, phrase, target in per_image[image_id]:
            qa_id = f"dvds:{qa.qa_id}"
            meta = {"object_class": target.canonical_name, "prep_phrase": phrase}
            dv.append(
                PointQAInstance(
                    qa_id=qa_id,
                    image_id=image_id,
                    question=qa.question,
                    answer=qa.answer,
                    split=split,
                    meta={"task": "verbal", **meta},
                )
            )
            ds.append(
                PointQAInstance(
                    qa_id=qa_id,
                    image_id=image_id,
                    question=_remove_phrase(qa.question, phrase),
                    answer=qa.answer,
                    split=split,
                    point=center_point(target.box),
                    gt_box=target.box,
                    meta={"task": "spatial", **meta},
                )
            )

    report.instances = len(dv) + len(ds)
    report.images = len(per_image)
    report.split_counts = {
        "dv": len(dv),
        "ds": len(ds),
    }
    return dv, ds, report
