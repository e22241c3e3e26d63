"""Small text utilities shared by the dataset builders: normalization,
tokenization, and rule-based singular/plural handling for object class
names.
"""

from __future__ import annotations

import re

_WS = re.compile(r"\s+")
_TOKEN = re.compile(r"[a-z0-9']+|\?")

# Irregular noun table; extend as new classes show up in annotations.
_IRREGULAR_SINGULAR = {
    "people": "person",
    "men": "man",
    "women": "woman",
    "children": "child",
    "feet": "foot",
    "teeth": "tooth",
    "geese": "goose",
    "mice": "mouse",
    "sheep": "sheep",
    "deer": "deer",
    "fish": "fish",
    "buses": "bus",
    "glasses": "glasses",
    "scissors": "scissors",
    "pants": "pants",
    "leaves": "leaf",
    "knives": "knife",
    "shelves": "shelf",
    "wolves": "wolf",
}

_IRREGULAR_PLURAL = {v: k for k, v in _IRREGULAR_SINGULAR.items() if v != k}
_IRREGULAR_PLURAL.update({"sheep": "sheep", "deer": "deer", "fish": "fish"})


def normalize(text: str) -> str:
    """Lowercase, trim, and collapse internal whitespace."""
    return _WS.sub(" ", text.strip().lower())


def tokenize(text: str) -> list[str]:
    """Lowercased word tokens; '?' is kept as its own token."""
    return _TOKEN.findall(text.lower())


def singularize(word: str) -> str:
    word = word.lower()
    if word in _IRREGULAR_SINGULAR:
        return _IRREGULAR_SINGULAR[word]
    if len(word) > 3 and word.endswith("ies"):
        return word[:-3] + "y"
    if len(word) > 2 and word.endswith(("ches", "shes", "xes", "sses", "zes")):
        return word[:-2]
    if len(word) > 1 and word.endswith("s") and not word.endswith(("ss", "us", "is")):
        return word[:-1]
    return word


def pluralize(word: str) -> str:
    word = word.lower()
    if word in _IRREGULAR_PLURAL:
        return _IRREGULAR_PLURAL[word]
    if len(word) > 1 and word.endswith("y") and word[-2] not in "aeiou":
        return word[:-1] + "ies"
    if word.endswith(("s", "x", "z", "ch", "sh")):
        return word + "es"
    return word + "s"
