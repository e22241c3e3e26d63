"""Question token and answer label vocabularies."""

from __future__ import annotations

from ..errors import ContractError
from ..text import tokenize

PAD = 0
UNK = 1


class Vocabulary:
    """Token index with reserved padding and unknown slots."""

    def __init__(self, tokens: list[str]) -> None:
        self.tokens = sorted(set(tokens))
        self.index = {tok: i + 2 for i, tok in enumerate(self.tokens)}

    def __len__(self) -> int:
        return len(self.tokens) + 2

    @classmethod
    def from_questions(cls, questions: list[str]) -> "Vocabulary":
        tokens = []
        for q in questions:
            tokens.extend(t for t in tokenize(q) if t != "?")
        return cls(tokens)

    def encode(self, question: str, max_len: int = 20) -> list[int]:
        ids = [
            self.index.get(tok, UNK)
            for tok in tokenize(question)
            if tok != "?"
        ][:max_len]
        if not ids:
            raise ContractError(f"question has no tokens: {question!r}")
        return ids


class AnswerVocab:
    """Answer label set in sorted order (stable across runs)."""

    def __init__(self, labels: list[str]) -> None:
        self.labels = sorted(set(labels))
        if not self.labels:
            raise ContractError("answer vocabulary is empty")
        self.index = {label: i for i, label in enumerate(self.labels)}

    def __len__(self) -> int:
        return len(self.labels)

    def __contains__(self, label: str) -> bool:
        return label in self.index
