"""Model configuration shared by all four architectures."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import ConfigurationError

ARCHITECTURES = ("pythia_local", "pythia_global", "mcan", "lxmert")
STREAM_MODES = ("q_only", "image_q", "point_q", "two_stream", "three_stream")


@dataclass
class ModelConfig:
    architecture: str = "pythia_local"
    streams: str = "point_q"
    d: int = 256
    heads: int = 4
    L: int = 2  # mcan encoder/decoder depth
    n_l: int = 5  # lxmert language layers
    n_img: int = 3
    n_pt: int = 3
    n_x: int = 3  # lxmert cross-modality encoders
    feature_dim: int = 32  # raw proposal feature width (before geometry)
    n_proposals: int = 100
    max_question_len: int = 20
    seed: int = 0
    answer_vocab: list[str] = field(default_factory=list)
    question_vocab: list[str] = field(default_factory=list)

    def validate(self) -> None:
        if self.architecture not in ARCHITECTURES:
            raise ConfigurationError(f"unknown architecture: {self.architecture}")
        if self.streams not in STREAM_MODES:
            raise ConfigurationError(f"unknown streams mode: {self.streams}")
        if self.architecture == "pythia_local" and self.streams in ("two_stream", "three_stream"):
            raise ConfigurationError("pythia_local has no multi-stream variant")
        if self.architecture == "pythia_global" and self.streams in ("two_stream",):
            raise ConfigurationError("pythia_global has no two-stream variant")
        for name in ("L", "n_l", "n_img", "n_pt", "n_x"):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"layer count {name} must be >= 1")
        if self.d % self.heads != 0:
            raise ConfigurationError(f"heads ({self.heads}) must divide d ({self.d})")
        if not self.answer_vocab:
            raise ConfigurationError("answer vocabulary is required")

    @property
    def input_dim(self) -> int:
        """Proposal input width: raw features plus 5 geometry values."""
        return self.feature_dim + 5

    def to_dict(self) -> dict:
        return {
            "architecture": self.architecture,
            "streams": self.streams,
            "d": self.d,
            "heads": self.heads,
            "L": self.L,
            "n_l": self.n_l,
            "n_img": self.n_img,
            "n_pt": self.n_pt,
            "n_x": self.n_x,
            "feature_dim": self.feature_dim,
            "n_proposals": self.n_proposals,
            "max_question_len": self.max_question_len,
            "seed": self.seed,
            "answer_vocab": list(self.answer_vocab),
            "question_vocab": list(self.question_vocab),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        return cls(**{k: d[k] for k in cls.__dataclass_fields__ if k in d})
