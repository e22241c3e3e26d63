"""Point-conditioned answer predictors and their shared plumbing."""

from __future__ import annotations

import torch

from .baselines import baseline_modal_answer, training_answer_frequencies
from .checkpoint import load_checkpoint, save_checkpoint
from .config import ARCHITECTURES, STREAM_MODES, ModelConfig
from .core import AttentionRecord, StreamState, answer_distribution, masked_softmax
from .pythia import PythiaGlobal, PythiaLocal, QuestionEncoder
from .transformer import LxmertPoint, McanPoint
from .vocab import AnswerVocab, Vocabulary


def build_model(config: ModelConfig) -> torch.nn.Module:
    """Construct a model with seeded, reproducible initialization."""
    config.validate()
    torch.manual_seed(config.seed)
    if config.architecture == "pythia_local":
        return PythiaLocal(config)
    if config.architecture == "pythia_global":
        return PythiaGlobal(config)
    if config.architecture == "mcan":
        return McanPoint(config)
    return LxmertPoint(config)


def load_model(path) -> tuple[torch.nn.Module, ModelConfig]:
    config, state = load_checkpoint(path)
    model = build_model(config)
    model.load_state_dict(state)
    model.eval()
    return model, config


__all__ = [
    "ARCHITECTURES",
    "STREAM_MODES",
    "AnswerVocab",
    "AttentionRecord",
    "LxmertPoint",
    "McanPoint",
    "ModelConfig",
    "PythiaGlobal",
    "PythiaLocal",
    "QuestionEncoder",
    "StreamState",
    "Vocabulary",
    "answer_distribution",
    "baseline_modal_answer",
    "build_model",
    "load_checkpoint",
    "load_model",
    "masked_softmax",
    "save_checkpoint",
    "training_answer_frequencies",
]
