"""Recurrent-encoder answer predictors: the point-local model and the
local+global extension.

The local model attends over point-containing proposals guided by the
question vector; the global model additionally attends over all
proposals, guided by both the question and the pooled local summary, and
fuses the two pooled streams.
"""

from __future__ import annotations

import torch
import torch.nn as nn

from ..errors import ContractError
from .config import ModelConfig
from .core import GuidedAttention, StreamState, init_linear
from .vocab import PAD


class QuestionEncoder(nn.Module):
    """Embedding + single-layer GRU; the final valid hidden state is the
    question vector."""

    def __init__(self, vocab_size: int, d: int):
        super().__init__()
        self.embed = nn.Embedding(vocab_size, d, padding_idx=PAD)
        self.gru = nn.GRU(d, d, batch_first=True)

    def forward(self, tokens: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
        lengths = mask.sum(dim=1)
        if int(lengths.min()) == 0:
            raise ContractError("empty question in batch")
        out, _ = self.gru(self.embed(tokens))
        idx = (lengths - 1).long()
        return out[torch.arange(tokens.shape[0]), idx]


class _Fusion(nn.Module):
    """Project to a common space, multiply elementwise, then classify."""

    def __init__(self, q_dim: int, v_dim: int, d: int, n_answers: int):
        super().__init__()
        self.proj_q = nn.Linear(q_dim, d)
        self.proj_v = nn.Linear(v_dim, d)
        self.classifier = nn.Sequential(nn.Linear(d, d), nn.GELU(), nn.Linear(d, n_answers))

    def forward(self, q: torch.Tensor, v: torch.Tensor) -> torch.Tensor:
        return self.classifier(self.proj_q(q) * self.proj_v(v))


class PythiaLocal(nn.Module):
    """Question-guided attention over the point-selected proposals.

    streams=q_only skips the visual pathway entirely; image_q is the same
    module fed full-image regions by the data pipeline.
    """

    def __init__(self, config: ModelConfig):
        super().__init__()
        config.validate()
        self.config = config
        d = config.d
        n_answers = len(config.answer_vocab)
        self.encoder = QuestionEncoder(len(config.question_vocab) + 2, d)
        if config.streams == "q_only":
            self.classifier = nn.Sequential(nn.Linear(d, d), nn.GELU(), nn.Linear(d, n_answers))
        else:
            self.attend = GuidedAttention(config.input_dim, d, d)
            self.fusion = _Fusion(d, config.input_dim, d, n_answers)
        init_linear(self)

    def forward(self, batch: dict) -> tuple[torch.Tensor, dict]:
        q = self.encoder(batch["tokens"], batch["token_mask"])
        if self.config.streams == "q_only":
            return self.classifier(q), {}
        stream = StreamState(batch["pt_feats"], batch["pt_mask"], "point")
        v_pt, a_pt = self.attend(q, stream)
        return self.fusion(q, v_pt), {"local": a_pt}


class PythiaGlobal(nn.Module):
    """Local attention plus image-wide attention conditioned on the local
    summary; pooled streams fuse by paired products and concatenation."""

    def __init__(self, config: ModelConfig):
        super().__init__()
        config.validate()
        self.config = config
        d = config.d
        in_dim = config.input_dim
        n_answers = len(config.answer_vocab)
        self.encoder = QuestionEncoder(len(config.question_vocab) + 2, d)
        self.attend_local = GuidedAttention(in_dim, d, d)
        self.attend_global = GuidedAttention(in_dim, d, d, second_guide_dim=in_dim)
        self.proj_q_local = nn.Linear(d, d)
        self.proj_v_local = nn.Linear(in_dim, d)
        self.proj_q_global = nn.Linear(d, d)
        self.proj_v_global = nn.Linear(in_dim, d)
        self.classifier = nn.Sequential(nn.Linear(2 * d, d), nn.GELU(), nn.Linear(d, n_answers))
        init_linear(self)

    def forward(self, batch: dict) -> tuple[torch.Tensor, dict]:
        q = self.encoder(batch["tokens"], batch["token_mask"])
        pt = StreamState(batch["pt_feats"], batch["pt_mask"], "point")
        img = StreamState(batch["img_feats"], batch["img_mask"], "image")
        v_pt, a_pt = self.attend_local(q, pt)
        v_all, a_all = self.attend_global(q, img, second_guide=v_pt)
        z = torch.cat(
            [
                self.proj_q_local(q) * self.proj_v_local(v_pt),
                self.proj_q_global(q) * self.proj_v_global(v_all),
            ],
            dim=-1,
        )
        return self.classifier(z), {"local": a_pt, "global": a_all}
