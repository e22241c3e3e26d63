"""Shared model building blocks: hard-masked attention, transformer
layers, and the attention-record plumbing.

Every softmax here masks invalid rows to -inf first, so padding rows get
exactly zero weight and never influence any output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

from ..errors import ContractError


@dataclass
class StreamState:
    """One modality stream: (B, T, d) vectors plus a (B, T) validity mask."""

    vectors: torch.Tensor
    mask: torch.Tensor
    modality: str = ""

    def __post_init__(self) -> None:
        if self.vectors.shape[:2] != self.mask.shape:
            raise ContractError(
                f"stream vectors {tuple(self.vectors.shape)} do not match "
                f"mask {tuple(self.mask.shape)}"
            )


@dataclass
class AttentionRecord:
    """Per-example attention over proposals, for analysis and overlays."""

    local: np.ndarray | None = None
    global_weights: np.ndarray | None = None
    per_layer: dict | None = None


def masked_softmax(logits: torch.Tensor, mask: torch.Tensor, dim: int = -1) -> torch.Tensor:
    """Softmax over valid entries only; invalid entries come out exactly 0.

    At least one entry per row must be valid.
    """
    filled = logits.masked_fill(~mask, float("-inf"))
    return torch.softmax(filled, dim=dim)


def init_linear(module: nn.Module) -> None:
    """Uniform fan-in initialization with zero biases."""
    for m in module.modules():
        if isinstance(m, nn.Linear):
            bound = 1.0 / math.sqrt(m.in_features)
            nn.init.uniform_(m.weight, -bound, bound)
            if m.bias is not None:
                nn.init.zeros_(m.bias)
        elif isinstance(m, nn.Embedding):
            bound = 1.0 / math.sqrt(m.embedding_dim)
            nn.init.uniform_(m.weight, -bound, bound)
            if m.padding_idx is not None:
                with torch.no_grad():
                    m.weight[m.padding_idx].fill_(0)
        elif isinstance(m, nn.GRU):
            for name, param in m.named_parameters():
                if "weight" in name:
                    bound = 1.0 / math.sqrt(m.hidden_size)
                    nn.init.uniform_(param, -bound, bound)
                else:
                    nn.init.zeros_(param)


class GuidedAttention(nn.Module):
    """Question-guided attention over a proposal stream (the recurrent
    models' attention step).

    Stream rows and the guide vector are projected to a common space,
    combined by elementwise product, and scored by a two-layer MLP; the
    pooled output is the weighted sum of the *original* stream vectors.
    An optional second guide (the local summary) multiplies in for the
    global-attention variant.
    """

    def __init__(self, stream_dim: int, guide_dim: int, d: int, second_guide_dim: int | None = None):
        super().__init__()
        self.proj_stream = nn.Linear(stream_dim, d)
        self.proj_guide = nn.Linear(guide_dim, d)
        self.proj_second = nn.Linear(second_guide_dim, d) if second_guide_dim else None
        self.score = nn.Sequential(nn.Linear(d, d), nn.GELU(), nn.Linear(d, 1))

    def forward(
        self,
        guide: torch.Tensor,
        stream: StreamState,
        second_guide: torch.Tensor | None = None,
    ) -> tuple[torch.Tensor, torch.Tensor]:
        if int(stream.mask.sum(dim=1).min()) == 0:
            raise ContractError("attention over a fully masked stream")
        h = self.proj_stream(stream.vectors) * self.proj_guide(guide).unsqueeze(1)
        if self.proj_second is not None:
            if second_guide is None:
                raise ContractError("this attention head requires a second guide")
            h = h * self.proj_second(second_guide).unsqueeze(1)
        logits = self.score(h).squeeze(-1)
        weights = masked_softmax(logits, stream.mask)
        pooled = torch.einsum("bt,btd->bd", weights, stream.vectors)
        return pooled, weights


class MultiHeadAttention(nn.Module):
    """Scaled dot-product attention with key-side hard masking."""

    def __init__(self, d: int, heads: int):
        super().__init__()
        self.d = d
        self.heads = heads
        self.dk = d // heads
        self.q_proj = nn.Linear(d, d)
        self.k_proj = nn.Linear(d, d)
        self.v_proj = nn.Linear(d, d)
        self.out_proj = nn.Linear(d, d)

    def forward(
        self,
        query: torch.Tensor,
        context: torch.Tensor,
        context_mask: torch.Tensor,
    ) -> tuple[torch.Tensor, torch.Tensor]:
        b, tq, _ = query.shape
        tk = context.shape[1]
        if int(context_mask.sum(dim=1).min()) == 0:
            raise ContractError("attention over a fully masked context")

        def split(x: torch.Tensor, t: int) -> torch.Tensor:
            return x.view(b, t, self.heads, self.dk).transpose(1, 2)

        q = split(self.q_proj(query), tq)
        k = split(self.k_proj(context), tk)
        v = split(self.v_proj(context), tk)
        scores = (q @ k.transpose(-2, -1)) / math.sqrt(self.dk)
        weights = masked_softmax(scores, context_mask[:, None, None, :])
        out = (weights @ v).transpose(1, 2).reshape(b, tq, self.d)
        return self.out_proj(out), weights


class FeedForward(nn.Module):
    def __init__(self, d: int, ratio: int = 4):
        super().__init__()
        self.net = nn.Sequential(nn.Linear(d, ratio * d), nn.GELU(), nn.Linear(ratio * d, d))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.net(x)


class SelfAttentionBlock(nn.Module):
    """Post-norm transformer encoder block."""

    def __init__(self, d: int, heads: int):
        super().__init__()
        self.attn = MultiHeadAttention(d, heads)
        self.norm1 = nn.LayerNorm(d)
        self.ffn = FeedForward(d)
        self.norm2 = nn.LayerNorm(d)

    def forward(self, stream: StreamState) -> StreamState:
        attended, _ = self.attn(stream.vectors, stream.vectors, stream.mask)
        x = self.norm1(stream.vectors + attended)
        x = self.norm2(x + self.ffn(x))
        return StreamState(x, stream.mask, stream.modality)


class GuidedTransformerBlock(nn.Module):
    """Self-attention, then cross-attention onto a fixed context, then a
    feed-forward sublayer (the unidirectional decoder block)."""

    def __init__(self, d: int, heads: int):
        super().__init__()
        self.self_attn = MultiHeadAttention(d, heads)
        self.norm1 = nn.LayerNorm(d)
        self.cross_attn = MultiHeadAttention(d, heads)
        self.norm2 = nn.LayerNorm(d)
        self.ffn = FeedForward(d)
        self.norm3 = nn.LayerNorm(d)
        self.last_cross_weights: torch.Tensor | None = None

    def forward(self, stream: StreamState, context: StreamState) -> StreamState:
        attended, _ = self.self_attn(stream.vectors, stream.vectors, stream.mask)
        x = self.norm1(stream.vectors + attended)
        crossed, cw = self.cross_attn(x, context.vectors, context.mask)
        self.last_cross_weights = cw
        x = self.norm2(x + crossed)
        x = self.norm3(x + self.ffn(x))
        return StreamState(x, stream.mask, stream.modality)


class CrossAttendLayer(nn.Module):
    """Cross-attention of a target stream onto the row-wise concatenation
    of any number of context streams, followed by self-attention and a
    feed-forward sublayer (the bidirectional encoder block)."""

    def __init__(self, d: int, heads: int):
        super().__init__()
        self.cross_attn = MultiHeadAttention(d, heads)
        self.norm1 = nn.LayerNorm(d)
        self.self_attn = MultiHeadAttention(d, heads)
        self.norm2 = nn.LayerNorm(d)
        self.ffn = FeedForward(d)
        self.norm3 = nn.LayerNorm(d)
        self.last_cross_weights: torch.Tensor | None = None

    def forward(self, target: StreamState, contexts: list[StreamState]) -> StreamState:
        widths = {s.vectors.shape[-1] for s in contexts} | {target.vectors.shape[-1]}
        if len(widths) != 1:
            raise ContractError(f"stream widths differ: {sorted(widths)}")
        ctx = torch.cat([s.vectors for s in contexts], dim=1)
        ctx_mask = torch.cat([s.mask for s in contexts], dim=1)
        crossed, cw = self.cross_attn(target.vectors, ctx, ctx_mask)
        self.last_cross_weights = cw
        x = self.norm1(target.vectors + crossed)
        attended, _ = self.self_attn(x, x, target.mask)
        x = self.norm2(x + attended)
        x = self.norm3(x + self.ffn(x))
        return StreamState(x, target.mask, target.modality)


class AttentionPool(nn.Module):
    """Learned single-query pooling of a stream to one vector."""

    def __init__(self, d: int):
        super().__init__()
        self.score = nn.Linear(d, 1)

    def forward(self, stream: StreamState) -> tuple[torch.Tensor, torch.Tensor]:
        logits = self.score(stream.vectors).squeeze(-1)
        weights = masked_softmax(logits, stream.mask)
        return torch.einsum("bt,btd->bd", weights, stream.vectors), weights


def sinusoidal_positions(t: int, d: int, dtype: torch.dtype, device) -> torch.Tensor:
    """Fixed positional encodings for token streams (proposal streams get
    none, keeping them permutation invariant)."""
    pos = torch.arange(t, dtype=dtype, device=device).unsqueeze(1)
    i = torch.arange(0, d, 2, dtype=dtype, device=device)
    angles = pos / torch.pow(torch.tensor(10000.0, dtype=dtype, device=device), i / d)
    enc = torch.zeros(t, d, dtype=dtype, device=device)
    enc[:, 0::2] = torch.sin(angles)
    enc[:, 1::2] = torch.cos(angles[:, : d // 2])
    return enc


def cross_entropy(logits: torch.Tensor, labels: torch.Tensor) -> torch.Tensor:
    return F.cross_entropy(logits, labels)


def answer_distribution(logits: torch.Tensor) -> torch.Tensor:
    """Softmax over the answer space; rows sum to 1."""
    return torch.softmax(logits, dim=-1)
