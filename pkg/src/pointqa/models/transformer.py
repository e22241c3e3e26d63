"""Transformer answer predictors.

The unidirectional variant stacks self-attention over the question, then
guided blocks for the point stream (keys/values from the final question
states) and, in the three-stream mode, for the image stream with
keys/values from the concatenated question and point streams.  The
bidirectional variant runs per-stream self-attention stacks and then
cross-modality encoders where every stream attends over the
concatenation of the other streams' current states.

Proposal streams carry no positional encoding, so model outputs are
invariant to proposal order.
"""

from __future__ import annotations

import torch
import torch.nn as nn

from ..errors import ContractError
from .config import ModelConfig
from .core import (
    AttentionPool,
    CrossAttendLayer,
    GuidedTransformerBlock,
    SelfAttentionBlock,
    StreamState,
    init_linear,
    sinusoidal_positions,
)
from .vocab import PAD


class TokenStream(nn.Module):
    """Embeddings plus fixed positional encodings for question tokens."""

    def __init__(self, vocab_size: int, d: int):
        super().__init__()
        self.embed = nn.Embedding(vocab_size, d, padding_idx=PAD)

    def forward(self, tokens: torch.Tensor, mask: torch.Tensor) -> StreamState:
        if int(mask.sum(dim=1).min()) == 0:
            raise ContractError("empty question in batch")
        x = self.embed(tokens)
        pos = sinusoidal_positions(tokens.shape[1], x.shape[-1], x.dtype, x.device)
        return StreamState(x + pos.unsqueeze(0), mask, "question")


def _combine_visual(batch: dict) -> tuple[torch.Tensor, torch.Tensor]:
    """Concatenate image and point proposal rows into one stream with a
    trailing indicator feature (0 = image row, 1 = point row)."""
    img, pt = batch["img_feats"], batch["pt_feats"]
    flag_img = torch.zeros_like(img[..., :1])
    flag_pt = torch.ones_like(pt[..., :1])
    feats = torch.cat(
        [torch.cat([img, flag_img], dim=-1), torch.cat([pt, flag_pt], dim=-1)], dim=1
    )
    mask = torch.cat([batch["img_mask"], batch["pt_mask"]], dim=1)
    return feats, mask


def _slice_weights(
    weights: torch.Tensor, mask_a: torch.Tensor, mask_b: torch.Tensor | None
) -> tuple[torch.Tensor, torch.Tensor | None]:
    """Split pooled weights over concatenated rows back into per-stream
    distributions (each renormalized to sum to 1)."""
    na = mask_a.shape[1]
    wa = weights[:, :na]
    wa = wa / wa.sum(dim=1, keepdim=True).clamp_min(1e-30)
    if mask_b is None:
        return wa, None
    wb = weights[:, na:]
    wb = wb / wb.sum(dim=1, keepdim=True).clamp_min(1e-30)
    return wa, wb


class McanPoint(nn.Module):
    """Unidirectional stack with a separate point stream and late fusion:
    z1 = LN(W1 q + W2 v_pt), z2 = LN(W1 q + W3 v_img), z = z1 ++ z2."""

    def __init__(self, config: ModelConfig):
        super().__init__()
        config.validate()
        self.config = config
        d, heads = config.d, config.heads
        n_answers = len(config.answer_vocab)
        self.tokens = TokenStream(len(config.question_vocab) + 2, d)
        self.q_layers = nn.ModuleList(SelfAttentionBlock(d, heads) for _ in range(config.L))
        self.q_pool = AttentionPool(d)
        self.w1 = nn.Linear(d, d)

        mode = config.streams
        if mode == "q_only":
            self.norm0 = nn.LayerNorm(d)
        if mode in ("point_q", "three_stream"):
            self.pt_proj = nn.Linear(config.input_dim, d)
            self.pt_layers = nn.ModuleList(
                GuidedTransformerBlock(d, heads) for _ in range(config.L)
            )
            self.pt_pool = AttentionPool(d)
            self.w2 = nn.Linear(d, d)
            self.norm1 = nn.LayerNorm(d)
        if mode in ("image_q", "three_stream"):
            self.img_proj = nn.Linear(config.input_dim, d)
            self.img_layers = nn.ModuleList(
                GuidedTransformerBlock(d, heads) for _ in range(config.L)
            )
            self.img_pool = AttentionPool(d)
            self.w3 = nn.Linear(d, d)
            self.norm2 = nn.LayerNorm(d)
        if mode == "two_stream":
            self.vis_proj = nn.Linear(config.input_dim + 1, d)
            self.vis_layers = nn.ModuleList(
                GuidedTransformerBlock(d, heads) for _ in range(config.L)
            )
            self.vis_pool = AttentionPool(d)
            self.w3 = nn.Linear(d, d)
            self.norm2 = nn.LayerNorm(d)

        width = 2 * d if mode == "three_stream" else d
        self.classifier = nn.Linear(width, n_answers)
        init_linear(self)

    def _run_guided(self, layers, x, mask, context: StreamState, modality: str) -> StreamState:
        stream = StreamState(x, mask, modality)
        for layer in layers:
            stream = layer(stream, context)
        return stream

    def forward(self, batch: dict) -> tuple[torch.Tensor, dict]:
        q_stream = self.tokens(batch["tokens"], batch["token_mask"])
        for layer in self.q_layers:
            q_stream = layer(q_stream)
        q_bar, _ = self.q_pool(q_stream)
        mode = self.config.streams
        attn: dict = {}

        pt_final = None
        if mode in ("point_q", "three_stream"):
            pt_final = self._run_guided(
                self.pt_layers,
                self.pt_proj(batch["pt_feats"]),
                batch["pt_mask"],
                q_stream,
                "point",
            )
            v_pt, pt_w = self.pt_pool(pt_final)
            attn["local"] = pt_w
            z1 = self.norm1(self.w1(q_bar) + self.w2(v_pt))

        if mode in ("image_q", "three_stream"):
            context = q_stream
            if mode == "three_stream":
                context = StreamState(
                    torch.cat([q_stream.vectors, pt_final.vectors], dim=1),
                    torch.cat([q_stream.mask, pt_final.mask], dim=1),
                    "question+point",
                )
            img_final = self._run_guided(
                self.img_layers,
                self.img_proj(batch["img_feats"]),
                batch["img_mask"],
                context,
                "image",
            )
            v_img, img_w = self.img_pool(img_final)
            attn["global"] = img_w
            z2 = self.norm2(self.w1(q_bar) + self.w3(v_img))

        if mode == "q_only":
            z = self.norm0(self.w1(q_bar))
        elif mode == "point_q":
            z = z1
        elif mode == "image_q":
            z = z2
        elif mode == "two_stream":
            feats, mask = _combine_visual(batch)
            vis_final = self._run_guided(
                self.vis_layers, self.vis_proj(feats), mask, q_stream, "visual"
            )
            v_vis, vis_w = self.vis_pool(vis_final)
            attn["global"], attn["local"] = _slice_weights(
                vis_w, batch["img_mask"], batch["pt_mask"]
            )
            z = self.norm2(self.w1(q_bar) + self.w3(v_vis))
        else:
            z = torch.cat([z1, z2], dim=-1)

        per_layer = {
            name.removesuffix("_layers"): [layer.last_cross_weights for layer in layers]
            for name in ("pt_layers", "img_layers", "vis_layers")
            if (layers := getattr(self, name, None)) is not None
            and layers[0].last_cross_weights is not None
        }
        if per_layer:
            attn["per_layer"] = per_layer
        return self.classifier(z), attn


class LxmertPoint(nn.Module):
    """Bidirectional stack: per-stream self-attention, then cross-modality
    encoders where each stream attends the other streams' current states;
    the first language position is pooled for classification."""

    def __init__(self, config: ModelConfig):
        super().__init__()
        config.validate()
        self.config = config
        d, heads = config.d, config.heads
        n_answers = len(config.answer_vocab)
        mode = config.streams
        self.tokens = TokenStream(len(config.question_vocab) + 2, d)
        self.lang_layers = nn.ModuleList(SelfAttentionBlock(d, heads) for _ in range(config.n_l))

        self.visual_streams: list[str] = []
        if mode in ("image_q", "three_stream"):
            self.img_proj = nn.Linear(config.input_dim, d)
            self.img_layers = nn.ModuleList(
                SelfAttentionBlock(d, heads) for _ in range(config.n_img)
            )
            self.visual_streams.append("image")
        if mode in ("point_q", "three_stream"):
            self.pt_proj = nn.Linear(config.input_dim, d)
            self.pt_layers = nn.ModuleList(
                SelfAttentionBlock(d, heads) for _ in range(config.n_pt)
            )
            self.visual_streams.append("point")
        if mode == "two_stream":
            self.vis_proj = nn.Linear(config.input_dim + 1, d)
            self.vis_layers = nn.ModuleList(
                SelfAttentionBlock(d, heads) for _ in range(config.n_img)
            )
            self.visual_streams.append("visual")

        if mode != "q_only":
            names = ["lang"] + self.visual_streams
            self.cross = nn.ModuleDict(
                {
                    name: nn.ModuleList(CrossAttendLayer(d, heads) for _ in range(config.n_x))
                    for name in names
                }
            )
        self.classifier = nn.Linear(d, n_answers)
        init_linear(self)

    def forward(self, batch: dict) -> tuple[torch.Tensor, dict]:
        mode = self.config.streams
        lang = self.tokens(batch["tokens"], batch["token_mask"])
        for layer in self.lang_layers:
            lang = layer(lang)

        streams: dict[str, StreamState] = {"lang": lang}
        if "image" in self.visual_streams:
            s = StreamState(self.img_proj(batch["img_feats"]), batch["img_mask"], "image")
            for layer in self.img_layers:
                s = layer(s)
            streams["image"] = s
        if "point" in self.visual_streams:
            s = StreamState(self.pt_proj(batch["pt_feats"]), batch["pt_mask"], "point")
            for layer in self.pt_layers:
                s = layer(s)
            streams["point"] = s
        if "visual" in self.visual_streams:
            feats, mask = _combine_visual(batch)
            s = StreamState(self.vis_proj(feats), mask, "visual")
            for layer in self.vis_layers:
                s = layer(s)
            streams["visual"] = s

        attn: dict = {}
        if mode != "q_only":
            names = list(streams)
            for i in range(self.config.n_x):
                current = dict(streams)
                for name in names:
                    contexts = [current[n] for n in names if n != name]
                    streams[name] = self.cross[name][i](current[name], contexts)
            # language-side attention over proposals at the last cross layer,
            # head-averaged at the first language position
            lw = self.cross["lang"][-1].last_cross_weights.mean(dim=1)[:, 0, :]
            ctx_names = [n for n in names if n != "lang"]
            if ctx_names == ["image"]:
                attn["global"], _ = _slice_weights(lw, batch["img_mask"], None)
            elif ctx_names == ["point"]:
                attn["local"], _ = _slice_weights(lw, batch["pt_mask"], None)
            elif ctx_names == ["visual"]:
                attn["global"], attn["local"] = _slice_weights(
                    lw, batch["img_mask"], batch["pt_mask"]
                )
            else:  # image then point
                attn["global"], attn["local"] = _slice_weights(
                    lw, batch["img_mask"], batch["pt_mask"]
                )
            attn["per_layer"] = {
                name: [layer.last_cross_weights for layer in layers]
                for name, layers in self.cross.items()
            }

        pooled = streams["lang"].vectors[:, 0, :]
        return self.classifier(pooled), attn
