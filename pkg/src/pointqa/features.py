"""Region-proposal features: the binary .pqf codec, the feature store,
and point-conditioned proposal selection (the core model-input step).
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import boxops
from .errors import ContractError, CorruptFeatureError
from .geometry import BoundingBox, Point

MAGIC = b"PQF1"

STRATEGIES = ("all_containing", "top_score", "smallest", "full_image", "gt_box")

GT_BOX_IOU = 0.5


@dataclass
class ProposalSet:
    """Per-image region proposals: boxes (P,4 as x,y,w,h), objectness
    scores (P,), and features (P,D)."""

    image_id: str
    boxes: np.ndarray
    scores: np.ndarray
    features: np.ndarray

    def __post_init__(self) -> None:
        self.boxes = np.asarray(self.boxes, dtype=np.float32).reshape(-1, 4)
        self.scores = np.asarray(self.scores, dtype=np.float32).reshape(-1)
        self.features = np.asarray(self.features, dtype=np.float32)
        p = self.boxes.shape[0]
        if p < 1:
            raise ContractError("a ProposalSet needs at least one proposal")
        if self.scores.shape[0] != p or self.features.shape[0] != p:
            raise ContractError(
                f"boxes/scores/features length mismatch: "
                f"{p}/{self.scores.shape[0]}/{self.features.shape[0]}"
            )

    @property
    def count(self) -> int:
        return self.boxes.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.features.shape[1]


@dataclass
class SelectedRegions:
    """Zero-padded model input: N rows of features and boxes plus a
    validity mask.  Padding rows are exactly zero."""

    features: np.ndarray  # (N, D)
    boxes: np.ndarray  # (N, 4)
    mask: np.ndarray  # (N,) bool
    strategy: str
    used_fallback: bool = False

    @property
    def valid_count(self) -> int:
        return int(self.mask.sum())


def select_regions(
    proposals: ProposalSet,
    point: Point | None,
    strategy: str,
    n: int = 100,
    gt_box: BoundingBox | None = None,
) -> SelectedRegions:
    """Pick the proposals a strategy admits and pad/truncate to n rows.

    all_containing keeps every proposal containing the point; top_score
    and smallest keep a single containing proposal; full_image keeps all;
    gt_box keeps proposals with IoU >= 0.5 against the ground-truth box.
    When nothing contains the point, the proposal whose center is nearest
    to it is kept instead and the result is flagged.
    """
    if strategy not in STRATEGIES:
        raise ContractError(f"unknown strategy: {strategy}")
    if strategy == "gt_box":
        if gt_box is None:
            raise ContractError("gt_box strategy requires a ground-truth box")
    elif strategy != "full_image" and point is None:
        raise ContractError(f"strategy {strategy} requires a point")

    boxes64 = proposals.boxes.astype(np.float64)
    used_fallback = False

    if strategy == "full_image":
        idx = np.arange(proposals.count)
    elif strategy == "gt_box":
        ious = boxops.iou_matrix(
            boxes64, np.array([[gt_box.x, gt_box.y, gt_box.w, gt_box.h]], dtype=np.float64)
        )[:, 0]
        idx = np.flatnonzero(ious >= GT_BOX_IOU)
        if idx.size == 0:
            idx = np.array([int(np.argmax(ious))])
            used_fallback = True
    else:
        mask = np.asarray(boxops.contains_mask(boxes64, float(point.x), float(point.y)))
        idx = np.flatnonzero(mask)
        if idx.size == 0:
            centers = boxes64[:, :2] + boxes64[:, 2:] / 2.0
            d2 = (centers[:, 0] - point.x) ** 2 + (centers[:, 1] - point.y) ** 2
            idx = np.array([int(np.argmin(d2))])
            used_fallback = True
        elif strategy == "top_score":
            idx = idx[[int(np.argmax(proposals.scores[idx]))]]
        elif strategy == "smallest":
            areas = boxes64[idx, 2] * boxes64[idx, 3]
            idx = idx[[int(np.argmin(areas))]]

    if idx.size > n:
        # Keep the n highest-scoring proposals, in their original order.
        top = np.argsort(-proposals.scores[idx], kind="stable")[:n]
        idx = np.sort(idx[top])

    d = proposals.feature_dim
    features = np.zeros((n, d), dtype=np.float32)
    boxes = np.zeros((n, 4), dtype=np.float32)
    mask_out = np.zeros(n, dtype=bool)
    k = idx.size
    features[:k] = proposals.features[idx]
    boxes[:k] = proposals.boxes[idx]
    mask_out[:k] = True
    return SelectedRegions(features, boxes, mask_out, strategy, used_fallback)


def geometry_features(boxes: np.ndarray, width: int, height: int) -> np.ndarray:
    """Five normalized geometry values per box: x, y, w, h, relative area.

    Rows that are all-zero (padding) stay all-zero.
    """
    b = np.asarray(boxes, dtype=np.float32)
    out = np.zeros((b.shape[0], 5), dtype=np.float32)
    out[:, 0] = b[:, 0] / width
    out[:, 1] = b[:, 1] / height
    out[:, 2] = b[:, 2] / width
    out[:, 3] = b[:, 3] / height
    out[:, 4] = (b[:, 2] * b[:, 3]) / (width * height)
    return out


def save_proposals(proposals: ProposalSet, path: str | Path) -> None:
    """Write the little-endian .pqf layout: magic, P, D, P x (box+score)
    records, then the P*D f32 feature block."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    p, d = proposals.count, proposals.feature_dim
    with path.open("wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", p, d))
        for i in range(p):
            fh.write(
                struct.pack(
                    "<5f",
                    *(float(v) for v in proposals.boxes[i]),
                    float(proposals.scores[i]),
                )
            )
        fh.write(proposals.features.astype("<f4").tobytes(order="C"))


def load_proposals(path: str | Path, image_id: str | None = None) -> ProposalSet:
    """Decode one .pqf file; failures name the offending byte offset."""
    path = Path(path)
    blob = path.read_bytes()
    if blob[:4] != MAGIC:
        raise CorruptFeatureError(f"{path}: bad magic {blob[:4]!r}", offset=0)
    if len(blob) < 12:
        raise CorruptFeatureError(f"{path}: truncated header", offset=len(blob))
    p, d = struct.unpack_from("<II", blob, 4)
    expected = 12 + p * 20 + p * d * 4
    if len(blob) != expected:
        raise CorruptFeatureError(
            f"{path}: expected {expected} bytes for P={p}, D={d}, got {len(blob)}",
            offset=min(len(blob), expected),
        )
    records = np.frombuffer(blob, dtype="<f4", count=p * 5, offset=12).reshape(p, 5)
    features = np.frombuffer(blob, dtype="<f4", count=p * d, offset=12 + p * 20).reshape(p, d)
    return ProposalSet(
        image_id=image_id or path.stem,
        boxes=records[:, :4].copy(),
        scores=records[:, 4].copy(),
        features=features.copy(),
    )


@dataclass
class FeatureStore:
    """Read-only lookup of per-image proposal sets.

    Backed either by .pqf files under a directory (with a JSON manifest
    mapping image_id to relative path) or by an in-memory dict, which is
    what the synthetic world produces.
    """

    root: Path | None = None
    manifest: dict[str, str] = field(default_factory=dict)
    _memory: dict[str, ProposalSet] = field(default_factory=dict)
    _cache: dict[str, ProposalSet] = field(default_factory=dict)

    @classmethod
    def open(cls, root: str | Path) -> "FeatureStore":
        root = Path(root)
        with (root / "manifest.json").open("r", encoding="utf-8") as fh:
            manifest = json.load(fh)
        return cls(root=root, manifest=manifest)

    @classmethod
    def in_memory(cls, proposals: dict[str, ProposalSet]) -> "FeatureStore":
        return cls(_memory=dict(proposals))

    def __contains__(self, image_id: str) -> bool:
        return image_id in self._memory or image_id in self.manifest

    def get(self, image_id: str) -> ProposalSet:
        if image_id in self._memory:
            return self._memory[image_id]
        if image_id not in self._cache:
            if image_id not in self.manifest:
                raise KeyError(image_id)
            self._cache[image_id] = load_proposals(
                self.root / self.manifest[image_id], image_id
            )
        return self._cache[image_id]

    def image_ids(self) -> list[str]:
        return sorted(self._memory.keys() | self.manifest.keys())

    def save(self, root: str | Path) -> None:
        """Persist in-memory proposal sets as .pqf files plus manifest."""
        root = Path(root)
        root.mkdir(parents=True, exist_ok=True)
        manifest = {}
        for image_id in sorted(self._memory):
            rel = f"{image_id}.pqf"
            save_proposals(self._memory[image_id], root / rel)
            manifest[image_id] = rel
        with (root / "manifest.json").open("w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
