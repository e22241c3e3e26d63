"""Pure numpy box kernels: the fallback backend.

All kernels take float64 arrays of shape (P, 4) in (x, y, w, h) layout.
Integer pixel coordinates stay exact in float64, so these match the
Cython backend and the scalar reference bit for bit.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def iou_matrix(boxes_a: np.ndarray, boxes_b: np.ndarray) -> np.ndarray:
    """Pairwise IoU between two box arrays; result has shape (A, B)."""
    a = np.asarray(boxes_a, dtype=np.float64)
    b = np.asarray(boxes_b, dtype=np.float64)
    ax1, ay1 = a[:, 0:1], a[:, 1:2]
    ax2, ay2 = ax1 + a[:, 2:3], ay1 + a[:, 3:4]
    bx1, by1 = b[:, 0], b[:, 1]
    bx2, by2 = bx1 + b[:, 2], by1 + b[:, 3]

    iw = np.minimum(ax2, bx2[None, :]) - np.maximum(ax1, bx1[None, :])
    ih = np.minimum(ay2, by2[None, :]) - np.maximum(ay1, by1[None, :])
    iw = np.clip(iw, 0.0, None)
    ih = np.clip(ih, 0.0, None)
    inter = iw * ih
    area_a = (a[:, 2] * a[:, 3])[:, None]
    area_b = (b[:, 2] * b[:, 3])[None, :]
    union = area_a + area_b - inter
    out = np.zeros_like(inter)
    np.divide(inter, union, out=out, where=inter > 0)
    return out


def contains_mask(boxes: np.ndarray, px: float, py: float) -> np.ndarray:
    """Half-open containment test of one point against every box."""
    b = np.asarray(boxes, dtype=np.float64)
    return (
        (b[:, 0] <= px)
        & (px < b[:, 0] + b[:, 2])
        & (b[:, 1] <= py)
        & (py < b[:, 1] + b[:, 3])
    )


def greedy_dedup_mask(boxes: np.ndarray, iou_threshold: float) -> np.ndarray:
    """Duplicate-suppression keep mask.

    Boxes are visited in descending area order (ties by index); a box is
    dropped when its IoU with any already-kept box reaches the threshold.
    """
    b = np.asarray(boxes, dtype=np.float64)
    n = b.shape[0]
    keep = np.zeros(n, dtype=bool)
    if n == 0:
        return keep
    areas = b[:, 2] * b[:, 3]
    order = np.lexsort((np.arange(n), -areas))
    ious = iou_matrix(b, b)
    kept: list[int] = []
    for i in order:
        if all(ious[i, j] < iou_threshold for j in kept):
            keep[i] = True
            kept.append(i)
    return keep
