"""Axis-aligned box arithmetic shared by the dataset builders and the
feature provider.

Boxes use the (x, y, w, h) convention with a half-open extent
[x, x+w) x [y, y+h), so two abutting boxes never both contain a point on
their shared edge.  Array-level kernels for the hot loops live in
:mod:`pointqa.boxops`; the scalar operations here are the reference
behavior.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidGeometryError


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box: top-left corner (x, y), size (w, h) in pixels."""

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self) -> None:
        if self.w <= 0 or self.h <= 0:
            raise InvalidGeometryError(f"degenerate box: w={self.w}, h={self.h}")

    @property
    def area(self) -> float:
        return self.w * self.h

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x, self.y, self.w, self.h)

    def to_dict(self) -> dict:
        return {"x": self.x, "y": self.y, "w": self.w, "h": self.h}

    @classmethod
    def from_dict(cls, d: dict) -> "BoundingBox":
        return cls(d["x"], d["y"], d["w"], d["h"])


@dataclass(frozen=True)
class Point:
    """A single pixel coordinate."""

    x: int
    y: int

    def to_dict(self) -> dict:
        return {"x": self.x, "y": self.y}

    @classmethod
    def from_dict(cls, d: dict) -> "Point":
        return cls(d["x"], d["y"])


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection-over-union of two boxes; 0.0 when disjoint."""
    ix = min(a.x + a.w, b.x + b.w) - max(a.x, b.x)
    iy = min(a.y + a.h, b.y + b.h) - max(a.y, b.y)
    if ix <= 0 or iy <= 0:
        return 0.0
    inter = ix * iy
    return inter / (a.area + b.area - inter)


def contains(box: BoundingBox, p: Point) -> bool:
    """True iff the point lies inside the box under the half-open convention."""
    return box.x <= p.x < box.x + box.w and box.y <= p.y < box.y + box.h


def center_point(box: BoundingBox) -> Point:
    """Center of the box, floored to pixel coordinates.

    Flooring keeps the result inside the half-open extent, so
    ``contains(box, center_point(box))`` always holds.
    """
    return Point(int(math.floor(box.x + box.w / 2)), int(math.floor(box.y + box.h / 2)))
