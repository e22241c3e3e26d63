"""Point-conditioned visual question answering toolkit: benchmark
dataset builders, point-input attention models, training/evaluation, and
an inference service with a pointing UI."""

__version__ = "0.1.0"

from .geometry import BoundingBox, Point, center_point, contains, iou

__all__ = ["BoundingBox", "Point", "center_point", "contains", "iou", "__version__"]
