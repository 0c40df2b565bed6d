"""Axis-aligned rectangle geometry shared by association, tracking and metrics.

Coordinates are continuous pixels: pixel ``(row, col)`` covers ``[col, col+1) x
[row, row+1)`` so its center sits at ``(col + 0.5, row + 0.5)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass


def _check_finite(*values: float) -> None:
    if not all(math.isfinite(v) for v in values):
        raise ValueError(f"box fields must be finite, got {values}")


@dataclass(frozen=True)
class BoundingBox:
    """Rectangle stored as (left, top, width, height)."""

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        _check_finite(self.x, self.y, self.w, self.h)
        if self.w <= 0 or self.h <= 0:
            raise ValueError(f"degenerate box w={self.w}, h={self.h}")

    @property
    def cx(self) -> float:
        return self.x + self.w / 2.0

    @property
    def cy(self) -> float:
        return self.y + self.h / 2.0

    @property
    def x2(self) -> float:
        return self.x + self.w

    @property
    def y2(self) -> float:
        return self.y + self.h

    @property
    def area(self) -> float:
        return self.w * self.h

    @property
    def diagonal(self) -> float:
        return math.hypot(self.w, self.h)

    def translated(self, dx: float, dy: float) -> "BoundingBox":
        return BoundingBox(self.x + dx, self.y + dy, self.w, self.h)

    def to_tagbox(self) -> "TagBox":
        return TagBox(self.cx, self.cy, self.w, self.h)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x, self.y, self.w, self.h)


@dataclass(frozen=True)
class TagBox:
    """Tracked sub-region of a target, stored as (center x, center y, width, height)."""

    cx: float
    cy: float
    w: float
    h: float

    def __post_init__(self):
        _check_finite(self.cx, self.cy, self.w, self.h)
        if self.w <= 0 or self.h <= 0:
            raise ValueError(f"degenerate tag-box w={self.w}, h={self.h}")

    @property
    def x(self) -> float:
        return self.cx - self.w / 2.0

    @property
    def y(self) -> float:
        return self.cy - self.h / 2.0

    @property
    def area(self) -> float:
        return self.w * self.h

    def translated(self, dx: float, dy: float) -> "TagBox":
        return TagBox(self.cx + dx, self.cy + dy, self.w, self.h)

    def to_bbox(self) -> BoundingBox:
        return BoundingBox(self.x, self.y, self.w, self.h)

    @classmethod
    def centered_in(cls, box: BoundingBox, fraction: float) -> "TagBox":
        """Tag-box concentric with ``box`` and ``fraction`` of its width/height."""
        return cls(box.cx, box.cy, box.w * fraction, box.h * fraction)


def _intersection(ax1, ay1, ax2, ay2, bx1, by1, bx2, by2) -> float:
    iw = min(ax2, bx2) - max(ax1, bx1)
    ih = min(ay2, by2) - max(ay1, by1)
    if iw <= 0 or ih <= 0:
        return 0.0
    return iw * ih


def intersection_area(a: BoundingBox, b: BoundingBox) -> float:
    return _intersection(a.x, a.y, a.x2, a.y2, b.x, b.y, b.x2, b.y2)


def overlap_fraction(db: BoundingBox, tb: TagBox) -> float:
    """Fraction of the tag-box area covered by the detection box."""
    tx1, ty1, tx2, ty2 = tb.x, tb.y, tb.x + tb.w, tb.y + tb.h
    if db.x <= tx1 and db.y <= ty1 and tx2 <= db.x2 and ty2 <= db.y2:
        return 1.0
    inter = _intersection(db.x, db.y, db.x2, db.y2, tx1, ty1, tx2, ty2)
    if inter == 0.0:
        return 0.0
    return min(1.0, inter / tb.area)


def iou(a: BoundingBox, b: BoundingBox) -> float:
    inter = intersection_area(a, b)
    if inter == 0.0:
        return 0.0
    if a == b:
        return 1.0
    return min(1.0, inter / (a.area + b.area - inter))


def normalized_center_distance(db: BoundingBox, tb: TagBox) -> float:
    """Center-to-center distance divided by the diagonal of ``db``."""
    return math.hypot(db.cx - tb.cx, db.cy - tb.cy) / db.diagonal
