"""Box algebra shared by the whole pipeline: IoU, containment and NMS."""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Sequence

DEFAULT_NMS_IOU = 0.45


class ClassId(IntEnum):
    FIRE = 0
    SMOKE = 1

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def from_label(cls, label: str) -> "ClassId":
        try:
            return cls[label.upper()]
        except KeyError:
            raise ValueError(f"unknown class label {label!r}") from None


@dataclass(frozen=True)
class BBox:
    """Axis-aligned rectangle in center format, normalized to image size."""

    cx: float
    cy: float
    w: float
    h: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.cx <= 1.0 and 0.0 <= self.cy <= 1.0):
            raise ValueError(f"box center outside [0,1]: ({self.cx}, {self.cy})")
        if not (0.0 < self.w <= 1.0 and 0.0 < self.h <= 1.0):
            raise ValueError(f"box size outside (0,1]: ({self.w}, {self.h})")

    def corners(self):
        """(x1, y1, x2, y2) clamped to the unit square."""
        # clamping never produces a negative extent because the center is inside
        return (
            max(0.0, self.cx - self.w / 2),
            max(0.0, self.cy - self.h / 2),
            min(1.0, self.cx + self.w / 2),
            min(1.0, self.cy + self.h / 2),
        )

    def area(self) -> float:
        x1, y1, x2, y2 = self.corners()
        return (x2 - x1) * (y2 - y1)


@dataclass(frozen=True)
class Detection:
    """A classified box with detector confidence."""

    box: BBox
    class_id: ClassId
    confidence: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence outside [0,1]: {self.confidence}")


def iou(a: BBox, b: BBox) -> float:
    """Intersection over union of two boxes; 0.0 when disjoint."""
    ax1, ay1, ax2, ay2 = a.corners()
    bx1, by1, bx2, by2 = b.corners()
    iw = min(ax2, bx2) - max(ax1, bx1)
    ih = min(ay2, by2) - max(ay1, by1)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    inter = iw * ih
    union = a.area() + b.area() - inter
    return inter / union


def contains(outer: BBox, inner: BBox) -> bool:
    """True when inner lies completely inside outer (clamped corners)."""
    ox1, oy1, ox2, oy2 = outer.corners()
    ix1, iy1, ix2, iy2 = inner.corners()
    return ox1 <= ix1 and oy1 <= iy1 and ix2 <= ox2 and iy2 <= oy2


def nms(detections: Sequence[Detection], iou_threshold: float = DEFAULT_NMS_IOU) -> list[Detection]:
    """Greedy class-aware non-maximum suppression.

    Detections are visited in descending confidence (ties keep input order);
    one is dropped when it overlaps an already kept detection of the same
    class with IoU >= iou_threshold. Survivors come back in visit order, so
    the result is sorted by descending confidence.
    """
    if not 0.0 < iou_threshold < 1.0:
        raise ValueError(f"iou_threshold outside (0,1): {iou_threshold}")
    order = sorted(range(len(detections)), key=lambda i: (-detections[i].confidence, i))
    kept: list[Detection] = []
    for i in order:
        d = detections[i]
        if all(k.class_id != d.class_id or iou(k.box, d.box) < iou_threshold for k in kept):
            kept.append(d)
    return kept
