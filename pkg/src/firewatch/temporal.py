"""Multi-frame region tracking and confidence smoothing.

Detections are associated to persistent regions greedily by IoU; each
region's evidence is a windowed average of its per-frame confidences where
frames without a detection contribute zero. Evidence arithmetic is exact
(rational) internally so replay results are reproducible bit for bit.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .detect import FrameDetections
from .geometry import BBox, ClassId, Detection, iou


@dataclass(frozen=True)
class TemporalConfig:
    window: int = 10
    assoc_iou: float = 0.3
    miss_limit: int = 5
    decay: float = 1.0

    def __post_init__(self) -> None:
        if self.window < 1:
            raise ValueError(f"window must be >= 1, got {self.window}")
        if not 0.0 < self.assoc_iou < 1.0:
            raise ValueError(f"assoc_iou outside (0,1): {self.assoc_iou}")
        if self.miss_limit < 0:
            raise ValueError(f"miss_limit must be >= 0, got {self.miss_limit}")
        if not 0.0 < self.decay <= 1.0:
            raise ValueError(f"decay outside (0,1]: {self.decay}")


@dataclass(frozen=True)
class TrackedRegion:
    """Immutable snapshot of one tracked region, safe to hand downstream."""

    region_id: int
    class_id: ClassId
    box: BBox
    evidence: float
    frames_seen: int
    frames_missed: int
    born_at: float


@dataclass(frozen=True)
class TrackerStep:
    frame_index: int
    timestamp_s: float
    regions: tuple[TrackedRegion, ...]
    retired: tuple[TrackedRegion, ...]


def smooth(history: Sequence[float | Fraction], cfg: TemporalConfig) -> float:
    """Windowed average of per-frame confidences; absent frames count zero.

    The divisor is always the full window, so a single-frame spike can never
    exceed spike/window. With decay < 1 the weights fall off geometrically
    with age, normalized over the window.
    """
    recent = list(history)[-cfg.window:]
    if cfg.decay == 1.0:
        total = sum((Fraction(v) for v in recent), Fraction(0))
        return float(total / cfg.window)
    decay = Fraction(cfg.decay)
    numerator = Fraction(0)
    denominator = Fraction(0)
    for age in range(cfg.window):
        weight = decay ** age
        denominator += weight
        idx = len(recent) - 1 - age
        if idx >= 0:
            numerator += weight * Fraction(recent[idx])
    return float(numerator / denominator)


def associate(regions: Sequence, detections: Sequence[Detection],
              assoc_iou: float) -> tuple[list[tuple[int, int, float]], list[int], list[int]]:
    """Greedy same-class matching of detections to regions by descending IoU.

    Returns (pairs, unmatched region indices, unmatched detection indices);
    each region and each detection is used at most once. Ties are broken by
    region position, then detection position, so the result is deterministic.
    """
    candidates = []
    for ri, region in enumerate(regions):
        for di, det in enumerate(detections):
            if det.class_id != region.class_id:
                continue
            overlap = iou(region.box, det.box)
            if overlap >= assoc_iou:
                candidates.append((overlap, ri, di))
    candidates.sort(key=lambda c: (-c[0], c[1], c[2]))
    used_regions: set[int] = set()
    used_dets: set[int] = set()
    pairs = []
    for overlap, ri, di in candidates:
        if ri in used_regions or di in used_dets:
            continue
        pairs.append((ri, di, overlap))
        used_regions.add(ri)
        used_dets.add(di)
    unmatched_regions = [i for i in range(len(regions)) if i not in used_regions]
    unmatched_dets = [i for i in range(len(detections)) if i not in used_dets]
    return pairs, unmatched_regions, unmatched_dets


class _Region:
    __slots__ = ("region_id", "class_id", "box", "history", "frames_seen",
                 "frames_missed", "born_at", "evidence")

    def __init__(self, region_id: int, det: Detection, window: int, born_at: float):
        self.region_id = region_id
        self.class_id = det.class_id
        self.box = det.box
        self.history: deque = deque(maxlen=window)
        self.history.append(Fraction(det.confidence))
        self.frames_seen = 1
        self.frames_missed = 0
        self.born_at = born_at
        self.evidence = 0.0

    def snapshot(self) -> TrackedRegion:
        return TrackedRegion(self.region_id, self.class_id, self.box, self.evidence,
                             self.frames_seen, self.frames_missed, self.born_at)


class RegionTracker:
    """Tracks detection regions of one stream across frames.

    update() must be fed frames in order; region ids are assigned in
    detection order, so identical inputs give identical outputs, ids
    included.
    """

    def __init__(self, cfg: TemporalConfig):
        self.cfg = cfg
        self._regions: list[_Region] = []
        self._next_id = 1

    @property
    def regions(self) -> tuple[TrackedRegion, ...]:
        return tuple(r.snapshot() for r in self._regions)

    def update(self, frame: FrameDetections) -> TrackerStep:
        cfg = self.cfg
        detections = frame.detections
        pairs, missed, unmatched = associate(self._regions, detections, cfg.assoc_iou)
        for ri, di, _ in pairs:
            region = self._regions[ri]
            det = detections[di]
            region.box = det.box
            region.frames_seen += 1
            region.frames_missed = 0
            region.history.append(Fraction(det.confidence))
        for ri in missed:
            region = self._regions[ri]
            region.frames_missed += 1
            region.history.append(Fraction(0))
        for di in unmatched:
            region = _Region(self._next_id, detections[di], cfg.window, frame.timestamp_s)
            self._next_id += 1
            self._regions.append(region)
        survivors: list[_Region] = []
        retired: list[TrackedRegion] = []
        for region in self._regions:
            region.evidence = smooth(region.history, cfg)
            if region.frames_missed > cfg.miss_limit:
                retired.append(region.snapshot())
            else:
                survivors.append(region)
        self._regions = survivors
        return TrackerStep(
            frame_index=frame.frame_index,
            timestamp_s=frame.timestamp_s,
            regions=tuple(r.snapshot() for r in survivors),
            retired=tuple(retired),
        )


def format_trace_record(stream_id: str, frame_index: int, region: TrackedRegion) -> str:
    """One region-trace log line; field order is fixed."""
    return json.dumps({
        "stream": stream_id,
        "frame": frame_index,
        "region_id": region.region_id,
        "class": region.class_id.label,
        "evidence": region.evidence,
    })
