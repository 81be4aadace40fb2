"""Detection interchange IO, post-processing and the frame-retention guard.

The interchange format is line-delimited JSON, one detection per line:

    {"stream": "cam1", "frame": 17, "t": 0.68, "class": "fire", "conf": 0.82, "box": [0.41, 0.33, 0.10, 0.17]}

Records for the same (stream, frame) must be consecutive. A frame with no
detections is either omitted entirely or written as an explicit marker with
`"class": null` and no conf/box. Field order is fixed as above so exported
files are byte-stable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import IO, Iterable, Iterator

import numpy as np

from .errors import RetentionError, StreamFormatError
from .geometry import DEFAULT_NMS_IOU, BBox, ClassId, Detection, nms

DEFAULT_INPUT_RESOLUTION = (576, 576)
_RECORD_FIELDS = ("stream", "frame", "t", "class", "conf", "box")
_MARKER_FIELDS = ("stream", "frame", "t", "class")


@dataclass(frozen=True)
class FrameDetections:
    """All detections of one frame; carries no pixel payload by design."""

    stream_id: str
    frame_index: int
    timestamp_s: float
    detections: tuple[Detection, ...]


@dataclass(frozen=True)
class DetectorConfig:
    confidence_threshold: float = 0.25
    nms_iou: float = DEFAULT_NMS_IOU
    input_resolution: tuple[int, int] = DEFAULT_INPUT_RESOLUTION

    def __post_init__(self) -> None:
        if not 0.0 <= self.confidence_threshold <= 1.0:
            raise ValueError(f"confidence_threshold outside [0,1]: {self.confidence_threshold}")
        if not 0.0 < self.nms_iou < 1.0:
            raise ValueError(f"nms_iou outside (0,1): {self.nms_iou}")
        if len(self.input_resolution) != 2 or any(v < 1 for v in self.input_resolution):
            raise ValueError(f"bad input_resolution: {self.input_resolution}")


def _require(condition: bool, lineno: int, message: str) -> None:
    if not condition:
        raise StreamFormatError(f"line {lineno}: {message}")


def _parse_record(obj, lineno: int):
    _require(isinstance(obj, dict), lineno, "record is not an object")
    _require("class" in obj, lineno, "missing field 'class'")
    expected = _MARKER_FIELDS if obj["class"] is None else _RECORD_FIELDS
    missing = sorted(set(expected) - set(obj))
    _require(not missing, lineno, f"missing fields {missing}")
    extra = sorted(set(obj) - set(expected))
    _require(not extra, lineno, f"unexpected fields {extra}")

    stream = obj["stream"]
    _require(isinstance(stream, str) and stream != "", lineno, "'stream' must be a non-empty string")
    frame = obj["frame"]
    _require(isinstance(frame, int) and not isinstance(frame, bool) and frame >= 0,
             lineno, f"'frame' must be a non-negative integer, got {frame!r}")
    t = obj["t"]
    _require(isinstance(t, (int, float)) and not isinstance(t, bool) and t >= 0,
             lineno, f"'t' must be a non-negative number, got {t!r}")

    if obj["class"] is None:
        return stream, frame, float(t), None

    _require(isinstance(obj["class"], str), lineno, f"'class' must be a string or null, got {obj['class']!r}")
    try:
        class_id = ClassId.from_label(obj["class"])
    except ValueError as exc:
        raise StreamFormatError(f"line {lineno}: {exc}") from None
    conf = obj["conf"]
    _require(isinstance(conf, (int, float)) and not isinstance(conf, bool),
             lineno, f"'conf' must be a number, got {conf!r}")
    _require(0.0 <= conf <= 1.0, lineno, f"'conf' outside [0,1]: {conf}")
    box = obj["box"]
    _require(isinstance(box, list) and len(box) == 4
             and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in box),
             lineno, f"'box' must be a list of 4 numbers, got {box!r}")
    try:
        bbox = BBox(*(float(v) for v in box))
    except ValueError as exc:
        raise StreamFormatError(f"line {lineno}: {exc}") from None
    return stream, frame, float(t), Detection(bbox, class_id, float(conf))


def _parse_stream(lines: Iterable[str]) -> Iterator[FrameDetections]:
    pending_key = None          # (stream, frame)
    pending_t = 0.0
    pending_dets: list[Detection] = []
    pending_marker = False
    last_seen: dict[str, tuple[int, float]] = {}

    def flush() -> FrameDetections:
        stream, frame = pending_key
        return FrameDetections(stream, frame, pending_t, tuple(pending_dets))

    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise StreamFormatError(f"line {lineno}: invalid JSON: {exc}") from None
        stream, frame, t, det = _parse_record(obj, lineno)

        if pending_key == (stream, frame):
            _require(not pending_marker, lineno,
                     f"frame {frame} of stream {stream!r} mixes an empty-frame marker with other records")
            _require(det is not None, lineno,
                     f"frame {frame} of stream {stream!r} mixes detections with an empty-frame marker")
            _require(t == pending_t, lineno,
                     f"frame {frame} of stream {stream!r} has inconsistent timestamps ({pending_t} vs {t})")
            pending_dets.append(det)
            continue

        if pending_key is not None:
            yield flush()
        last = last_seen.get(stream)
        if last is not None:
            last_frame, last_t = last
            _require(frame > last_frame, lineno,
                     f"frame {frame} out of order for stream {stream!r} (last was {last_frame})")
            _require(t >= last_t, lineno,
                     f"timestamp {t} decreases for stream {stream!r} (last was {last_t})")
        last_seen[stream] = (frame, t)
        pending_key = (stream, frame)
        pending_t = t
        pending_dets = [det] if det is not None else []
        pending_marker = det is None

    if pending_key is not None:
        yield flush()


def load_detection_stream(source: str | Path | IO[str] | Iterable[str]) -> Iterator[FrameDetections]:
    """Yield FrameDetections from an interchange file, path or line iterable.

    Enforces the format contract: strictly increasing frame indices and
    non-decreasing timestamps per stream, consecutive records per frame,
    and full schema validation with the offending line number in errors.
    """
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fp:
            yield from _parse_stream(fp)
    else:
        yield from _parse_stream(source)


def format_record(stream_id: str, frame_index: int, timestamp_s: float,
                  detection: Detection | None) -> str:
    """One interchange line; field order fixed for byte-stable exports."""
    if detection is None:
        obj = {"stream": stream_id, "frame": frame_index, "t": float(timestamp_s),
               "class": None}
    else:
        box = detection.box
        obj = {"stream": stream_id, "frame": frame_index, "t": float(timestamp_s),
               "class": detection.class_id.label, "conf": detection.confidence,
               "box": [box.cx, box.cy, box.w, box.h]}
    return json.dumps(obj)


def write_detection_stream(frames: Iterable[FrameDetections], fp: IO[str]) -> int:
    """Write frames as interchange lines; empty frames get an explicit marker.

    Returns the number of records written.
    """
    count = 0
    for frame in frames:
        if frame.detections:
            for det in frame.detections:
                fp.write(format_record(frame.stream_id, frame.frame_index,
                                       frame.timestamp_s, det) + "\n")
                count += 1
        else:
            fp.write(format_record(frame.stream_id, frame.frame_index,
                                   frame.timestamp_s, None) + "\n")
            count += 1
    return count


def postprocess(frame: FrameDetections, cfg: DetectorConfig) -> FrameDetections:
    """Confidence filter, then class-aware NMS; frame metadata unchanged."""
    kept = [d for d in frame.detections if d.confidence >= cfg.confidence_threshold]
    return replace(frame, detections=tuple(nms(kept, cfg.nms_iou)))


class FrameBuffer:
    """A frame's pixel payload with enforced disposal.

    Downstream stages receive only FrameDetections; any attempt to read the
    pixels after release() faults instead of silently keeping imagery alive.
    """

    __slots__ = ("_payload", "_guard", "_stream_id", "_disposed")

    def __init__(self, payload, guard: "RetentionGuard", stream_id: str) -> None:
        self._payload = payload
        self._guard = guard
        self._stream_id = stream_id
        self._disposed = False

    @property
    def pixels(self):
        if self._disposed:
            raise RetentionError("frame payload already disposed")
        return self._payload

    @property
    def disposed(self) -> bool:
        return self._disposed

    def release(self) -> None:
        """Zero the payload where possible and drop the reference."""
        if self._disposed:
            return
        payload = self._payload
        if isinstance(payload, bytearray):
            payload[:] = bytes(len(payload))
        elif isinstance(payload, np.ndarray):
            payload.fill(0)
        self._payload = None
        self._disposed = True
        self._guard._on_release(self._stream_id)


class RetentionGuard:
    """Audits in-flight frame payloads per stream.

    window is the maximum number of simultaneously retained frames per
    stream. In strict mode exceeding it is a hard fault; otherwise it is
    counted in `violations`. `high_water_mark` records the maximum number
    of frames retained at once across all streams.
    """

    def __init__(self, window: int = 1, strict: bool = True) -> None:
        if window < 1:
            raise ValueError(f"window must be >= 1, got {window}")
        self._window = window
        self._strict = strict
        self._live: dict[str, int] = {}
        self.high_water_mark = 0
        self.violations = 0

    @property
    def in_flight(self) -> int:
        return sum(self._live.values())

    def admit(self, stream_id: str, payload) -> FrameBuffer:
        live = self._live.get(stream_id, 0)
        if live + 1 > self._window:
            if self._strict:
                raise RetentionError(
                    f"stream {stream_id!r}: {live + 1} frames in flight exceeds retention window {self._window}"
                )
            self.violations += 1
        self._live[stream_id] = live + 1
        self.high_water_mark = max(self.high_water_mark, self.in_flight)
        return FrameBuffer(payload, self, stream_id)

    def _on_release(self, stream_id: str) -> None:
        self._live[stream_id] -= 1
