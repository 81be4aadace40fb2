"""Export loop: frames in, interchange lines out.

Records carry the same fixed field order as the pipeline's own writer, so an
export is byte-stable across runs and across the two packages. Frames with
no surviving detections still emit a marker line; downstream latency replay
needs the clock tick even when nothing was seen.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .backends import BoxPred, load_backend
from .errors import AdapterError
from .sources import open_source


@dataclass(frozen=True)
class AdapterConfig:
    """Export-run settings.

    The input resolution is the square the backend scales frames to; boxes
    are normalized, so the choice never leaks into the output format.
    """

    weights: str | None = None
    input_resolution: tuple[int, int] = (576, 576)
    conf_floor: float = 0.0
    device: str = "cpu"

    def __post_init__(self) -> None:
        res = self.input_resolution
        if len(res) != 2 or res[0] != res[1] or res[0] <= 0:
            raise ValueError(f"input resolution must be a positive square: {res}")
        if not 0.0 <= self.conf_floor <= 1.0:
            raise ValueError(f"confidence floor outside [0,1]: {self.conf_floor}")
        if not self.device:
            raise ValueError("empty device selector")


@dataclass(frozen=True)
class ExportSummary:
    """Counts from one export run; records = detections + empty-frame markers."""

    frames: int
    detections: int
    records: int

    def format_line(self) -> str:
        return (f"{self.frames} frames, {self.detections} detections, "
                f"{self.records} records")


def format_record(stream_id: str, frame_index: int, timestamp_s: float,
                  pred: BoxPred | None) -> str:
    """One interchange line; field order fixed for byte-stable exports."""
    if pred is None:
        obj = {"stream": stream_id, "frame": frame_index, "t": float(timestamp_s),
               "class": None}
    else:
        obj = {"stream": stream_id, "frame": frame_index, "t": float(timestamp_s),
               "class": pred.label, "conf": pred.confidence,
               "box": [pred.cx, pred.cy, pred.w, pred.h]}
    return json.dumps(obj)


def export_detections(source: str | Path, cfg: AdapterConfig, out: str | Path,
                      *, backend=None, fps: float = 1.0,
                      stream_id: str | None = None) -> ExportSummary:
    """Run the backend over every frame of `source` and write `out`.

    Frames are processed sequentially in source order, so frame indices
    increase strictly and timestamps (index / fps) never decrease; the
    output always satisfies the interchange loader. Detections below
    cfg.conf_floor are dropped before writing. Returns the run's counts.
    """
    if not fps > 0:
        raise AdapterError(f"fps must be positive: {fps}")
    if backend is None:
        backend = load_backend(cfg.weights)
    resolved_id, frames = open_source(source)
    if stream_id is None:
        stream_id = resolved_id

    n_frames = n_dets = n_records = 0
    with open(out, "w", encoding="utf-8") as fp:
        for frame in frames:
            t = frame.index / fps
            kept = [p for p in backend.infer(frame)
                    if p.confidence >= cfg.conf_floor]
            if kept:
                for pred in kept:
                    fp.write(format_record(stream_id, frame.index, t, pred) + "\n")
                n_dets += len(kept)
                n_records += len(kept)
            else:
                fp.write(format_record(stream_id, frame.index, t, None) + "\n")
                n_records += 1
            n_frames += 1
    return ExportSummary(frames=n_frames, detections=n_dets, records=n_records)
