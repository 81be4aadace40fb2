#!/usr/bin/env python3
"""Regenerate the committed replay fixtures under tests/data/.

Two single-stream warehouse scenes at 1 fps. Scene 1 has a one-frame smoke
blip early on (never enough evidence to alarm) and a persistent fire late;
scene 2 is a short clip with an early persistent fire. Reference alarm times
in the scenario files are chosen against the machine-checked detection times.
"""

from __future__ import annotations

import json
from pathlib import Path

from firewatch.detect import FrameDetections, write_detection_stream
from firewatch.geometry import BBox, ClassId, Detection

DATA_DIR = Path(__file__).resolve().parent.parent / "tests" / "data"

FIRE_BOX = BBox(0.6, 0.55, 0.2, 0.3)
FIRE_BOX_SHIFTED = BBox(0.61, 0.55, 0.2, 0.3)  # near-duplicate, culled by NMS
SMOKE_BOX = BBox(0.2, 0.2, 0.1, 0.1)


def scene1() -> list[FrameDetections]:
    frames = []
    for i in range(301):
        t = float(i)
        dets: list[Detection] = []
        if i == 5:  # transient false positive, one frame only
            dets.append(Detection(SMOKE_BOX, ClassId.SMOKE, 0.9))
        if i == 100:  # below the confidence threshold, dropped in postprocess
            dets.append(Detection(SMOKE_BOX, ClassId.SMOKE, 0.2))
        if 258 <= i <= 270:
            dets.append(Detection(FIRE_BOX, ClassId.FIRE, 0.9))
            if i == 260:
                dets.append(Detection(FIRE_BOX_SHIFTED, ClassId.FIRE, 0.85))
        frames.append(FrameDetections("warehouse_scene1", i, t, tuple(dets)))
    return frames


def scene2() -> list[FrameDetections]:
    frames = []
    for i in range(61):
        t = float(i)
        dets: list[Detection] = []
        if 4 <= i <= 20:
            dets.append(Detection(FIRE_BOX, ClassId.FIRE, 0.9))
        frames.append(FrameDetections("warehouse_scene2", i, t, tuple(dets)))
    return frames


SCENARIOS = {
    "warehouse_scene1": {
        "name": "warehouse_scene1",
        "stream": "warehouse_scene1.jsonl",
        "reference": [["ceiling", 275.0]],
    },
    "warehouse_scene2": {
        "name": "warehouse_scene2",
        "stream": "warehouse_scene2.jsonl",
        "reference": [["ceiling_left", 32.0], ["ceiling_right", 43.0]],
    },
}


def main() -> None:
    DATA_DIR.mkdir(parents=True, exist_ok=True)
    for name, frames in (("warehouse_scene1", scene1()), ("warehouse_scene2", scene2())):
        stream_path = DATA_DIR / f"{name}.jsonl"
        with stream_path.open("w", encoding="utf-8") as fp:
            count = write_detection_stream(frames, fp)
        print(f"{stream_path}: {count} records")
        scenario_path = DATA_DIR / f"{name}.json"
        scenario_path.write_text(json.dumps(SCENARIOS[name], indent=2) + "\n",
                                 encoding="utf-8")
        print(f"{scenario_path}")


if __name__ == "__main__":
    main()
