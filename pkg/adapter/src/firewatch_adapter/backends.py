"""Detection backends.

Only the deterministic stub ships with this package: it keeps the export
contract testable without weights or an inference runtime. Selecting real
weights fails cleanly rather than guessing at a runtime.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .errors import BackendError
from .sources import Frame

LABELS = ("fire", "smoke")


@dataclass(frozen=True)
class BoxPred:
    """One detector output in normalized image coordinates.

    Mirrors the interchange constraints so a bad backend fails at the
    prediction, not in the downstream loader: centers in [0,1], sizes in
    (0,1], confidence in [0,1].
    """

    label: str
    confidence: float
    cx: float
    cy: float
    w: float
    h: float

    def __post_init__(self) -> None:
        if self.label not in LABELS:
            raise ValueError(f"unknown class label {self.label!r}")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence outside [0,1]: {self.confidence}")
        if not (0.0 <= self.cx <= 1.0 and 0.0 <= self.cy <= 1.0):
            raise ValueError(f"box center outside [0,1]: ({self.cx}, {self.cy})")
        if not (0.0 < self.w <= 1.0 and 0.0 < self.h <= 1.0):
            raise ValueError(f"box size outside (0,1]: ({self.w}, {self.h})")


class StubBackend:
    """Deterministic stand-in for a real detector.

    With a script, frame index i replays script[i] and indices missing from
    the script come back empty. Without one, every frame gets a flame box
    drifting right with cycling confidence, plus a wider smoke box on every
    third frame. Both modes are pure functions of the frame index, so
    repeated exports over the same source are byte-identical.
    """

    def __init__(self, script: Mapping[int, Sequence[BoxPred]] | None = None):
        self._script = (None if script is None
                        else {int(k): tuple(v) for k, v in script.items()})

    def infer(self, frame: Frame) -> tuple[BoxPred, ...]:
        if self._script is not None:
            return self._script.get(frame.index, ())
        i = frame.index
        preds = [BoxPred("fire", 0.5 + (i % 40) * 0.01,
                         0.2 + (i % 50) * 0.01, 0.5, 0.1, 0.15)]
        if i % 3 == 0:
            preds.append(BoxPred("smoke", 0.35 + (i % 25) * 0.02,
                                 0.6, 0.3 + (i % 30) * 0.01, 0.2, 0.25))
        return tuple(preds)


def load_backend(weights: str | Path | None, stub: bool = False):
    """Pick the backend for an export run.

    `stub=True` wins unconditionally; otherwise weights must name an existing
    file, and even then there is no bundled runtime to load them into.
    """
    if stub:
        return StubBackend()
    if weights is None:
        raise BackendError("no weights given; pass --stub for the scripted backend")
    path = Path(weights)
    if not path.is_file():
        raise BackendError(f"weights not found: {path}")
    raise BackendError(f"no inference runtime bundled for {path.name}; "
                       "install one or use --stub")
