"""Round-trip acceptance: adapter exports feed the pipeline loader.

One pinned criterion: a 100-frame synthetic stub export is accepted by the
pipeline's strict loader with zero schema errors, frame indices increase
strictly, and both a second export and the pipeline's own re-serialization
are byte-identical to the first file. The pipeline import below is the test
suite's only, deliberate, coupling; the adapter runtime never imports it.
"""

import io

from firewatch.detect import load_detection_stream, write_detection_stream

from firewatch_adapter.backends import StubBackend
from firewatch_adapter.export import AdapterConfig, export_detections


def test_round_trip_loads_cleanly_and_reexports_identically(criterion, tmp_path):
    with criterion("adapter round-trip: 100-frame stub export loads with zero "
                   "schema errors, frames strictly increasing, re-export "
                   "byte-identical"):
        first = tmp_path / "first.jsonl"
        second = tmp_path / "second.jsonl"
        summary = export_detections("synthetic:100", AdapterConfig(), first,
                                    backend=StubBackend(), fps=25.0)
        assert summary.frames == 100

        frames = list(load_detection_stream(first))  # raises on any schema error
        assert len(frames) == 100
        indices = [frame.frame_index for frame in frames]
        assert all(b > a for a, b in zip(indices, indices[1:]))
        assert sum(len(frame.detections) for frame in frames) == summary.detections

        export_detections("synthetic:100", AdapterConfig(), second,
                          backend=StubBackend(), fps=25.0)
        assert second.read_bytes() == first.read_bytes()
        assert len(first.read_bytes()) > 0

        # the pipeline's own writer reproduces the adapter's bytes exactly
        buffer = io.StringIO()
        write_detection_stream(frames, buffer)
        assert buffer.getvalue().encode() == first.read_bytes()
