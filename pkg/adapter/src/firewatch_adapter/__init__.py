"""Detector export adapter for the fire/smoke evaluation pipeline.

Runs a detection backend over an image directory or synthetic frame source
and writes the line-delimited detection interchange format the pipeline
consumes. The only coupling to the pipeline is that file format; nothing
here imports it.
"""

from .backends import LABELS, BoxPred, StubBackend, load_backend
from .errors import AdapterError, BackendError, SourceError
from .export import AdapterConfig, ExportSummary, export_detections, format_record
from .sources import Frame, open_source

__version__ = "0.1.0"

__all__ = [
    "AdapterConfig",
    "AdapterError",
    "BackendError",
    "BoxPred",
    "ExportSummary",
    "Frame",
    "LABELS",
    "SourceError",
    "StubBackend",
    "export_detections",
    "format_record",
    "load_backend",
    "open_source",
]
