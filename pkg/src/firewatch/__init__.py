"""Evaluation toolkit for fire and smoke detection pipelines.

Offline pieces: dataset indexing, augmentation, stratified splitting, anchor
clustering, and two evaluation perspectives (box-level detection and
image-level recognition). Online pieces: a line-delimited detection stream
format, temporal evidence smoothing, an alarm state machine, and a replay
harness that benchmarks detection latency against reference alarms.
"""

from .alarm import (
    AlarmConfig,
    AlarmEvent,
    AlarmPhase,
    AlarmState,
    AlarmTimeline,
    ReplayResult,
    Scenario,
    benchmark_latency,
    format_timeline,
    load_scenario,
    replay,
    run_scenario,
    step,
)
from .anchors import (
    AnchorParams,
    AnchorSet,
    ClusterReport,
    collect_wh,
    iou_wh,
    kmeans_anchors,
    per_class_anchors,
)
from .config import GlobalConfig, load_config
from .dataset import (
    AugmentationSpec,
    DatasetIndex,
    LabeledImage,
    SplitSpec,
    augment,
    index_dataset,
    parse_labels,
    serialize_labels,
    split,
    write_manifest,
)
from .detect import (
    DetectorConfig,
    FrameBuffer,
    FrameDetections,
    RetentionGuard,
    format_record,
    load_detection_stream,
    postprocess,
    write_detection_stream,
)
from .errors import (
    AlarmError,
    AnchorError,
    ConfigError,
    DatasetError,
    EvaluationError,
    FirewatchError,
    LabelParseError,
    RetentionError,
    ScenarioError,
    StreamFormatError,
)
from .evaluation import (
    DetectionCounts,
    EvalConfig,
    MetricsReport,
    RecognitionCounts,
    RunReport,
    average_precision,
    evaluate_run,
    match_image,
    percent_summary,
    recognize_image,
    round_percent,
)
from .geometry import BBox, ClassId, Detection, contains, iou, nms
from .temporal import RegionTracker, TemporalConfig, TrackedRegion, TrackerStep, associate, smooth

__version__ = "0.1.0"

__all__ = [
    "AlarmConfig",
    "AlarmError",
    "AlarmEvent",
    "AlarmPhase",
    "AlarmState",
    "AlarmTimeline",
    "AnchorError",
    "AnchorParams",
    "AnchorSet",
    "AugmentationSpec",
    "BBox",
    "ClassId",
    "ClusterReport",
    "ConfigError",
    "DatasetError",
    "DatasetIndex",
    "Detection",
    "DetectionCounts",
    "DetectorConfig",
    "EvalConfig",
    "EvaluationError",
    "FirewatchError",
    "FrameBuffer",
    "FrameDetections",
    "GlobalConfig",
    "LabelParseError",
    "LabeledImage",
    "MetricsReport",
    "RecognitionCounts",
    "RegionTracker",
    "ReplayResult",
    "RetentionError",
    "RetentionGuard",
    "RunReport",
    "Scenario",
    "ScenarioError",
    "SplitSpec",
    "StreamFormatError",
    "TemporalConfig",
    "TrackedRegion",
    "TrackerStep",
    "associate",
    "augment",
    "average_precision",
    "benchmark_latency",
    "collect_wh",
    "contains",
    "evaluate_run",
    "format_record",
    "format_timeline",
    "index_dataset",
    "iou",
    "iou_wh",
    "kmeans_anchors",
    "load_config",
    "load_detection_stream",
    "load_scenario",
    "match_image",
    "nms",
    "parse_labels",
    "per_class_anchors",
    "percent_summary",
    "postprocess",
    "recognize_image",
    "replay",
    "round_percent",
    "run_scenario",
    "serialize_labels",
    "smooth",
    "split",
    "step",
    "write_detection_stream",
    "write_manifest",
]
