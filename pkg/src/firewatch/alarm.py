"""Alarm state machine over tracked-region evidence, plus the replay harness
used to benchmark camera detection latency against reference alarms.

IDLE -> SUSPECT on the first qualifying frame (any enabled class whose best
region evidence reaches the threshold), SUSPECT -> ALARM after hold_frames
consecutive qualifying frames, SUSPECT -> IDLE on a miss. ALARM latches until
an explicit reset. The reported detection time is the SUSPECT entry, not the
escalation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .detect import DetectorConfig, RetentionGuard, load_detection_stream, postprocess
from .errors import AlarmError, ConfigError, ScenarioError
from .geometry import ClassId
from .temporal import RegionTracker, TemporalConfig, TrackedRegion, format_trace_record
from .util import apply_overrides


class AlarmPhase(Enum):
    IDLE = "idle"
    SUSPECT = "suspect"
    ALARM = "alarm"


@dataclass(frozen=True)
class AlarmConfig:
    evidence_threshold: float = 0.5
    hold_frames: int = 3
    enabled_classes: frozenset[ClassId] = frozenset(ClassId)

    def __post_init__(self) -> None:
        if not 0.0 < self.evidence_threshold < 1.0:
            raise ValueError(f"evidence_threshold outside (0,1): {self.evidence_threshold}")
        if self.hold_frames < 1:
            raise ValueError(f"hold_frames must be >= 1, got {self.hold_frames}")


@dataclass(frozen=True)
class AlarmState:
    state: AlarmPhase = AlarmPhase.IDLE
    since: float = 0.0
    triggering_class: ClassId | None = None
    qualifying_frames: int = 0
    last_t: float = float("-inf")


@dataclass(frozen=True)
class AlarmEvent:
    t: float
    transition: str  # "suspect_entered" | "suspect_cleared" | "alarm_raised"
    class_id: ClassId | None
    evidence: float
    detection_time_s: float | None = None


def reset() -> AlarmState:
    """Fresh IDLE state; the only way out of a latched ALARM."""
    return AlarmState()


def _best_evidence(regions: Sequence[TrackedRegion],
                   cfg: AlarmConfig) -> tuple[ClassId | None, float]:
    best_class, best = None, 0.0
    for region in regions:
        if region.class_id not in cfg.enabled_classes:
            continue
        # ties go to the lower class id for determinism
        if best_class is None or region.evidence > best or (
            region.evidence == best and region.class_id < best_class
        ):
            best_class, best = region.class_id, region.evidence
    return best_class, best


def step(state: AlarmState, regions: Sequence[TrackedRegion], t: float,
         cfg: AlarmConfig) -> tuple[AlarmState, AlarmEvent | None]:
    """Advance the state machine by one frame at timestamp t.

    Returns the new state and at most one transition event. Feeding a
    timestamp older than the previous frame is an error.
    """
    if t < state.last_t:
        raise AlarmError(f"time regression: {t} < {state.last_t}")

    if state.state is AlarmPhase.ALARM:
        return replace(state, last_t=t), None

    best_class, best = _best_evidence(regions, cfg)
    qualifying = best_class is not None and best >= cfg.evidence_threshold

    if state.state is AlarmPhase.IDLE:
        if not qualifying:
            return replace(state, last_t=t), None
        suspect = AlarmState(AlarmPhase.SUSPECT, since=t, triggering_class=best_class,
                             qualifying_frames=1, last_t=t)
        if cfg.hold_frames == 1:
            alarm = replace(suspect, state=AlarmPhase.ALARM, since=t)
            return alarm, AlarmEvent(t, "alarm_raised", best_class, best, detection_time_s=t)
        return suspect, AlarmEvent(t, "suspect_entered", best_class, best)

    # SUSPECT
    if not qualifying:
        cleared = AlarmState(AlarmPhase.IDLE, since=t, last_t=t)
        return cleared, AlarmEvent(t, "suspect_cleared", state.triggering_class, best)
    count = state.qualifying_frames + 1
    if count >= cfg.hold_frames:
        alarm = AlarmState(AlarmPhase.ALARM, since=t,
                           triggering_class=state.triggering_class,
                           qualifying_frames=count, last_t=t)
        return alarm, AlarmEvent(t, "alarm_raised", state.triggering_class, best,
                                 detection_time_s=state.since)
    return replace(state, qualifying_frames=count, last_t=t), None


@dataclass(frozen=True)
class AlarmTimeline:
    """Camera detection time versus reference alarm activations, in seconds."""

    camera_alarm_s: float | None
    reference_alarms: tuple[tuple[str, float], ...]
    gains: tuple[tuple[str, float], ...]

    @property
    def detected(self) -> bool:
        return self.camera_alarm_s is not None


def benchmark_latency(events: Iterable[AlarmEvent],
                      reference: Sequence[tuple[str, float]]) -> AlarmTimeline:
    """Gain per reference alarm: reference activation minus camera detection.

    A negative gain means the reference fired first. With no camera alarm the
    timeline reports not-detected and carries no gains.
    """
    detection_time = None
    for event in events:
        if event.transition == "alarm_raised":
            detection_time = event.detection_time_s
            break
    refs = tuple((str(label), float(t)) for label, t in reference)
    if detection_time is None:
        return AlarmTimeline(camera_alarm_s=None, reference_alarms=refs, gains=())
    gains = tuple((label, t - detection_time) for label, t in refs)
    return AlarmTimeline(camera_alarm_s=detection_time, reference_alarms=refs, gains=gains)


def format_timeline(timeline: AlarmTimeline) -> str:
    """Human-readable timeline with millisecond precision."""
    if timeline.detected:
        lines = [f"camera detection: {timeline.camera_alarm_s:.3f} s"]
    else:
        lines = ["camera detection: not detected"]
    gains = dict(timeline.gains)
    for label, t in timeline.reference_alarms:
        line = f"reference[{label}]: {t:.3f} s"
        if label in gains:
            line += f"  gain: {gains[label]:.3f} s"
        lines.append(line)
    return "\n".join(lines)


def format_event_line(stream_id: str, event: AlarmEvent) -> str:
    """One event-log line; field order is fixed."""
    obj = {
        "t": float(event.t),
        "stream": stream_id,
        "transition": event.transition,
        "class": event.class_id.label if event.class_id is not None else None,
        "evidence": event.evidence,
    }
    if event.detection_time_s is not None:
        obj["detection_time"] = float(event.detection_time_s)
    return json.dumps(obj)


@dataclass(frozen=True)
class Scenario:
    """A replayable experiment: detection stream, references, config overrides."""

    name: str
    stream_path: Path
    reference: tuple[tuple[str, float], ...]
    detector: DetectorConfig
    temporal: TemporalConfig
    alarm: AlarmConfig


_SCENARIO_KEYS = {"name", "stream", "reference", "detector", "temporal", "alarm"}


def _coerce_alarm_overrides(overrides: Mapping) -> dict:
    data = dict(overrides)
    if "enabled_classes" in data:
        labels = data["enabled_classes"]
        if not isinstance(labels, (list, tuple)):
            raise ScenarioError(f"enabled_classes must be a list, got {labels!r}")
        try:
            data["enabled_classes"] = frozenset(ClassId.from_label(v) for v in labels)
        except ValueError as exc:
            raise ScenarioError(str(exc)) from None
    return data


def load_scenario(path: Path | str,
                  detector: DetectorConfig | None = None,
                  temporal: TemporalConfig | None = None,
                  alarm: AlarmConfig | None = None) -> Scenario:
    """Load a scenario document (JSON).

    `stream` is resolved relative to the scenario file. The optional
    detector/temporal/alarm sections override the provided (or default)
    configs field by field; unknown keys anywhere are an error.
    """
    path = Path(path)
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioError(f"{path}: {exc}") from exc
    if not isinstance(obj, dict):
        raise ScenarioError(f"{path}: scenario must be an object")
    unknown = sorted(set(obj) - _SCENARIO_KEYS)
    if unknown:
        raise ScenarioError(f"{path}: unknown keys {unknown}")
    if not isinstance(obj.get("stream"), str) or not obj["stream"]:
        raise ScenarioError(f"{path}: 'stream' must be a non-empty path string")
    reference_raw = obj.get("reference", [])
    if not isinstance(reference_raw, list):
        raise ScenarioError(f"{path}: 'reference' must be a list of [label, seconds]")
    reference = []
    for item in reference_raw:
        if (not isinstance(item, (list, tuple)) or len(item) != 2
                or not isinstance(item[0], str)
                or not isinstance(item[1], (int, float)) or isinstance(item[1], bool)):
            raise ScenarioError(f"{path}: bad reference entry {item!r}")
        reference.append((item[0], float(item[1])))
    stream_path = Path(obj["stream"])
    if not stream_path.is_absolute():
        stream_path = path.parent / stream_path
    try:
        detector_cfg = apply_overrides(detector or DetectorConfig(), obj.get("detector"), "detector")
        temporal_cfg = apply_overrides(temporal or TemporalConfig(), obj.get("temporal"), "temporal")
        alarm_overrides = obj.get("alarm")
        if alarm_overrides:
            alarm_overrides = _coerce_alarm_overrides(alarm_overrides)
        alarm_cfg = apply_overrides(alarm or AlarmConfig(), alarm_overrides, "alarm")
    except (ConfigError, ValueError) as exc:
        raise ScenarioError(f"{path}: {exc}") from exc
    return Scenario(
        name=str(obj.get("name", path.stem)),
        stream_path=stream_path,
        reference=tuple(reference),
        detector=detector_cfg,
        temporal=temporal_cfg,
        alarm=alarm_cfg,
    )


@dataclass(frozen=True)
class ReplayResult:
    timeline: AlarmTimeline
    events: tuple[tuple[str, AlarmEvent], ...]
    log_lines: tuple[str, ...]
    trace_lines: tuple[str, ...]
    frames: int
    high_water_mark: int


def replay(stream_source, detector: DetectorConfig, temporal: TemporalConfig,
           alarm: AlarmConfig, reference: Sequence[tuple[str, float]] = (),
           strict_retention: bool = True, collect_trace: bool = False) -> ReplayResult:
    """Deterministic detect -> temporal -> alarm run over an interchange stream.

    A stand-in frame payload is pushed through the retention guard for every
    frame so the disposal contract is exercised and audited during replay;
    pixels never reach the temporal stage.
    """
    guard = RetentionGuard(window=1, strict=strict_retention)
    trackers: dict[str, RegionTracker] = {}
    states: dict[str, AlarmState] = {}
    events: list[tuple[str, AlarmEvent]] = []
    log_lines: list[str] = []
    trace_lines: list[str] = []
    frames = 0
    for frame in load_detection_stream(stream_source):
        frames += 1
        buffer = guard.admit(frame.stream_id, bytearray(64))
        processed = postprocess(frame, detector)
        buffer.release()  # pixels never outlive the detection stage
        tracker = trackers.setdefault(frame.stream_id, RegionTracker(temporal))
        step_result = tracker.update(processed)
        if collect_trace:
            for region in step_result.regions:
                trace_lines.append(format_trace_record(frame.stream_id,
                                                       frame.frame_index, region))
        state = states.get(frame.stream_id, AlarmState())
        state, event = step(state, step_result.regions, frame.timestamp_s, alarm)
        states[frame.stream_id] = state
        if event is not None:
            events.append((frame.stream_id, event))
            log_lines.append(format_event_line(frame.stream_id, event))
    timeline = benchmark_latency((event for _, event in events), reference)
    return ReplayResult(
        timeline=timeline,
        events=tuple(events),
        log_lines=tuple(log_lines),
        trace_lines=tuple(trace_lines),
        frames=frames,
        high_water_mark=guard.high_water_mark,
    )


def run_scenario(scenario: Scenario, strict_retention: bool = True,
                 collect_trace: bool = False) -> ReplayResult:
    return replay(scenario.stream_path, scenario.detector, scenario.temporal,
                  scenario.alarm, scenario.reference,
                  strict_retention=strict_retention, collect_trace=collect_trace)
