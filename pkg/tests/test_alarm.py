import json
from pathlib import Path

import pytest

from firewatch.alarm import (
    AlarmConfig,
    AlarmEvent,
    AlarmPhase,
    AlarmState,
    Scenario,
    benchmark_latency,
    format_event_line,
    format_timeline,
    load_scenario,
    replay,
    reset,
    run_scenario,
    step,
)
from firewatch.detect import DetectorConfig
from firewatch.errors import AlarmError, ScenarioError
from firewatch.geometry import BBox, ClassId
from firewatch.temporal import TemporalConfig, TrackedRegion

DATA = Path(__file__).parent / "data"
BOX = BBox(0.5, 0.5, 0.2, 0.2)


def _region(class_id=ClassId.FIRE, evidence=0.9, region_id=1):
    return TrackedRegion(region_id=region_id, class_id=class_id, box=BOX,
                         evidence=evidence, frames_seen=3, frames_missed=0,
                         born_at=0.0)


def test_alarm_config_validation():
    with pytest.raises(ValueError):
        AlarmConfig(evidence_threshold=0.0)
    with pytest.raises(ValueError):
        AlarmConfig(evidence_threshold=1.0)
    with pytest.raises(ValueError):
        AlarmConfig(hold_frames=0)


def test_step_stays_idle_without_evidence():
    cfg = AlarmConfig()
    state, event = step(AlarmState(), [], 4.0, cfg)
    assert state.state is AlarmPhase.IDLE
    assert state.last_t == 4.0
    assert event is None


def test_step_escalates_after_hold_frames():
    cfg = AlarmConfig(evidence_threshold=0.5, hold_frames=3)
    state = AlarmState()
    state, event = step(state, [_region(evidence=0.6)], 10.0, cfg)
    assert state.state is AlarmPhase.SUSPECT
    assert event == AlarmEvent(10.0, "suspect_entered", ClassId.FIRE, 0.6)

    state, event = step(state, [_region(evidence=0.7)], 11.0, cfg)
    assert state.state is AlarmPhase.SUSPECT
    assert state.qualifying_frames == 2
    assert event is None

    state, event = step(state, [_region(evidence=0.8)], 12.0, cfg)
    assert state.state is AlarmPhase.ALARM
    assert event.transition == "alarm_raised"
    # detection time is the suspect entry, not the escalation
    assert event.detection_time_s == 10.0
    assert event.t == 12.0


def test_step_suspect_clears_on_miss():
    cfg = AlarmConfig(hold_frames=3)
    state, _ = step(AlarmState(), [_region(evidence=0.9)], 0.0, cfg)
    state, event = step(state, [], 1.0, cfg)
    assert state.state is AlarmPhase.IDLE
    assert event.transition == "suspect_cleared"
    assert event.class_id is ClassId.FIRE
    # a later qualifying frame starts a fresh count
    state, event = step(state, [_region(evidence=0.9)], 2.0, cfg)
    assert event.transition == "suspect_entered"
    assert state.qualifying_frames == 1


def test_alarm_latches_until_reset():
    cfg = AlarmConfig(hold_frames=1)
    state, event = step(AlarmState(), [_region()], 0.0, cfg)
    assert state.state is AlarmPhase.ALARM
    for t in (1.0, 2.0, 3.0):
        state, event = step(state, [], t, cfg)
        assert state.state is AlarmPhase.ALARM
        assert event is None
    fresh = reset()
    assert fresh.state is AlarmPhase.IDLE
    assert fresh.qualifying_frames == 0


def test_hold_frames_one_raises_immediately():
    cfg = AlarmConfig(hold_frames=1)
    state, event = step(AlarmState(), [_region(evidence=0.6)], 7.0, cfg)
    assert state.state is AlarmPhase.ALARM
    assert event.transition == "alarm_raised"
    assert event.detection_time_s == 7.0


def test_step_rejects_time_regression():
    cfg = AlarmConfig()
    state, _ = step(AlarmState(), [], 5.0, cfg)
    with pytest.raises(AlarmError):
        step(state, [], 4.9, cfg)
    # an equal timestamp is fine (duplicate-rate sources)
    step(state, [], 5.0, cfg)


def test_step_ignores_disabled_classes():
    cfg = AlarmConfig(hold_frames=1, enabled_classes=frozenset({ClassId.FIRE}))
    state, event = step(AlarmState(), [_region(ClassId.SMOKE, 0.99)], 0.0, cfg)
    assert state.state is AlarmPhase.IDLE
    assert event is None
    state, event = step(state, [_region(ClassId.FIRE, 0.6)], 1.0, cfg)
    assert event.transition == "alarm_raised"
    assert event.class_id is ClassId.FIRE


def test_step_evidence_tie_prefers_lower_class_id():
    cfg = AlarmConfig(hold_frames=1)
    regions = [_region(ClassId.SMOKE, 0.7, region_id=1),
               _region(ClassId.FIRE, 0.7, region_id=2)]
    _, event = step(AlarmState(), regions, 0.0, cfg)
    assert event.class_id is ClassId.FIRE


def test_step_threshold_is_inclusive():
    cfg = AlarmConfig(evidence_threshold=0.5, hold_frames=1)
    state, event = step(AlarmState(), [_region(evidence=0.5)], 0.0, cfg)
    assert state.state is AlarmPhase.ALARM
    state, event = step(AlarmState(), [_region(evidence=0.499)], 0.0, cfg)
    assert state.state is AlarmPhase.IDLE
    assert event is None


def test_benchmark_latency_without_alarm():
    events = [AlarmEvent(1.0, "suspect_entered", ClassId.FIRE, 0.6),
              AlarmEvent(2.0, "suspect_cleared", ClassId.FIRE, 0.1)]
    timeline = benchmark_latency(events, [("ceiling", 30.0)])
    assert not timeline.detected
    assert timeline.camera_alarm_s is None
    assert timeline.reference_alarms == (("ceiling", 30.0),)
    assert timeline.gains == ()


def test_benchmark_latency_uses_first_alarm():
    events = [
        AlarmEvent(12.0, "alarm_raised", ClassId.FIRE, 0.8, detection_time_s=10.0),
        AlarmEvent(50.0, "alarm_raised", ClassId.SMOKE, 0.9, detection_time_s=48.0),
    ]
    timeline = benchmark_latency(events, [("left", 30.0), ("right", 5.0)])
    assert timeline.camera_alarm_s == 10.0
    assert timeline.gains == (("left", 20.0), ("right", -5.0))


def test_format_timeline_detected():
    timeline = benchmark_latency(
        [AlarmEvent(265.0, "alarm_raised", ClassId.FIRE, 0.9, detection_time_s=263.0)],
        [("ceiling", 275.0)])
    assert format_timeline(timeline) == (
        "camera detection: 263.000 s\n"
        "reference[ceiling]: 275.000 s  gain: 12.000 s"
    )


def test_format_timeline_not_detected():
    timeline = benchmark_latency([], [("ceiling", 275.0)])
    assert format_timeline(timeline) == (
        "camera detection: not detected\n"
        "reference[ceiling]: 275.000 s"
    )


def test_format_event_line_field_order():
    line = format_event_line("cam1", AlarmEvent(3.5, "suspect_entered", ClassId.SMOKE, 0.55))
    assert line == ('{"t": 3.5, "stream": "cam1", "transition": "suspect_entered", '
                    '"class": "smoke", "evidence": 0.55}')
    raised = format_event_line("cam1", AlarmEvent(5.0, "alarm_raised", ClassId.FIRE,
                                                  0.9, detection_time_s=3.5))
    assert raised.endswith('"detection_time": 3.5}')
    assert json.loads(raised)["class"] == "fire"


def test_load_scenario_reads_fixture():
    scenario = load_scenario(DATA / "warehouse_scene1.json")
    assert scenario.name == "warehouse_scene1"
    assert scenario.stream_path == DATA / "warehouse_scene1.jsonl"
    assert scenario.reference == (("ceiling", 275.0),)
    assert scenario.detector == DetectorConfig()
    assert scenario.temporal == TemporalConfig()
    assert scenario.alarm == AlarmConfig()


def test_load_scenario_applies_overrides(tmp_path):
    stream = tmp_path / "s.jsonl"
    stream.write_text('{"stream": "cam", "frame": 0, "t": 0.0, "class": null}\n')
    doc = {
        "name": "custom",
        "stream": "s.jsonl",
        "reference": [["ref", 9.5]],
        "detector": {"confidence_threshold": 0.4},
        "temporal": {"window": 5},
        "alarm": {"evidence_threshold": 0.6, "enabled_classes": ["fire"]},
    }
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(doc))
    scenario = load_scenario(path)
    assert scenario.detector.confidence_threshold == 0.4
    assert scenario.temporal.window == 5
    assert scenario.alarm.evidence_threshold == 0.6
    assert scenario.alarm.enabled_classes == frozenset({ClassId.FIRE})
    assert scenario.reference == (("ref", 9.5),)


def test_load_scenario_name_defaults_to_stem(tmp_path):
    stream = tmp_path / "s.jsonl"
    stream.write_text("")
    path = tmp_path / "night_shift.json"
    path.write_text(json.dumps({"stream": "s.jsonl"}))
    assert load_scenario(path).name == "night_shift"


@pytest.mark.parametrize("doc,fragment", [
    ([1, 2], "must be an object"),
    ({"stream": "s.jsonl", "cameras": 3}, "unknown keys"),
    ({"stream": ""}, "'stream'"),
    ({"stream": 7}, "'stream'"),
    ({"stream": "s.jsonl", "reference": {"a": 1}}, "'reference'"),
    ({"stream": "s.jsonl", "reference": [["only_label"]]}, "bad reference entry"),
    ({"stream": "s.jsonl", "reference": [[3, 4.0]]}, "bad reference entry"),
    ({"stream": "s.jsonl", "alarm": {"hold_frames": 0}}, "hold_frames"),
    ({"stream": "s.jsonl", "alarm": {"enabled_classes": "fire"}}, "must be a list"),
    ({"stream": "s.jsonl", "alarm": {"enabled_classes": ["steam"]}}, "steam"),
    ({"stream": "s.jsonl", "temporal": {"windows": 5}}, "unknown keys"),
])
def test_load_scenario_rejects_bad_documents(tmp_path, doc, fragment):
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(ScenarioError) as err:
        load_scenario(path)
    assert fragment in str(err.value)


def test_load_scenario_invalid_json_and_missing_file(tmp_path):
    path = tmp_path / "scenario.json"
    path.write_text("{not json")
    with pytest.raises(ScenarioError):
        load_scenario(path)
    with pytest.raises(ScenarioError):
        load_scenario(tmp_path / "absent.json")


def test_load_scenario_keeps_absolute_stream_path(tmp_path):
    stream = tmp_path / "elsewhere" / "s.jsonl"
    stream.parent.mkdir()
    stream.write_text("")
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps({"stream": str(stream)}))
    assert load_scenario(path).stream_path == stream


def test_replay_scene1_latency():
    result = run_scenario(load_scenario(DATA / "warehouse_scene1.json"))
    # 302 records, but frame 260 carries two detections of the same flame
    assert result.frames == 301
    assert result.timeline.camera_alarm_s == 263.0
    assert result.timeline.gains == (("ceiling", 12.0),)
    assert [e.transition for _, e in result.events] == ["suspect_entered", "alarm_raised"]
    assert result.high_water_mark == 1


def test_replay_scene2_latency():
    result = run_scenario(load_scenario(DATA / "warehouse_scene2.json"))
    assert result.timeline.camera_alarm_s == 9.0
    assert result.timeline.gains == (("ceiling_left", 23.0), ("ceiling_right", 34.0))


def test_replay_log_lines_are_valid_json():
    result = run_scenario(load_scenario(DATA / "warehouse_scene1.json"))
    assert len(result.log_lines) == len(result.events)
    for line in result.log_lines:
        obj = json.loads(line)
        assert obj["stream"] == "warehouse_scene1"
        assert obj["transition"] in {"suspect_entered", "suspect_cleared", "alarm_raised"}


def test_replay_trace_collection_is_opt_in():
    scenario = load_scenario(DATA / "warehouse_scene2.json")
    quiet = run_scenario(scenario)
    assert quiet.trace_lines == ()
    traced = run_scenario(scenario, collect_trace=True)
    assert traced.trace_lines
    record = json.loads(traced.trace_lines[0])
    assert record["stream"] == "warehouse_scene2"
    # tracing must not perturb the run itself
    assert traced.timeline == quiet.timeline


def test_replay_is_deterministic():
    scenario = load_scenario(DATA / "warehouse_scene1.json")
    a = run_scenario(scenario, collect_trace=True)
    b = run_scenario(scenario, collect_trace=True)
    assert a.log_lines == b.log_lines
    assert a.trace_lines == b.trace_lines
    assert a.timeline == b.timeline


def test_replay_tracks_streams_independently(tmp_path):
    lines = []
    fire = '{"stream": "a", "frame": %d, "t": %d.0, "class": "fire", "conf": 0.9, "box": [0.5, 0.5, 0.2, 0.2]}'
    smoke = '{"stream": "b", "frame": %d, "t": %d.0, "class": "smoke", "conf": 0.9, "box": [0.5, 0.5, 0.2, 0.2]}'
    marker = '{"stream": "%s", "frame": %d, "t": %d.0, "class": null}'
    for i in range(5):
        lines.append(fire % (i, i) if i < 3 else marker % ("a", i, i))
        lines.append(smoke % (i, i) if i >= 2 else marker % ("b", i, i))
    path = tmp_path / "two_streams.jsonl"
    path.write_text("\n".join(lines) + "\n")

    result = replay(path, DetectorConfig(), TemporalConfig(window=2),
                    AlarmConfig(evidence_threshold=0.5, hold_frames=2))
    by_stream = {}
    for stream_id, event in result.events:
        by_stream.setdefault(stream_id, []).append(event)
    # stream a: evidence 0.45 at f0, 0.9 at f1 (suspect), alarm at f2
    assert [e.transition for e in by_stream["a"]] == ["suspect_entered", "alarm_raised"]
    assert by_stream["a"][1].detection_time_s == 1.0
    # stream b runs two frames behind and must not inherit a's state
    assert [e.transition for e in by_stream["b"]] == ["suspect_entered", "alarm_raised"]
    assert by_stream["b"][1].detection_time_s == 3.0
    assert result.frames == 10


def test_scenario_is_plain_data():
    scenario = load_scenario(DATA / "warehouse_scene2.json")
    assert isinstance(scenario, Scenario)
    clone = Scenario(scenario.name, scenario.stream_path, scenario.reference,
                     scenario.detector, scenario.temporal, scenario.alarm)
    assert clone == scenario
