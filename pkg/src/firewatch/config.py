"""Toolkit-wide configuration loaded from a single JSON document.

Each top-level section maps onto one module's config dataclass; every field is
optional and falls back to the dataclass default. Unknown sections and keys
are rejected.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from .alarm import AlarmConfig
from .anchors import AnchorParams
from .dataset import AugmentationSpec, SplitSpec
from .detect import DetectorConfig
from .errors import ConfigError
from .evaluation import EvalConfig
from .geometry import ClassId
from .temporal import TemporalConfig
from .util import apply_overrides


@dataclass(frozen=True)
class GlobalConfig:
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)
    temporal: TemporalConfig = field(default_factory=TemporalConfig)
    alarm: AlarmConfig = field(default_factory=AlarmConfig)
    augment: AugmentationSpec = field(default_factory=AugmentationSpec)
    split: SplitSpec = field(default_factory=SplitSpec)
    anchors: AnchorParams = field(default_factory=AnchorParams)


_SECTIONS = ("detector", "eval", "temporal", "alarm", "augment", "split", "anchors")


def _coerce(section: str, overrides: Mapping) -> dict:
    """JSON has no tuples or enums; translate the affected fields."""
    data = dict(overrides)
    if section == "detector" and isinstance(data.get("input_resolution"), list):
        data["input_resolution"] = tuple(data["input_resolution"])
    if section == "alarm" and "enabled_classes" in data:
        labels = data["enabled_classes"]
        if not isinstance(labels, (list, tuple)):
            raise ConfigError(f"alarm: enabled_classes must be a list, got {labels!r}")
        try:
            data["enabled_classes"] = frozenset(ClassId.from_label(v) for v in labels)
        except ValueError as exc:
            raise ConfigError(f"alarm: {exc}") from None
    return data


def parse_config(obj: Mapping, source: str = "config") -> GlobalConfig:
    if not isinstance(obj, Mapping):
        raise ConfigError(f"{source}: expected a JSON object at top level")
    unknown = sorted(set(obj) - set(_SECTIONS))
    if unknown:
        raise ConfigError(f"{source}: unknown sections {unknown}")
    kwargs = {}
    base = GlobalConfig()
    for section in _SECTIONS:
        overrides = obj.get(section)
        if overrides is None:
            continue
        if not isinstance(overrides, Mapping):
            raise ConfigError(f"{source}: section '{section}' must be an object")
        kwargs[section] = apply_overrides(getattr(base, section),
                                          _coerce(section, overrides), section)
    return GlobalConfig(**kwargs) if kwargs else base


def load_config(path: Path | str | None) -> GlobalConfig:
    """Defaults when path is None, otherwise the parsed JSON document."""
    if path is None:
        return GlobalConfig()
    path = Path(path)
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return parse_config(obj, source=str(path))
