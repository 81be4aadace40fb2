"""Small shared helpers."""

from __future__ import annotations

import dataclasses
from typing import Mapping, TypeVar

from .errors import ConfigError

T = TypeVar("T")


def apply_overrides(base: T, overrides: Mapping | None, section: str) -> T:
    """Return a copy of a config dataclass with fields from a mapping applied.

    Unknown keys are rejected so typos in config files fail loudly instead of
    silently keeping defaults.
    """
    if not overrides:
        return base
    if not isinstance(overrides, Mapping):
        raise ConfigError(f"{section}: expected an object, got {type(overrides).__name__}")
    known = {f.name for f in dataclasses.fields(base)}
    unknown = sorted(set(overrides) - known)
    if unknown:
        raise ConfigError(f"{section}: unknown keys {unknown}")
    try:
        return dataclasses.replace(base, **dict(overrides))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{section}: {exc}") from exc
