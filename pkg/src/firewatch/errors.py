"""Exception types shared across the pipeline."""


class FirewatchError(Exception):
    """Base class for every error the toolkit raises on purpose."""


class ConfigError(FirewatchError):
    """Bad configuration file, section or flag value."""


class LabelParseError(FirewatchError):
    """Malformed ground-truth label content."""


class DatasetError(FirewatchError):
    """Dataset layout or image decoding problem."""


class AnchorError(FirewatchError):
    """Anchor estimation cannot proceed (empty input, k too large, ...)."""


class StreamFormatError(FirewatchError):
    """Malformed or out-of-order detection interchange record."""


class RetentionError(FirewatchError):
    """Frame payload retained or touched outside the allowed window."""


class EvaluationError(FirewatchError):
    """Evaluation inputs disagree (e.g. mismatched image ids)."""


class AlarmError(FirewatchError):
    """Alarm state machine misuse (e.g. time regression)."""


class ScenarioError(FirewatchError):
    """Malformed replay scenario document."""
