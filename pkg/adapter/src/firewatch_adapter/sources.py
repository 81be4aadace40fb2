"""Frame sources the exporter can iterate.

Two kinds are built in: a directory of image files (sorted by name, one
frame per file) and `synthetic:N` (N payload-free frames for exercising the
stub backend). Video files need a codec backend this package does not
bundle, so they fail with a pointer to the image-directory path instead of a
half-working decode.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

from .errors import SourceError

IMAGE_SUFFIXES = (".bmp", ".jpeg", ".jpg", ".png")
VIDEO_SUFFIXES = (".avi", ".mkv", ".mov", ".mp4")


@dataclass(frozen=True)
class Frame:
    """One frame handed to a backend.

    `data` is the raw file payload for image-directory sources and None for
    synthetic frames; the stub backend never looks at it.
    """

    index: int
    data: bytes | None
    origin: str


def _iter_synthetic(count: int) -> Iterator[Frame]:
    for index in range(count):
        yield Frame(index=index, data=None, origin=f"synthetic:{index}")


def _iter_image_dir(root: Path) -> Iterator[Frame]:
    paths = sorted(p for p in root.iterdir()
                   if p.suffix.lower() in IMAGE_SUFFIXES)
    if not paths:
        raise SourceError(f"no image frames under {root}")
    for index, path in enumerate(paths):
        try:
            data = path.read_bytes()
        except OSError as exc:
            raise SourceError(f"unreadable frame {path}: {exc}") from exc
        yield Frame(index=index, data=data, origin=str(path))


def open_source(spec: str | Path) -> tuple[str, Iterator[Frame]]:
    """Resolve a source spec to (stream id, frame iterator).

    Accepts `synthetic:N` or a directory of image files. Frame indices are
    assigned by enumeration, so they always increase strictly from 0.
    """
    text = str(spec)
    if text.startswith("synthetic:"):
        _, _, tail = text.partition(":")
        try:
            count = int(tail)
        except ValueError:
            raise SourceError(f"bad synthetic frame count {tail!r}") from None
        if count < 0:
            raise SourceError(f"bad synthetic frame count {tail!r}")
        return "synthetic", _iter_synthetic(count)

    path = Path(text)
    if path.is_dir():
        return path.name, _iter_image_dir(path)
    if path.suffix.lower() in VIDEO_SUFFIXES and path.is_file():
        raise SourceError(
            f"video decoding is not bundled; extract {path.name} to an image "
            "directory first")
    if not path.exists():
        raise SourceError(f"source not found: {path}")
    raise SourceError(f"not a frame source: {path}")
