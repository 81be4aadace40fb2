"""Ground-truth handling: label parsing, dataset indexing, photometric
augmentation and deterministic train/test splitting.

Labels follow the usual one-file-per-image convention: a text file with one
`class cx cy w h` line per object, coordinates normalized to the image size.
An empty label file marks a negative image.
"""

from __future__ import annotations

import math
import random
import shutil
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DatasetError, LabelParseError
from .geometry import BBox, ClassId

IMAGE_EXTENSIONS = (".jpg", ".jpeg", ".png", ".bmp")
LABEL_EXTENSION = ".txt"
CONTRAST_MIDPOINT = 128
VARIANT_SUFFIXES = ("bright", "contrast", "blur")


@dataclass(frozen=True)
class LabeledImage:
    image_id: str
    width_px: int
    height_px: int
    boxes: tuple[tuple[ClassId, BBox], ...]
    path: Path | None = None

    @property
    def is_negative(self) -> bool:
        return not self.boxes


@dataclass(frozen=True)
class DatasetIndex:
    name: str
    images: tuple[LabeledImage, ...]

    @property
    def counts(self) -> tuple[int, int, int]:
        """(positives, negatives, total)."""
        positive = sum(1 for image in self.images if not image.is_negative)
        return positive, len(self.images) - positive, len(self.images)

    def boxes_by_class(self) -> dict[ClassId, list[BBox]]:
        grouped: dict[ClassId, list[BBox]] = {}
        for image in self.images:
            for class_id, box in image.boxes:
                grouped.setdefault(class_id, []).append(box)
        return grouped


@dataclass(frozen=True)
class AugmentationSpec:
    brightness_gain: float = 1.5
    contrast_gain: float = 1.5
    blur_kernel: int = 5

    def __post_init__(self) -> None:
        if self.brightness_gain <= 0 or self.contrast_gain <= 0:
            raise ValueError("gains must be positive")
        if self.blur_kernel < 1 or self.blur_kernel % 2 == 0:
            raise ValueError(f"blur kernel must be odd and >= 1, got {self.blur_kernel}")


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError(f"train_fraction outside (0,1): {self.train_fraction}")


def parse_labels(text: str, class_count: int = 2) -> list[tuple[ClassId, BBox]]:
    """Parse label-file content. Raises LabelParseError naming the 1-based
    line number of the first malformed line; blank lines are ignored."""
    boxes: list[tuple[ClassId, BBox]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 5:
            raise LabelParseError(f"line {lineno}: expected 5 fields, got {len(fields)}")
        try:
            class_id = int(fields[0])
        except ValueError:
            raise LabelParseError(f"line {lineno}: bad class id {fields[0]!r}") from None
        if not 0 <= class_id < class_count:
            raise LabelParseError(f"line {lineno}: unknown class {class_id}")
        try:
            cx, cy, w, h = (float(f) for f in fields[1:])
        except ValueError:
            raise LabelParseError(f"line {lineno}: non-numeric coordinate") from None
        try:
            box = BBox(cx, cy, w, h)
        except ValueError as exc:
            raise LabelParseError(f"line {lineno}: {exc}") from None
        boxes.append((ClassId(class_id), box))
    return boxes


def serialize_labels(boxes: Iterable[tuple[ClassId, BBox]]) -> str:
    lines = [
        f"{int(class_id)} {box.cx:.6f} {box.cy:.6f} {box.w:.6f} {box.h:.6f}"
        for class_id, box in boxes
    ]
    return "".join(line + "\n" for line in lines)


def index_dataset(root: Path | str, name: str | None = None) -> DatasetIndex:
    """Scan a directory tree of images, each with a sibling label file.

    Every image must have a label file (possibly empty). Image headers are
    decoded to record pixel dimensions; an unreadable image is an error, not
    a skip.
    """
    root = Path(root)
    if not root.is_dir():
        raise DatasetError(f"not a directory: {root}")
    paths = sorted(
        p for p in root.rglob("*")
        if p.is_file() and p.suffix.lower() in IMAGE_EXTENSIONS
    )
    images = []
    for path in paths:
        label_path = path.with_suffix(LABEL_EXTENSION)
        if not label_path.is_file():
            raise DatasetError(f"missing label file for {path}")
        try:
            with Image.open(path) as im:
                width_px, height_px = im.size
        except (UnidentifiedImageError, OSError) as exc:
            raise DatasetError(f"unreadable image {path}: {exc}") from exc
        try:
            boxes = parse_labels(label_path.read_text(encoding="utf-8"))
        except LabelParseError as exc:
            raise LabelParseError(f"{label_path}: {exc}") from None
        image_id = path.relative_to(root).with_suffix("").as_posix()
        images.append(LabeledImage(image_id, width_px, height_px, tuple(boxes), path=path))
    return DatasetIndex(name=name or root.name, images=tuple(images))


def apply_brightness(pixels: np.ndarray, gain: float) -> np.ndarray:
    """p' = clamp(round(gain * p)), rounding half up."""
    scaled = np.floor(pixels.astype(np.float64) * gain + 0.5)
    return np.clip(scaled, 0, 255).astype(np.uint8)


def apply_contrast(pixels: np.ndarray, gain: float) -> np.ndarray:
    """p' = clamp(round(m + gain * (p - m))) with midpoint m = 128."""
    shifted = np.floor(
        CONTRAST_MIDPOINT + gain * (pixels.astype(np.float64) - CONTRAST_MIDPOINT) + 0.5
    )
    return np.clip(shifted, 0, 255).astype(np.uint8)


def apply_box_blur(pixels: np.ndarray, kernel: int) -> np.ndarray:
    """Mean filter over a kernel x kernel window, edges replicated.

    Integer arithmetic throughout; the window mean is rounded half up.
    """
    if kernel == 1:
        return pixels.copy()
    radius = kernel // 2
    padded = np.pad(pixels, ((radius, radius), (radius, radius), (0, 0)), mode="edge")
    padded = padded.astype(np.uint32)
    height, width = pixels.shape[:2]
    total = np.zeros((height, width, pixels.shape[2]), dtype=np.uint32)
    for dy in range(kernel):
        for dx in range(kernel):
            total += padded[dy:dy + height, dx:dx + width]
    area = kernel * kernel
    return ((2 * total + area) // (2 * area)).astype(np.uint8)


def _load_rgb8(path: Path) -> np.ndarray:
    with Image.open(path) as im:
        if im.mode == "RGB":
            return np.asarray(im)
        if im.mode in ("L", "P"):
            return np.asarray(im.convert("RGB"))
        raise DatasetError(f"{path}: unsupported image mode {im.mode!r}, need 8-bit RGB")


def augment(index: DatasetIndex, spec: AugmentationSpec, out_dir: Path | str) -> DatasetIndex:
    """Write the original plus brightness/contrast/blur variants of every image.

    All transforms are photometric, so each variant's label file is a
    byte-identical copy of its source's. Originals are copied as-is; variants
    are written as PNG under `<stem>_bright` / `<stem>_contrast` / `<stem>_blur`.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: set[str] = set()
    for image in index.images:
        if image.path is None:
            raise DatasetError(f"image {image.image_id} has no source path")
        stem = image.path.stem
        names = [image.path.name] + [f"{stem}_{s}.png" for s in VARIANT_SUFFIXES]
        for name in names:
            if name in written:
                raise DatasetError(f"output name collision: {name}")
            written.add(name)
        pixels = _load_rgb8(image.path)
        label_bytes = image.path.with_suffix(LABEL_EXTENSION).read_bytes()
        shutil.copyfile(image.path, out_dir / image.path.name)
        (out_dir / f"{stem}{LABEL_EXTENSION}").write_bytes(label_bytes)
        variants = {
            "bright": apply_brightness(pixels, spec.brightness_gain),
            "contrast": apply_contrast(pixels, spec.contrast_gain),
            "blur": apply_box_blur(pixels, spec.blur_kernel),
        }
        for suffix, data in variants.items():
            Image.fromarray(data).save(out_dir / f"{stem}_{suffix}.png")
            (out_dir / f"{stem}_{suffix}{LABEL_EXTENSION}").write_bytes(label_bytes)
    return index_dataset(out_dir, name=f"{index.name}-augmented")


def split(index: DatasetIndex, spec: SplitSpec) -> tuple[DatasetIndex, DatasetIndex]:
    """Deterministic stratified split with |train| = floor(fraction * total).

    Positives and negatives are shuffled and cut separately; when the per-
    stratum floors fall one short of the overall floor, the stratum with the
    larger fractional remainder gets the extra image (ties go to positives).
    """
    total = len(index.images)
    if total < 2:
        raise DatasetError(f"need at least 2 images to split, got {total}")
    positives = [im for im in index.images if not im.is_negative]
    negatives = [im for im in index.images if im.is_negative]
    fraction = Fraction(spec.train_fraction)
    target = math.floor(fraction * total)
    take_pos = math.floor(fraction * len(positives))
    take_neg = math.floor(fraction * len(negatives))
    if take_pos + take_neg < target:
        rem_pos = fraction * len(positives) - take_pos
        rem_neg = fraction * len(negatives) - take_neg
        if rem_pos >= rem_neg:
            take_pos += 1
        else:
            take_neg += 1
    rng = random.Random(spec.seed)
    rng.shuffle(positives)
    rng.shuffle(negatives)
    train = tuple(positives[:take_pos] + negatives[:take_neg])
    test = tuple(positives[take_pos:] + negatives[take_neg:])
    return (
        DatasetIndex(name=f"{index.name}-train", images=train),
        DatasetIndex(name=f"{index.name}-test", images=test),
    )


def write_manifest(index: DatasetIndex, path: Path | str) -> None:
    """Write one image path per line (the list-file convention)."""
    lines = []
    for image in index.images:
        if image.path is None:
            raise DatasetError(f"image {image.image_id} has no source path")
        lines.append(str(image.path))
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")
