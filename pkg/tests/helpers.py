"""Shared fixture builders for the test suite."""

from __future__ import annotations

import random
from pathlib import Path

from PIL import Image

from firewatch.dataset import serialize_labels
from firewatch.geometry import BBox, ClassId, Detection


def lattice_box(rng: random.Random, grid: int = 64) -> BBox:
    """A box whose corners sit exactly on the 1/grid lattice.

    With grid a power of two every coordinate is a dyadic rational, so the
    float representation is exact.
    """
    x0 = rng.randrange(0, grid)
    x1 = rng.randrange(x0 + 1, grid + 1)
    y0 = rng.randrange(0, grid)
    y1 = rng.randrange(y0 + 1, grid + 1)
    return BBox((x0 + x1) / (2 * grid), (y0 + y1) / (2 * grid),
                (x1 - x0) / grid, (y1 - y0) / grid)


def random_box(rng: random.Random) -> BBox:
    w = rng.uniform(0.02, 0.6)
    h = rng.uniform(0.02, 0.6)
    return BBox(rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0), w, h)


def random_detection(rng: random.Random, class_id: ClassId | None = None,
                     lattice: bool = False) -> Detection:
    if class_id is None:
        class_id = rng.choice(list(ClassId))
    box = lattice_box(rng) if lattice else random_box(rng)
    return Detection(box, class_id, rng.random())


def jitter_box(rng: random.Random, box: BBox, amount: float) -> BBox:
    """Shift a box slightly so it still overlaps the original heavily."""
    dx = rng.uniform(-amount, amount)
    dy = rng.uniform(-amount, amount)
    cx = min(max(box.cx + dx, box.w / 2), 1.0 - box.w / 2)
    cy = min(max(box.cy + dy, box.h / 2), 1.0 - box.h / 2)
    return BBox(cx, cy, box.w, box.h)


def write_image(path: Path, size: tuple[int, int] = (8, 6),
                color: tuple[int, int, int] = (30, 40, 50)) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.new("RGB", size, color).save(path)


def write_labeled_image(root: Path, image_id: str,
                        boxes: list[tuple[ClassId, BBox]],
                        size: tuple[int, int] = (8, 6)) -> None:
    """One PNG plus its sibling label file under root."""
    image_path = root / f"{image_id}.png"
    write_image(image_path, size=size)
    image_path.with_suffix(".txt").write_text(serialize_labels(boxes), encoding="utf-8")


def build_dataset(root: Path, positives: int, negatives: int,
                  seed: int = 0, prefix: str = "img") -> None:
    """positives images with 1-3 lattice boxes each, then empty-label negatives."""
    rng = random.Random(seed)
    for i in range(positives):
        boxes = [(rng.choice(list(ClassId)), lattice_box(rng))
                 for _ in range(rng.randint(1, 3))]
        write_labeled_image(root, f"{prefix}{i:04d}", boxes)
    for i in range(negatives):
        write_labeled_image(root, f"{prefix}neg{i:04d}", [])
