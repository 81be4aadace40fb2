"""Anchor-box estimation: k-means over ground-truth box sizes.

Distance is 1 - IoU of co-centered rectangles, so cluster centroids end up
as representative (width, height) priors on the detector input canvas.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dataset import DatasetIndex
from .errors import AnchorError
from .geometry import ClassId

DEFAULT_CANVAS_PX = 576
DEFAULT_ANCHOR_COUNT = 16

# Stock single-stage priors (608 px canvas) rescaled to the 576 px canvas;
# used as the baseline when judging re-estimated anchors.
_STOCK_PRIORS_608 = (
    (12, 16), (19, 36), (40, 28), (36, 75), (76, 55),
    (72, 146), (142, 110), (192, 243), (459, 401),
)


@dataclass(frozen=True)
class AnchorParams:
    k: int = DEFAULT_ANCHOR_COUNT
    canvas_px: int = DEFAULT_CANVAS_PX

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.canvas_px < 1:
            raise ValueError(f"canvas_px must be >= 1, got {self.canvas_px}")


@dataclass(frozen=True)
class AnchorSet:
    """Anchor sizes in canvas pixels, sorted by area ascending."""

    canvas_px: int
    anchors: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        for w, h in self.anchors:
            if not (0.0 < w <= self.canvas_px and 0.0 < h <= self.canvas_px):
                raise ValueError(f"anchor ({w}, {h}) outside (0, {self.canvas_px}]")
        areas = [w * h for w, h in self.anchors]
        if areas != sorted(areas):
            raise ValueError("anchors not sorted by area")

    def mean_area(self) -> float:
        if not self.anchors:
            return 0.0
        return sum(w * h for w, h in self.anchors) / len(self.anchors)

    def format_line(self) -> str:
        """Comma-separated integer `w,h` pairs on a single line."""
        return ", ".join(
            f"{math.floor(w + 0.5)},{math.floor(h + 0.5)}" for w, h in self.anchors
        )


DEFAULT_ANCHORS_576 = AnchorSet(
    canvas_px=DEFAULT_CANVAS_PX,
    anchors=tuple(
        (w * DEFAULT_CANVAS_PX / 608, h * DEFAULT_CANVAS_PX / 608)
        for w, h in _STOCK_PRIORS_608
    ),
)


@dataclass(frozen=True)
class ClusterReport:
    """Side-car diagnostics for one k-means run.

    sizes follows the sorted anchor order; objective_history holds the
    within-cluster total distance recorded at every iteration.
    """

    sizes: tuple[int, ...]
    mean_iou: float
    iterations: int
    objective_history: tuple[float, ...]


def iou_wh(a: Sequence[float], b: Sequence[float]) -> float:
    """IoU of two rectangles co-centered at the origin."""
    inter = min(a[0], b[0]) * min(a[1], b[1])
    union = a[0] * a[1] + b[0] * b[1] - inter
    return inter / union


def collect_wh(index: DatasetIndex, canvas_px: int = DEFAULT_CANVAS_PX) -> list[tuple[float, float]]:
    """Every ground-truth box size scaled to canvas pixels."""
    whs = [
        (box.w * canvas_px, box.h * canvas_px)
        for image in index.images
        for _, box in image.boxes
    ]
    if not whs:
        raise AnchorError("no boxes to cluster")
    return whs


def _distances(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """(n, k) matrix of 1 - IoU distances."""
    inter = (
        np.minimum(points[:, None, 0], centroids[None, :, 0])
        * np.minimum(points[:, None, 1], centroids[None, :, 1])
    )
    union = (
        (points[:, 0] * points[:, 1])[:, None]
        + (centroids[:, 0] * centroids[:, 1])[None, :]
        - inter
    )
    return 1.0 - inter / union


def _repair_empty(points, centroids, assign, distances):
    """Reseed each empty cluster to the point farthest from its own centroid."""
    k = centroids.shape[0]
    for _ in range(k):
        occupied = set(assign.tolist())
        empty = [c for c in range(k) if c not in occupied]
        if not empty:
            break
        worst = int(np.argmax(distances[np.arange(len(points)), assign]))
        centroids = centroids.copy()
        centroids[empty[0]] = points[worst]
        distances = _distances(points, centroids)
        assign = distances.argmin(axis=1)
    return centroids, assign, distances


def _updated_centroids(points, assign, centroids, update):
    new = centroids.copy()
    for c in range(centroids.shape[0]):
        members = points[assign == c]
        if len(members) == 0:
            continue
        if update == "mean":
            new[c] = members.mean(axis=0)
        else:  # medoid: the member minimizing summed distance to the others
            dist = _distances(members, members)
            new[c] = members[int(np.argmin(dist.sum(axis=1)))]
    return new


def kmeans_anchors(
    whs: Sequence[tuple[float, float]],
    k: int = DEFAULT_ANCHOR_COUNT,
    seed: int = 0,
    canvas_px: int = DEFAULT_CANVAS_PX,
    max_iters: int = 1000,
    update: str = "mean",
) -> tuple[AnchorSet, ClusterReport]:
    """Cluster box sizes into k anchors with 1 - IoU distance.

    Initialization samples k distinct input points with a seeded RNG, so the
    run is fully deterministic. Iteration stops when assignments stabilize,
    when max_iters is hit, or when an update step would increase the
    within-cluster total distance (the previous, better state is kept, which
    preserves the monotone objective guarantee).
    """
    if update not in ("mean", "medoid"):
        raise ValueError(f"unknown update rule {update!r}")
    if k < 1:
        raise AnchorError(f"k must be >= 1, got {k}")
    whs = [tuple(float(v) for v in wh) for wh in whs]
    if len(whs) < k:
        raise AnchorError(f"need at least {k} boxes to form {k} clusters, got {len(whs)}")
    points = np.asarray(whs, dtype=np.float64)
    rng = random.Random(seed)
    centroids = np.asarray(rng.sample(whs, k), dtype=np.float64)

    history: list[float] = []
    prev_assign = None
    prev_centroids = centroids
    assign = np.zeros(len(whs), dtype=np.intp)
    iterations = 0
    for _ in range(max_iters):
        iterations += 1
        distances = _distances(points, centroids)
        assign = distances.argmin(axis=1)
        centroids, assign, distances = _repair_empty(points, centroids, assign, distances)
        objective = float(distances[np.arange(len(points)), assign].sum())
        if history and objective > history[-1]:
            centroids, assign = prev_centroids, prev_assign
            break
        history.append(objective)
        if prev_assign is not None and np.array_equal(assign, prev_assign):
            break
        prev_centroids, prev_assign = centroids, assign
        centroids = _updated_centroids(points, assign, centroids, update)

    # re-derive the assignment so it is consistent with the final centroids
    # on every exit path (convergence, revert, or max_iters exhaustion)
    final_distances = _distances(points, centroids)
    assign = final_distances.argmin(axis=1)
    order = np.argsort(centroids[:, 0] * centroids[:, 1], kind="stable")
    sorted_centroids = centroids[order]
    sizes = tuple(int(np.sum(assign == int(c))) for c in order)
    mean_iou = float(np.mean(1.0 - final_distances[np.arange(len(points)), assign]))
    anchor_set = AnchorSet(
        canvas_px=canvas_px,
        anchors=tuple((float(w), float(h)) for w, h in sorted_centroids),
    )
    report = ClusterReport(
        sizes=sizes,
        mean_iou=mean_iou,
        iterations=iterations,
        objective_history=tuple(history),
    )
    return anchor_set, report


def per_class_anchors(
    index: DatasetIndex,
    k: int = DEFAULT_ANCHOR_COUNT,
    seed: int = 0,
    canvas_px: int = DEFAULT_CANVAS_PX,
    update: str = "mean",
) -> dict[ClassId, tuple[AnchorSet, ClusterReport]]:
    """Run the clustering separately per class; classes with no boxes are skipped."""
    grouped = index.boxes_by_class()
    results: dict[ClassId, tuple[AnchorSet, ClusterReport]] = {}
    for class_id in sorted(grouped):
        whs = [(box.w * canvas_px, box.h * canvas_px) for box in grouped[class_id]]
        if len(whs) < k:
            raise AnchorError(
                f"class {class_id.label}: need at least {k} boxes to form {k} clusters, got {len(whs)}"
            )
        results[class_id] = kmeans_anchors(whs, k=k, seed=seed, canvas_px=canvas_px, update=update)
    return results
