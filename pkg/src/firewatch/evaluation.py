"""Two evaluation perspectives over the same predictions.

Object detection: greedy one-to-one box matching per image, TP/FP/FN counts,
precision/recall/F1 and average precision from a confidence sweep.

Object recognition: per-image, per-class presence/absence outcomes (an image
counts as found only when some prediction is spatially grounded in a ground
truth of that class).

Ratios are kept exact (fractions of integer counts) until display so that
percent rounding is stable; exact .5 ties round toward zero.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import EvaluationError
from .geometry import BBox, ClassId, Detection, iou

COMBINED_KEY = "combined"
RECOGNITION_OUTCOMES = ("tp", "tn", "fp", "fn")


@dataclass(frozen=True)
class EvalConfig:
    iou_threshold: float = 0.5
    confidence_threshold: float = 0.25

    def __post_init__(self) -> None:
        if not 0.0 < self.iou_threshold < 1.0:
            raise ValueError(f"iou_threshold outside (0,1): {self.iou_threshold}")
        if not 0.0 < self.confidence_threshold < 1.0:
            raise ValueError(f"confidence_threshold outside (0,1): {self.confidence_threshold}")


@dataclass(frozen=True)
class DetectionCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    def __add__(self, other: "DetectionCounts") -> "DetectionCounts":
        return DetectionCounts(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn)


@dataclass(frozen=True)
class RecognitionCounts:
    tp: int = 0
    tn: int = 0
    fp: int = 0
    fn: int = 0

    def __add__(self, other: "RecognitionCounts") -> "RecognitionCounts":
        return RecognitionCounts(self.tp + other.tp, self.tn + other.tn,
                                 self.fp + other.fp, self.fn + other.fn)


@dataclass(frozen=True)
class MetricsReport:
    """Metric ratios in [0,1]; None marks an undefined (zero denominator) value."""

    precision: float | None
    recall: float | None
    f1: float | None
    ap: float | None = None


@dataclass(frozen=True)
class MatchResult:
    counts: Mapping[ClassId, DetectionCounts]
    pairs: tuple[tuple[int, int, float], ...]  # (prediction index, ground-truth index, IoU)

    @property
    def combined(self) -> DetectionCounts:
        total = DetectionCounts()
        for counts in self.counts.values():
            total = total + counts
        return total


def match_image(preds: Sequence[Detection], gts: Sequence[tuple[ClassId, BBox]],
                cfg: EvalConfig) -> MatchResult:
    """Greedy one-to-one matching of predictions to ground truths.

    Predictions are visited in descending confidence (ties keep input order);
    each claims the unmatched same-class ground truth with the highest IoU
    when that IoU reaches the threshold, otherwise it is a false positive.
    Unmatched ground truths are false negatives; a wrong-class prediction is
    a false positive for its own class and leaves the ground truth unmatched.
    """
    order = sorted(range(len(preds)), key=lambda i: (-preds[i].confidence, i))
    matched_gt: set[int] = set()
    tp = {c: 0 for c in ClassId}
    fp = {c: 0 for c in ClassId}
    pairs: list[tuple[int, int, float]] = []
    for pi in order:
        pred = preds[pi]
        best_gt, best_iou = -1, 0.0
        for gi, (gt_class, gt_box) in enumerate(gts):
            if gt_class != pred.class_id or gi in matched_gt:
                continue
            overlap = iou(pred.box, gt_box)
            if overlap > best_iou:
                best_gt, best_iou = gi, overlap
        if best_gt >= 0 and best_iou >= cfg.iou_threshold:
            matched_gt.add(best_gt)
            tp[pred.class_id] += 1
            pairs.append((pi, best_gt, best_iou))
        else:
            fp[pred.class_id] += 1
    counts: dict[ClassId, DetectionCounts] = {}
    for c in ClassId:
        n_gt = sum(1 for gc, _ in gts if gc == c)
        n_pred = sum(1 for p in preds if p.class_id == c)
        counts[c] = DetectionCounts(tp=tp[c], fp=fp[c], fn=n_gt - tp[c])
        # count conservation, checked on every evaluation
        assert counts[c].tp + counts[c].fn == n_gt
        assert counts[c].tp + counts[c].fp == n_pred
    return MatchResult(counts=counts, pairs=tuple(pairs))


def _ratio(num: int, den: int) -> float | None:
    return num / den if den else None


def detection_metrics(counts: DetectionCounts, ap: float | None = None) -> MetricsReport:
    """P, R and F1 from counts; F1 is the harmonic mean when both are defined."""
    p = _ratio(counts.tp, counts.tp + counts.fp)
    r = _ratio(counts.tp, counts.tp + counts.fn)
    f1 = None
    if p is not None and r is not None and p + r > 0:
        f1 = 2 * p * r / (p + r)
    return MetricsReport(precision=p, recall=r, f1=f1, ap=ap)


def recognition_metrics(counts: RecognitionCounts) -> MetricsReport:
    p = _ratio(counts.tp, counts.tp + counts.fp)
    r = _ratio(counts.tp, counts.tp + counts.fn)
    f1 = None
    if p is not None and r is not None and p + r > 0:
        f1 = 2 * p * r / (p + r)
    return MetricsReport(precision=p, recall=r, f1=f1)


def round_percent(value: Fraction | None, decimals: int = 0) -> float | None:
    """Round an exact ratio to a display percentage.

    Exact rational arithmetic; a tie exactly halfway between two steps
    rounds toward zero (302/400 -> 75, not 76).
    """
    if value is None:
        return None
    scale = 10 ** decimals
    x = value * 100 * scale
    n = x.numerator // x.denominator
    if x - n > Fraction(1, 2):
        n += 1
    return n / scale


def _exact_metric_fractions(counts) -> tuple[Fraction | None, Fraction | None, Fraction | None]:
    p = Fraction(counts.tp, counts.tp + counts.fp) if counts.tp + counts.fp else None
    r = Fraction(counts.tp, counts.tp + counts.fn) if counts.tp + counts.fn else None
    f1 = None
    if p is not None and r is not None and counts.tp > 0:
        # 2PR/(P+R) collapses to 2TP/(2TP+FP+FN) for counts
        f1 = Fraction(2 * counts.tp, 2 * counts.tp + counts.fp + counts.fn)
    return p, r, f1


def percent_summary(counts, decimals: int = 0):
    """(precision, recall, f1) as display percentages from exact count ratios.

    Works for DetectionCounts and RecognitionCounts alike; None marks an
    undefined metric.
    """
    p, r, f1 = _exact_metric_fractions(counts)
    return (round_percent(p, decimals), round_percent(r, decimals), round_percent(f1, decimals))


def average_precision_exact(
    preds_by_image: Mapping[str, Sequence[Detection]],
    gts_by_image: Mapping[str, Sequence[tuple[ClassId, BBox]]],
    class_id: ClassId,
    cfg: EvalConfig,
    method: str = "all_points",
) -> Fraction | None:
    """Exact AP for one class from a global confidence sweep.

    Predictions across all images are visited in descending confidence and
    matched greedily inside their image; the precision envelope is made
    monotone before integrating. Returns None when the class has no ground
    truth anywhere. method="11point" averages the envelope at the eleven
    equally spaced recall levels instead.
    """
    if method not in ("all_points", "11point"):
        raise ValueError(f"unknown AP method {method!r}")
    gt_boxes = {
        image_id: [box for c, box in gts if c == class_id]
        for image_id, gts in gts_by_image.items()
    }
    n_gt = sum(len(v) for v in gt_boxes.values())
    if n_gt == 0:
        return None
    entries = [
        (det.confidence, image_id, det)
        for image_id, dets in preds_by_image.items()
        for det in dets
        if det.class_id == class_id
    ]
    entries.sort(key=lambda e: -e[0])  # stable: ties keep insertion order
    matched: dict[str, set[int]] = {image_id: set() for image_id in gt_boxes}
    tp_cum = 0
    points: list[tuple[Fraction, Fraction]] = []  # (recall, precision)
    for rank, (_, image_id, det) in enumerate(entries, start=1):
        boxes = gt_boxes.get(image_id, [])
        taken = matched.setdefault(image_id, set())
        best_gt, best_iou = -1, 0.0
        for gi, box in enumerate(boxes):
            if gi in taken:
                continue
            overlap = iou(det.box, box)
            if overlap > best_iou:
                best_gt, best_iou = gi, overlap
        if best_gt >= 0 and best_iou >= cfg.iou_threshold:
            taken.add(best_gt)
            tp_cum += 1
        points.append((Fraction(tp_cum, n_gt), Fraction(tp_cum, rank)))

    if not points:
        return Fraction(0)
    envelope = [Fraction(0)] * len(points)
    running = Fraction(0)
    for i in reversed(range(len(points))):
        running = max(running, points[i][1])
        envelope[i] = running
    if method == "11point":
        total = Fraction(0)
        for step in range(11):
            level = Fraction(step, 10)
            total += max((p for r, p in points if r >= level), default=Fraction(0))
        return total / 11
    ap = Fraction(0)
    prev_recall = Fraction(0)
    for (recall, _), env in zip(points, envelope):
        ap += (recall - prev_recall) * env
        prev_recall = recall
    return ap


def average_precision(preds_by_image, gts_by_image, class_id: ClassId,
                      cfg: EvalConfig, method: str = "all_points") -> float | None:
    exact = average_precision_exact(preds_by_image, gts_by_image, class_id, cfg, method)
    return None if exact is None else float(exact)


def recognize_image(preds: Sequence[Detection], gts: Sequence[tuple[ClassId, BBox]],
                    class_id: ClassId, cfg: EvalConfig) -> str:
    """Image-level outcome ("tp"/"tn"/"fp"/"fn") for one class.

    An image with the class present counts as found only when some
    same-class prediction overlaps a same-class ground truth at the IoU
    threshold; any same-class prediction on an image without the class is a
    false alarm.
    """
    gt_boxes = [box for c, box in gts if c == class_id]
    class_preds = [d for d in preds if d.class_id == class_id]
    if gt_boxes:
        grounded = any(
            iou(d.box, g) >= cfg.iou_threshold for d in class_preds for g in gt_boxes
        )
        return "tp" if grounded else "fn"
    return "fp" if class_preds else "tn"


@dataclass(frozen=True)
class RunReport:
    """Aggregated results of one evaluation run, both perspectives."""

    dataset: str
    config: EvalConfig
    n_images: int
    detection_counts: Mapping[str, DetectionCounts]       # "fire", "smoke", "combined"
    detection_ap: Mapping[str, Fraction | None]           # "fire", "smoke"
    recognition_counts: Mapping[str, RecognitionCounts]   # "fire", "smoke", "combined"

    def detection_report(self, key: str) -> MetricsReport:
        ap = self.detection_ap.get(key)
        return detection_metrics(self.detection_counts[key],
                                 ap=None if ap is None else float(ap))

    def recognition_report(self, key: str) -> MetricsReport:
        return recognition_metrics(self.recognition_counts[key])

    def to_dict(self) -> dict:
        detection = {}
        for key, counts in self.detection_counts.items():
            report = self.detection_report(key)
            block = {"tp": counts.tp, "fp": counts.fp, "fn": counts.fn,
                     "precision": report.precision, "recall": report.recall,
                     "f1": report.f1}
            if key in self.detection_ap:
                block["ap"] = report.ap
            detection[key] = block
        recognition = {}
        for key, counts in self.recognition_counts.items():
            report = self.recognition_report(key)
            recognition[key] = {"tp": counts.tp, "tn": counts.tn, "fp": counts.fp,
                                "fn": counts.fn, "precision": report.precision,
                                "recall": report.recall, "f1": report.f1}
        return {
            "dataset": self.dataset,
            "config": {"iou_threshold": self.config.iou_threshold,
                       "confidence_threshold": self.config.confidence_threshold},
            "n_images": self.n_images,
            "detection": detection,
            "recognition": recognition,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def evaluate_run(
    preds_by_image: Mapping[str, Sequence[Detection]],
    gts_by_image: Mapping[str, Sequence[tuple[ClassId, BBox]]],
    cfg: EvalConfig,
    dataset_name: str = "",
) -> RunReport:
    """Aggregate both perspectives over a keyed image set.

    Detection counts and recognition outcomes use predictions at the
    configured confidence threshold; AP sweeps the full confidence range.
    Both mappings must share the exact same image ids.
    """
    pred_keys, gt_keys = set(preds_by_image), set(gts_by_image)
    if pred_keys != gt_keys:
        only_preds = sorted(pred_keys - gt_keys)
        only_gts = sorted(gt_keys - pred_keys)
        raise EvaluationError(
            f"image id mismatch: detections only {only_preds}, ground truth only {only_gts}"
        )

    det_counts = {c: DetectionCounts() for c in ClassId}
    rec_tallies = {c: {o: 0 for o in RECOGNITION_OUTCOMES} for c in ClassId}
    for image_id in sorted(gt_keys):
        gts = gts_by_image[image_id]
        preds = [d for d in preds_by_image[image_id]
                 if d.confidence >= cfg.confidence_threshold]
        result = match_image(preds, gts, cfg)
        for c in ClassId:
            det_counts[c] = det_counts[c] + result.counts[c]
            outcome = recognize_image(preds, gts, c, cfg)
            rec_tallies[c][outcome] += 1
            # a matched box implies the image-level find
            if result.counts[c].tp > 0:
                assert outcome == "tp"

    rec_counts = {c: RecognitionCounts(**rec_tallies[c]) for c in ClassId}
    for c in ClassId:
        with_class = sum(1 for gts in gts_by_image.values() if any(gc == c for gc, _ in gts))
        assert rec_counts[c].tp + rec_counts[c].fn == with_class
        assert rec_counts[c].tn + rec_counts[c].fp == len(gts_by_image) - with_class

    detection_counts = {c.label: det_counts[c] for c in ClassId}
    detection_counts[COMBINED_KEY] = det_counts[ClassId.FIRE] + det_counts[ClassId.SMOKE]
    detection_ap = {
        c.label: average_precision_exact(preds_by_image, gts_by_image, c, cfg)
        for c in ClassId
    }
    recognition_counts = {c.label: rec_counts[c] for c in ClassId}
    recognition_counts[COMBINED_KEY] = rec_counts[ClassId.FIRE] + rec_counts[ClassId.SMOKE]
    return RunReport(
        dataset=dataset_name,
        config=cfg,
        n_images=len(gts_by_image),
        detection_counts=detection_counts,
        detection_ap=detection_ap,
        recognition_counts=recognition_counts,
    )


def _cell(value: float | None, decimals: int, suffix: str = "") -> str:
    return "-" if value is None else f"{value:.{decimals}f}{suffix}"


def render_detection_table(report: RunReport) -> str:
    """Aligned text table of the detection perspective (integer percents)."""
    cfg = report.config
    header = (f"object detection  IoU >= {cfg.iou_threshold:.2f}  "
              f"conf >= {cfg.confidence_threshold:.2f}  images: {report.n_images}")
    rows = [("class", "tp", "fp", "fn", "ap", "p", "r", "f1")]
    for key in report.detection_counts:
        counts = report.detection_counts[key]
        p, r, f1 = percent_summary(counts, decimals=0)
        ap = round_percent(report.detection_ap.get(key), decimals=1)
        rows.append((key, str(counts.tp), str(counts.fp), str(counts.fn),
                     _cell(ap, 1, "%"), _cell(p, 0, "%"), _cell(r, 0, "%"), _cell(f1, 0, "%")))
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    lines = [header]
    for row in rows:
        lines.append("  ".join(
            cell.ljust(widths[0]) if i == 0 else cell.rjust(widths[i])
            for i, cell in enumerate(row)
        ).rstrip())
    return "\n".join(lines)


def render_recognition_table(report: RunReport) -> str:
    """Aligned text table of the recognition perspective (one-decimal percents)."""
    header = (f"object recognition  IoU >= {report.config.iou_threshold:.2f}  "
              f"images: {report.n_images}")
    rows = [("class", "tp", "tn", "fp", "fn", "p", "r", "f1")]
    for key in report.recognition_counts:
        counts = report.recognition_counts[key]
        p, r, f1 = percent_summary(counts, decimals=1)
        rows.append((key, str(counts.tp), str(counts.tn), str(counts.fp), str(counts.fn),
                     _cell(p, 1), _cell(r, 1), _cell(f1, 1)))
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    lines = [header]
    for row in rows:
        lines.append("  ".join(
            cell.ljust(widths[0]) if i == 0 else cell.rjust(widths[i])
            for i, cell in enumerate(row)
        ).rstrip())
    return "\n".join(lines)
