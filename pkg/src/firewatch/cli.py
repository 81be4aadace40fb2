"""Command-line entry point.

Global flags come before the subcommand; each maps onto a config field and
wins over the config file. Scenario documents are the exception: their
embedded sections override everything else, so a stored experiment replays
the same way regardless of local settings.

    firewatch [--config cfg.json] [flags] <command> ...

Commands: augment, anchors, eval, replay, split.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path
from typing import Sequence

from . import alarm as alarm_mod
from . import anchors as anchors_mod
from . import dataset as dataset_mod
from .config import GlobalConfig, load_config
from .detect import load_detection_stream
from .errors import DatasetError, FirewatchError
from .evaluation import evaluate_run, render_detection_table, render_recognition_table
from .geometry import Detection


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="firewatch",
        description="evaluation toolkit for fire and smoke detection pipelines",
    )
    parser.add_argument("--config", type=Path, default=None,
                        help="JSON config file (defaults apply when omitted)")
    parser.add_argument("--seed", type=int, default=None,
                        help="RNG seed for clustering and splitting")
    parser.add_argument("--iou-thresh", type=float, default=None,
                        help="IoU threshold for matching")
    parser.add_argument("--conf-thresh", type=float, default=None,
                        help="confidence threshold for detections")
    parser.add_argument("--window", type=int, default=None,
                        help="temporal smoothing window, in frames")
    parser.add_argument("--strict-repro", action="store_true",
                        help="refuse implicit seeds on seeded commands")
    parser.add_argument("--format", choices=("table", "structured"), default="table",
                        help="output style for result-bearing commands")

    sub = parser.add_subparsers(dest="command", metavar="command")

    p_augment = sub.add_parser("augment", help="expand a labeled dataset 4x")
    p_augment.add_argument("src", type=Path, help="source dataset directory")
    p_augment.add_argument("dest", type=Path, help="output directory")

    p_anchors = sub.add_parser("anchors", help="cluster box sizes into anchors")
    p_anchors.add_argument("dataset", type=Path, help="labeled dataset directory")
    p_anchors.add_argument("--k", type=int, default=None, help="number of anchors")
    p_anchors.add_argument("--canvas", type=int, default=None,
                           help="square canvas size in pixels")
    p_anchors.add_argument("--per-class", action="store_true",
                           help="cluster each class separately")
    p_anchors.add_argument("--out", type=Path, default=None,
                           help="also write the anchors line to this file")

    p_eval = sub.add_parser("eval", help="score a detection stream against labels")
    p_eval.add_argument("truth", type=Path, help="labeled dataset directory")
    p_eval.add_argument("detections", type=Path, help="detection stream file")
    p_eval.add_argument("--mode", choices=("detect", "recognize", "both"),
                        default="both", help="which perspective to print")
    p_eval.add_argument("--report", type=Path, default=None,
                        help="write the full structured report to this file")

    p_replay = sub.add_parser("replay", help="run a scenario and report latency")
    p_replay.add_argument("scenario", type=Path, help="scenario JSON file")
    p_replay.add_argument("--log", type=Path, default=None,
                          help="write alarm transition events to this file")
    p_replay.add_argument("--trace", type=Path, default=None,
                          help="write per-frame region traces to this file")

    p_split = sub.add_parser("split", help="stratified train/test manifest split")
    p_split.add_argument("dataset", type=Path, help="labeled dataset directory")
    p_split.add_argument("--fraction", type=float, default=None,
                         help="train fraction (0,1)")
    p_split.add_argument("--out-train", type=Path, required=True)
    p_split.add_argument("--out-test", type=Path, required=True)

    return parser


def _effective_config(args: argparse.Namespace) -> GlobalConfig:
    cfg = load_config(args.config)
    if args.iou_thresh is not None:
        cfg = dataclasses.replace(
            cfg, eval=dataclasses.replace(cfg.eval, iou_threshold=args.iou_thresh))
    if args.conf_thresh is not None:
        cfg = dataclasses.replace(
            cfg,
            eval=dataclasses.replace(cfg.eval, confidence_threshold=args.conf_thresh),
            detector=dataclasses.replace(cfg.detector,
                                         confidence_threshold=args.conf_thresh),
        )
    if args.window is not None:
        cfg = dataclasses.replace(
            cfg, temporal=dataclasses.replace(cfg.temporal, window=args.window))
    if args.seed is not None:
        cfg = dataclasses.replace(
            cfg, split=dataclasses.replace(cfg.split, seed=args.seed))
    return cfg


def _require_seed(args: argparse.Namespace) -> None:
    if args.strict_repro and args.seed is None:
        raise FirewatchError("--strict-repro requires an explicit --seed")


def _indexed(path: Path) -> dataset_mod.DatasetIndex:
    index = dataset_mod.index_dataset(path)
    if not index.images:
        raise DatasetError(f"no labeled images found under {path}")
    return index


def cmd_augment(args: argparse.Namespace, cfg: GlobalConfig) -> int:
    index = _indexed(args.src)
    out = dataset_mod.augment(index, cfg.augment, args.dest)
    print(f"images: {index.counts[2]} -> {out.counts[2]}")
    print(f"wrote {args.dest}")
    return 0


def _print_anchor_result(anchor_set, report, prefix: str = "") -> None:
    print(f"{prefix}{anchor_set.format_line()}")
    print(f"{prefix}mean IoU: {report.mean_iou:.4f}  iterations: {report.iterations}  "
          f"sizes: {','.join(str(s) for s in report.sizes)}")


def cmd_anchors(args: argparse.Namespace, cfg: GlobalConfig) -> int:
    _require_seed(args)
    seed = args.seed if args.seed is not None else 0
    k = args.k if args.k is not None else cfg.anchors.k
    canvas = args.canvas if args.canvas is not None else cfg.anchors.canvas_px
    index = _indexed(args.dataset)
    if args.per_class:
        results = anchors_mod.per_class_anchors(index, k=k, seed=seed, canvas_px=canvas)
        if args.format == "structured":
            obj = {
                class_id.label: {
                    "canvas": anchor_set.canvas_px,
                    "anchors": [list(a) for a in anchor_set.anchors],
                    "mean_iou": report.mean_iou,
                    "iterations": report.iterations,
                    "sizes": list(report.sizes),
                }
                for class_id, (anchor_set, report) in results.items()
            }
            print(json.dumps(obj, indent=2))
        else:
            for class_id, (anchor_set, report) in results.items():
                print(f"{class_id.label}:")
                _print_anchor_result(anchor_set, report, prefix="  ")
        return 0
    whs = anchors_mod.collect_wh(index, canvas_px=canvas)
    anchor_set, report = anchors_mod.kmeans_anchors(whs, k=k, seed=seed, canvas_px=canvas)
    if args.format == "structured":
        obj = {
            "canvas": anchor_set.canvas_px,
            "anchors": [list(a) for a in anchor_set.anchors],
            "mean_iou": report.mean_iou,
            "iterations": report.iterations,
            "sizes": list(report.sizes),
        }
        print(json.dumps(obj, indent=2))
    else:
        _print_anchor_result(anchor_set, report)
    if args.out is not None:
        args.out.write_text(anchor_set.format_line() + "\n", encoding="utf-8")
        print(f"wrote {args.out}")
    return 0


def _stream_to_predictions(path: Path) -> dict[str, list[Detection]]:
    """Group a detection stream by stream id; the stream id is the image id."""
    preds: dict[str, list[Detection]] = {}
    for frame in load_detection_stream(path):
        preds.setdefault(frame.stream_id, []).extend(frame.detections)
    return preds


def cmd_eval(args: argparse.Namespace, cfg: GlobalConfig) -> int:
    index = _indexed(args.truth)
    gts = {image.image_id: list(image.boxes) for image in index.images}
    preds = _stream_to_predictions(args.detections)
    for image_id in gts:
        preds.setdefault(image_id, [])
    report = evaluate_run(preds, gts, cfg.eval, dataset_name=index.name)
    if args.format == "structured":
        print(report.to_json())
    else:
        blocks = []
        if args.mode in ("detect", "both"):
            blocks.append(render_detection_table(report))
        if args.mode in ("recognize", "both"):
            blocks.append(render_recognition_table(report))
        print("\n\n".join(blocks))
    if args.report is not None:
        args.report.write_text(report.to_json() + "\n", encoding="utf-8")
        print(f"wrote {args.report}")
    return 0


def cmd_replay(args: argparse.Namespace, cfg: GlobalConfig) -> int:
    scenario = alarm_mod.load_scenario(args.scenario, detector=cfg.detector,
                                       temporal=cfg.temporal, alarm=cfg.alarm)
    result = alarm_mod.run_scenario(scenario, collect_trace=args.trace is not None)
    if args.format == "structured":
        obj = {
            "scenario": scenario.name,
            "frames": result.frames,
            "camera_alarm_s": result.timeline.camera_alarm_s,
            "reference": [[label, t] for label, t in result.timeline.reference_alarms],
            "gains": [[label, g] for label, g in result.timeline.gains],
        }
        print(json.dumps(obj, indent=2))
    else:
        print(f"scenario: {scenario.name}  frames: {result.frames}")
        print(alarm_mod.format_timeline(result.timeline))
    if args.log is not None:
        args.log.write_text("".join(line + "\n" for line in result.log_lines),
                            encoding="utf-8")
        print(f"wrote {args.log}")
    if args.trace is not None:
        args.trace.write_text("".join(line + "\n" for line in result.trace_lines),
                              encoding="utf-8")
        print(f"wrote {args.trace}")
    return 0


def cmd_split(args: argparse.Namespace, cfg: GlobalConfig) -> int:
    _require_seed(args)
    spec = cfg.split
    if args.fraction is not None:
        spec = dataclasses.replace(spec, train_fraction=args.fraction)
    index = _indexed(args.dataset)
    train, test = dataset_mod.split(index, spec)
    dataset_mod.write_manifest(train, args.out_train)
    dataset_mod.write_manifest(test, args.out_test)
    print(f"train: {train.counts[2]} -> {args.out_train}")
    print(f"test: {test.counts[2]} -> {args.out_test}")
    return 0


_COMMANDS = {
    "augment": cmd_augment,
    "anchors": cmd_anchors,
    "eval": cmd_eval,
    "replay": cmd_replay,
    "split": cmd_split,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return 2
    try:
        cfg = _effective_config(args)
        return _COMMANDS[args.command](args, cfg)
    except (FirewatchError, ValueError, OSError) as exc:
        print(f"firewatch: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
