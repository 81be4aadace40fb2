"""Command-line entry point.

    firewatch-adapter --source DIR|synthetic:N --out FILE [--weights W]
                      [--fps F] [--stub]

Exports one interchange file and prints the run's counts. Real weights need
an inference runtime this package does not bundle, so every working
invocation today uses --stub; the flag surface still mirrors the intended
weights-driven use.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from .backends import load_backend
from .errors import AdapterError
from .export import AdapterConfig, export_detections


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="firewatch-adapter",
        description="run a detector over a frame source and export the "
                    "detection interchange format",
    )
    parser.add_argument("--weights", type=Path, default=None,
                        help="detector weights file (omit when using --stub)")
    parser.add_argument("--source", required=True,
                        help="image directory or synthetic:N")
    parser.add_argument("--fps", type=float, default=1.0,
                        help="frame rate used for record timestamps")
    parser.add_argument("--out", type=Path, required=True,
                        help="output interchange file")
    parser.add_argument("--stub", action="store_true",
                        help="use the deterministic stub backend")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = AdapterConfig(weights=None if args.weights is None
                            else str(args.weights))
        backend = load_backend(cfg.weights, stub=args.stub)
        summary = export_detections(args.source, cfg, args.out,
                                    backend=backend, fps=args.fps)
    except (AdapterError, ValueError, OSError) as exc:
        print(f"firewatch-adapter: error: {exc}", file=sys.stderr)
        return 1
    print(summary.format_line())
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
