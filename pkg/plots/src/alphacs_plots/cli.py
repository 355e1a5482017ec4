"""Command-line wrapper: one figure per invocation, flags mirroring FigureSpec."""

from __future__ import annotations

import argparse
import sys

from .render import VALID_METRICS, FigureSpec, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="alphacs-plots",
        description="Render mean-curve figures from benchmark/localization results CSVs.",
    )
    parser.add_argument("--input", required=True, help="results CSV (documented schema)")
    parser.add_argument("--x", default="m", help="x-axis column: m, k, or snr_db")
    parser.add_argument(
        "--metric",
        default="rse,exact,iterations",
        help=f"comma list of panels; valid: {', '.join(VALID_METRICS)}",
    )
    parser.add_argument("--group", default="solver", help="grouping column (one line per value)")
    parser.add_argument("--out", default="figure.svg", help="output image path")
    parser.add_argument("--format", default=None, choices=("svg", "png"), help="image format")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    fmt = args.format
    if fmt is None:
        fmt = "png" if args.out.endswith(".png") else "svg"
    try:
        spec = FigureSpec(
            input_path=args.input,
            x=args.x,
            metrics=tuple(m.strip() for m in args.metric.split(",") if m.strip()),
            group=args.group,
            out=args.out,
            image_format=fmt,
        )
        result = render(spec)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {result.image_path} and {result.data_path} ({result.panels} panel(s))")
    return 0


def entry() -> None:
    sys.exit(main())
