"""Command-line entry point: CSV in, BER figure out."""

from __future__ import annotations

import argparse
import sys

from .plot import DEFAULT_FLOOR, PlotSpec, render_ber_curves
from .reader import MalformedCsvError


def build_parser():
    parser = argparse.ArgumentParser(
        prog="berplot",
        description="Render BER-vs-SNR curves from a simulator results CSV",
    )
    parser.add_argument("input_csv", help="results CSV written by onebit-mimo simulate")
    parser.add_argument("output_image", help="output image path (png, pdf, svg, ...)")
    parser.add_argument("--floor", type=float, default=DEFAULT_FLOOR,
                        help="where zero-BER points are drawn on the log axis")
    parser.add_argument("--title", default="", help="figure title")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        spec = PlotSpec(
            input_csv=args.input_csv,
            output_image=args.output_image,
            floor=args.floor,
            title=args.title,
        )
        render_ber_curves(spec)
    except MalformedCsvError as exc:
        print(f"malformed CSV: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
