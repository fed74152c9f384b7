"""Command line: figures <kind> <csv> <out>."""

import argparse
import sys

from .render import KINDS, FigureError, FigureJob, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="figures", description="Render an experiment CSV into a figure"
    )
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("csv", help="experiment CSV path")
    parser.add_argument("out", help="output image path (.svg vector, .png raster)")
    args = parser.parse_args(argv)
    try:
        result = render(FigureJob(args.kind, args.csv, args.out))
    except FigureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {result['out']} ({len(result['series'])} series)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
