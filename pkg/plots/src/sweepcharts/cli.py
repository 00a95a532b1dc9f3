"""The `render-figures` command."""

from __future__ import annotations

import argparse
import sys

from .data import ChartDataError
from .render import render_figures


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="render-figures",
        description="Render delay/drop-vs-load charts from a scheduler sweep CSV.",
    )
    p.add_argument("--csv", required=True, help="sweep results CSV")
    p.add_argument("--out", required=True, help="directory for the images")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        written = render_figures(args.csv, args.out)
    except ChartDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {len(written)} images to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
