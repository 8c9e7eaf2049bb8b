"""Command-line entry point: render one figure from a result bundle."""

from __future__ import annotations

import argparse
import json
import sys

from .bundle import PlotError
from .render import KINDS, PlotJob, render


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oemt-plot",
        description="Render a figure from a transducer result bundle. The "
                    "bundle is read-only input; the plot kind picks which "
                    "tables are drawn.",
    )
    parser.add_argument("bundle", help="result bundle directory")
    parser.add_argument("--kind", required=True,
                        help=f"one of: {', '.join(sorted(KINDS))}")
    parser.add_argument("--out", required=True,
                        help="image file to write (.png or .svg)")
    parser.add_argument("--title", default=None)
    parser.add_argument("--xlabel", default=None)
    parser.add_argument("--ylabel", default=None)
    parser.add_argument("--logx", choices=("auto", "on", "off"),
                        default="auto",
                        help="x log scale; 'auto' decides from the data")
    parser.add_argument("--logy", action="store_true")
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    job = PlotJob(bundle=args.bundle, kind=args.kind, out=args.out,
                  title=args.title, xlabel=args.xlabel, ylabel=args.ylabel,
                  logx=args.logx, logy=args.logy)
    try:
        out = render(job)
    except PlotError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 2
    print(out)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
