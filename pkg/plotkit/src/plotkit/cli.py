"""Command line: plotkit plot --recipe PATH."""

import argparse
import sys

from .render import plot_series


def main(argv=None):
    parser = argparse.ArgumentParser(prog="plotkit",
                                     description="Render figures from nafdyn CSV series")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("plot", help="render a figure recipe")
    p.add_argument("--recipe", required=True)
    p.add_argument("--dpi", type=int, default=150)
    args = parser.parse_args(argv)
    out = plot_series(args.recipe, dpi=args.dpi)
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
