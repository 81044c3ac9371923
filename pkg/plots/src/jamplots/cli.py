"""render_all entry point: results directory in, figures directory out."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .figures import SchemaError, render_all


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="render_all",
        description="Render figures from a jamroute results directory.")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    parser.add_argument("results_dir", type=Path)
    parser.add_argument("figures_dir", type=Path)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    if not args.results_dir.is_dir():
        print(f"error: not a directory: {args.results_dir}", file=sys.stderr)
        return 2
    try:
        paths = render_all(args.results_dir, args.figures_dir)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for path in paths:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
