"""Command line front end for the profile renderer.

    soliton-plot run1.csv run2.csv --out profiles.svg --curves a,b,Q

Any contract violation (missing file, malformed CSV, unknown curve)
prints one line to stderr and exits nonzero; the only stdout output on
success is the path of the written image.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .render import PLOTTABLE, PlotSpec, render_profiles


def _split_curves(text: str) -> tuple[str, ...]:
    return tuple(part.strip() for part in text.split(",") if part.strip())


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="soliton-plot",
        description="Render profile curves from solver trajectory CSV files.",
    )
    parser.add_argument("inputs", nargs="+", metavar="CSV", help="trajectory CSV file(s)")
    parser.add_argument(
        "--out", required=True, help="output image path (.svg and .pdf stay vector)"
    )
    parser.add_argument(
        "--curves",
        default="a,b,Q",
        help=f"comma separated curve names out of {','.join(PLOTTABLE)} (default a,b,Q)",
    )
    parser.add_argument("--title", default=None, help="figure title")
    args = parser.parse_args(argv)

    try:
        spec = PlotSpec(
            inputs=tuple(Path(p) for p in args.inputs),
            out=Path(args.out),
            curves=_split_curves(args.curves),
            title=args.title,
        )
        written = render_profiles(spec)
    except (ValueError, OSError) as exc:
        # SchemaError is a ValueError and FileNotFoundError an OSError,
        # so both contract failures and filesystem failures land here.
        print(f"soliton-plot: {exc}", file=sys.stderr)
        return 1
    print(written)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
