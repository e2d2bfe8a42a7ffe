"""Command-line entry point.

One verb for now::

    memprobe-figures render --spec figure.yaml

Exit codes: 0 on success, 2 for a bad spec file, 3 for input tables that do
not match the expected schema (the message names the missing columns), and
1 for any other renderer failure such as an unreadable input file.
"""

from __future__ import annotations

import argparse
import sys

from .errors import FigureError
from .render import render
from .spec import KINDS, load_spec


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="memprobe-figures",
        description="Render static figures from memprobe result CSVs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p_render = sub.add_parser(
        "render",
        help=f"render one figure (kinds: {', '.join(KINDS)})",
    )
    p_render.add_argument(
        "--spec",
        required=True,
        metavar="PATH",
        help="YAML figure spec (kind, inputs, output, optional title)",
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        out = render(load_spec(args.spec))
    except FigureError as exc:
        print(f"memprobe-figures {args.command}: error: {exc}", file=sys.stderr)
        return exc.exit_code
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
