"""`render` command: one figure per invocation from suboptcover artifacts.

Exit codes: 0 success, 1 schema-validation failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys

from .figures import RENDERERS, render
from .schemas import SchemaError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="render",
        description="Render a suboptcover CSV/JSON artifact into a figure",
    )
    parser.add_argument("--kind", required=True, choices=sorted(RENDERERS))
    parser.add_argument("--in", dest="in_path", required=True, metavar="PATH")
    parser.add_argument("--out", dest="out_path", required=True, metavar="PATH")
    parser.add_argument(
        "--alphas",
        default="",
        help="comma-separated sublevel thresholds (field kinds only)",
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    alphas = [float(v) for v in args.alphas.split(",") if v != ""]
    try:
        render(args.kind, args.in_path, args.out_path, alphas)
    except SchemaError as exc:
        print(f"schema validation failed: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
