"""CLI: `qrmplot plot <preset|spec-file>` renders one figure from a scan or
wave export; `qrmplot presets` lists the committed styles."""

import argparse
import os
import sys

from .render import render_heatmap, render_wave
from .spec import available_presets, spec_from_file, spec_from_preset


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qrmplot", description="render rabiscan exports")
    sub = parser.add_subparsers(dest="command", required=True)

    pl = sub.add_parser("plot", help="render a preset or a JSON plot spec")
    pl.add_argument("target", help="preset name or path to a spec JSON file")
    pl.add_argument("--input", help="scan CSV/JSON or wave file/directory (presets only)")
    pl.add_argument("--out", help="output image path (presets only)")

    sub.add_parser("presets", help="list committed figure styles")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "presets":
        for name in available_presets():
            print(name)
        return 0
    try:
        if os.path.isfile(args.target) and args.target.endswith(".json"):
            spec = spec_from_file(args.target)
        else:
            if not args.input or not args.out:
                raise ValueError("preset rendering needs --input and --out")
            spec = spec_from_preset(args.target, args.input, args.out)
        path = render_wave(spec) if spec.kind == "wave" else render_heatmap(spec)
        print(f"wrote {path}")
        return 0
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
