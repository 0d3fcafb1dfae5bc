"""plot_sweep: render a sweep CSV into a static figure.

Exit codes: 0 success, 2 schema mismatch or unreadable input.
"""

from __future__ import annotations

import argparse
import sys

from .render import PlotSpec, SchemaError, render


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="plot_sweep",
        description="Render a three-measure sweep CSV into a PNG/SVG figure.",
    )
    ap.add_argument("input", help="sweep CSV file")
    ap.add_argument("output", help="image file (format from extension)")
    ap.add_argument("--bits", action="store_true", help="convert values from nats to bits")
    ap.add_argument("--title", default="Entanglement of the anyonic isotropic family")
    args = ap.parse_args(argv)
    spec = PlotSpec(args.input, args.output, title=args.title, bits=args.bits)
    try:
        render(spec)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args.output}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
