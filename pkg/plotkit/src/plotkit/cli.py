"""plotkit CLI: render geovar outputs to raster images.

    plotkit timeseries diagnostics.csv --columns energy_pairing,cross_helicity -o out.png
    plotkit fieldlines snap_000100.dat -o lines.png
    plotkit current snap_000100.dat -o current.png
    plotkit convergence convergence.csv -o slopes.png
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .io import PlotkitError
from .plots import plot_convergence, plot_current, plot_fieldlines, plot_timeseries


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="plotkit", description=__doc__)
    sub = parser.add_subparsers(dest="kind", required=True)

    p_ts = sub.add_parser("timeseries")
    p_ts.add_argument("csv", type=Path)
    p_ts.add_argument("--columns", default="energy_pairing")
    p_ts.add_argument("-o", "--output", type=Path, required=True)

    for name in ("fieldlines", "current"):
        p = sub.add_parser(name)
        p.add_argument("snapshot", type=Path)
        p.add_argument("-o", "--output", type=Path, required=True)

    p_cv = sub.add_parser("convergence")
    p_cv.add_argument("table", type=Path)
    p_cv.add_argument("-o", "--output", type=Path, required=True)

    args = parser.parse_args(argv)
    try:
        if args.kind == "timeseries":
            plot_timeseries(args.csv, [c.strip() for c in args.columns.split(",") if c.strip()], args.output)
        elif args.kind == "fieldlines":
            plot_fieldlines(args.snapshot, args.output)
        elif args.kind == "current":
            plot_current(args.snapshot, args.output)
        elif args.kind == "convergence":
            _, slope = plot_convergence(args.table, args.output)
            print(f"fitted slope {slope:.2f}")
        print(f"wrote {args.output}")
        return 0
    except (PlotkitError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
