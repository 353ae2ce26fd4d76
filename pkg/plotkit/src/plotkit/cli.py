"""Command-line figure renderer for summary sweeps."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .figures import (PlotDataError, render_delay_boxplot, render_loss_curve,
                      render_wakeup_curve)
from .table import SchemaError, load_table


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="plotkit",
        description="Render delay, loss, or wake-up figures from a sweep's "
                    "summary.csv; the plotted series lands next to the image "
                    "as <out>.data.csv.")
    p.add_argument("summary", metavar="SUMMARY_CSV",
                   help="summary.csv written by the simulator sweep")
    p.add_argument("--fig", required=True, choices=("delay", "loss", "wakeup"),
                   help="which figure to render")
    p.add_argument("--stat", default="mean", choices=("mean", "p99"),
                   help="cross-seed statistic for the curve figures "
                        "(the delay box plot always averages)")
    p.add_argument("--out", required=True, metavar="PATH",
                   help="output image path")
    return p


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        table = load_table(args.summary)
        if args.fig == "delay":
            image, sidecar = render_delay_boxplot(table, Path(args.out))
        elif args.fig == "loss":
            image, sidecar = render_loss_curve(table, Path(args.out),
                                               statistic=args.stat)
        else:
            image, sidecar = render_wakeup_curve(table, Path(args.out),
                                                 statistic=args.stat)
    except (SchemaError, PlotDataError, OSError) as exc:
        print(f"plotkit: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {image} and {sidecar}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
