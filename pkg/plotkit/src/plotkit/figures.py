"""The three figure styles: delay box plot, loss curves, wake-up curves.

Each renderer writes the raster image to out_path plus a plain-text sidecar
(out_path renamed to .data.csv) holding exactly the plotted series, so tests
can compare data byte-for-byte without diffing image files.  Rendering is a
pure function of the parsed table: the same input bytes produce the same
sidecar bytes.
"""

from __future__ import annotations

import math
import statistics
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
from matplotlib.patches import Patch

from .table import ACCEPTED_SCHEMA, Row, SummaryTable

NS_PER_MS = 1e6

SCHEME_LABELS = {
    "a2p": "A2P",
    "edca": "EDCA only",
    "ofdma": "OFDMA only",
    "ofdma-edca": "OFDMA + EDCA",
}


class PlotDataError(ValueError):
    """The table holds nothing the requested figure could draw."""


def _label(scheme: str) -> str:
    return SCHEME_LABELS.get(scheme, scheme)


def _p99(values: list[float]) -> float:
    ordered = sorted(values)
    return ordered[math.ceil(0.99 * len(ordered)) - 1]


_STATISTICS = {"mean": statistics.fmean, "p99": _p99}


def _sidecar_path(out_path: Path) -> Path:
    return out_path.with_suffix(".data.csv")


def _write_sidecar(path: Path, kind: str, header: tuple[str, ...],
                   rows: list[tuple]) -> None:
    with path.open("w", encoding="utf-8") as fh:
        fh.write(f"# plotkit {kind} v1\n")
        fh.write(f"# source {ACCEPTED_SCHEMA}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(repr(v) if isinstance(v, float) else str(v)
                              for v in row) + "\n")


def _save(fig, out_path: Path) -> None:
    fig.savefig(out_path, dpi=150, bbox_inches="tight")
    plt.close(fig)


# -- delay box plot --------------------------------------------------------------

def _mean_box_ms(rows: list[Row]) -> tuple[float, ...] | None:
    """Component-wise seed mean of the five-number summaries, in ms.

    A single run passes through unchanged; cells whose runs all delivered
    nothing yield None and are left out of the figure.
    """
    boxes = [r.e2e_box_ns for r in rows if r.e2e_box_ns is not None]
    if not boxes:
        return None
    return tuple(statistics.fmean(parts) / NS_PER_MS for parts in zip(*boxes))


def render_delay_boxplot(table: SummaryTable, out_path: str | Path) -> tuple[Path, Path]:
    """Grouped box plot: x = active stations, one box per scheme per count."""
    out_path = Path(out_path)
    schemes = table.schemes
    counts = table.active_counts
    cells: dict[tuple[str, int], tuple[float, ...]] = {}
    for scheme in schemes:
        for count in counts:
            box = _mean_box_ms(table.cell(scheme, count))
            if box is not None:
                cells[(scheme, count)] = box
    if not cells:
        raise PlotDataError("no delay distributions to plot")

    fig, ax = plt.subplots(figsize=(9, 4.5))
    group = len(schemes) + 1
    for i, scheme in enumerate(schemes):
        stats = []
        positions = []
        for j, count in enumerate(counts):
            box = cells.get((scheme, count))
            if box is None:
                continue
            lo, q1, med, q3, hi = box
            stats.append({"whislo": lo, "q1": q1, "med": med, "q3": q3,
                          "whishi": hi, "fliers": []})
            positions.append(j * group + i)
        if stats:
            ax.bxp(stats, positions=positions, widths=0.8, showfliers=False,
                   boxprops={"color": f"C{i}"}, whiskerprops={"color": f"C{i}"},
                   capprops={"color": f"C{i}"}, medianprops={"color": f"C{i}"})
    ax.set_xticks([j * group + (len(schemes) - 1) / 2 for j in range(len(counts))])
    ax.set_xticklabels([str(c) for c in counts])
    ax.set_xlabel("Active stations")
    ax.set_ylabel("End-to-end delay (ms)")
    ax.grid(True, axis="y", alpha=0.3)
    ax.legend(handles=[Patch(color=f"C{i}", label=_label(s))
                       for i, s in enumerate(schemes)])
    _save(fig, out_path)

    sidecar = _sidecar_path(out_path)
    _write_sidecar(sidecar, "delay",
                   ("scheme", "active", "whisker_low_ms", "q1_ms", "median_ms",
                    "q3_ms", "whisker_high_ms"),
                   [(s, c, *cells[(s, c)]) for s in schemes for c in counts
                    if (s, c) in cells])
    return out_path, sidecar


# -- loss and wake-up curves -------------------------------------------------------

def _curve_series(table: SummaryTable, value, statistic: str,
                  what: str) -> dict[str, list[tuple[int, float]]]:
    """Per-scheme [(active, cross-seed statistic of value(row))] series."""
    stat = _STATISTICS[statistic]
    series: dict[str, list[tuple[int, float]]] = {}
    for scheme in table.schemes:
        points = []
        for count in table.active_counts:
            values = [v for r in table.cell(scheme, count)
                      if (v := value(r)) is not None]
            if values:
                points.append((count, stat(values)))
        if points:
            series[scheme] = points
    if not series:
        raise PlotDataError(f"no {what} values to plot")
    return series


def render_loss_curve(table: SummaryTable, out_path: str | Path,
                      statistic: str = "mean") -> tuple[Path, Path]:
    """Loss ratio vs active count, one line per scheme, y clamped to [0, 1]."""
    out_path = Path(out_path)
    series = _curve_series(table, lambda r: r.loss_ratio, statistic, "loss")
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for i, (scheme, points) in enumerate(series.items()):
        ax.plot([c for c, _ in points], [v for _, v in points],
                marker="o", color=f"C{i}", label=_label(scheme))
    ax.set_ylim(0.0, 1.0)
    ax.set_xlabel("Active stations")
    ax.set_ylabel(f"Packet loss ratio ({statistic} over seeds)")
    ax.grid(True, alpha=0.3)
    ax.legend()
    _save(fig, out_path)

    sidecar = _sidecar_path(out_path)
    _write_sidecar(sidecar, f"loss-{statistic}",
                   ("scheme", "active", f"loss_{statistic}"),
                   [(s, c, v) for s, pts in series.items() for c, v in pts])
    return out_path, sidecar


def render_wakeup_curve(table: SummaryTable, out_path: str | Path,
                        statistic: str = "mean") -> tuple[Path, Path]:
    """Wake-up delay vs active count, one line per scheme, in ms."""
    out_path = Path(out_path)
    series = _curve_series(
        table,
        lambda r: None if r.wakeup_mean_ns is None else r.wakeup_mean_ns / NS_PER_MS,
        statistic, "wake-up")
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for i, (scheme, points) in enumerate(series.items()):
        ax.plot([c for c, _ in points], [v for _, v in points],
                marker="o", color=f"C{i}", label=_label(scheme))
    ax.set_xlabel("Active stations")
    ax.set_ylabel(f"Wake-up delay (ms, {statistic} over seeds)")
    ax.grid(True, alpha=0.3)
    ax.legend()
    _save(fig, out_path)

    sidecar = _sidecar_path(out_path)
    _write_sidecar(sidecar, f"wakeup-{statistic}",
                   ("scheme", "active", f"wakeup_{statistic}_ms"),
                   [(s, c, v) for s, pts in series.items() for c, v in pts])
    return out_path, sidecar
