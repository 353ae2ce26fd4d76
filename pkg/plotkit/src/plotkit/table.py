"""summary.csv loading: schema check, typed rows, (scheme, active, seed) keys."""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from pathlib import Path

ACCEPTED_SCHEMA = "a2psim-summary v1"

# the columns the figures actually consume
REQUIRED_COLUMNS = (
    "scheme", "active", "seed", "loss_ratio",
    "e2e_whisker_low_ns", "e2e_q1_ns", "e2e_median_ns", "e2e_q3_ns",
    "e2e_whisker_high_ns", "wakeup_mean_ns",
)
# the rest of the writer's current layout; anything else draws a warning
KNOWN_COLUMNS = frozenset(REQUIRED_COLUMNS) | frozenset((
    "config_hash", "duration_ns", "generated", "on_time", "outdated",
    "dropped", "in_flight", "e2e_count", "e2e_mean_ns", "e2e_max_ns",
    "e2e_high_outlier_mean_ns", "wakeup_count", "dl_sent", "dl_lost",
    "max_exchange_ns",
))


class SchemaError(ValueError):
    """The input is not a summary file this tool understands."""


@dataclass(frozen=True)
class Row:
    scheme: str
    active: int
    seed: int
    loss_ratio: float
    # (whisker_low, q1, median, q3, whisker_high) in ns; None when the run
    # delivered nothing and the writer left the box columns blank
    e2e_box_ns: tuple[float, float, float, float, float] | None
    wakeup_mean_ns: float | None


@dataclass(frozen=True)
class SummaryTable:
    """Rows keyed by (scheme, active, seed), in file order."""

    rows: dict[tuple[str, int, int], Row]

    @property
    def schemes(self) -> list[str]:
        """Scheme names in order of first appearance."""
        return list(dict.fromkeys(key[0] for key in self.rows))

    @property
    def active_counts(self) -> list[int]:
        return sorted({key[1] for key in self.rows})

    def cell(self, scheme: str, active: int) -> list[Row]:
        return [row for (s, a, _), row in self.rows.items()
                if s == scheme and a == active]


def _opt_float(text: str) -> float | None:
    return float(text) if text else None


def _parse_row(raw: dict[str, str], line_no: int) -> Row:
    try:
        box = tuple(_opt_float(raw[col]) for col in (
            "e2e_whisker_low_ns", "e2e_q1_ns", "e2e_median_ns", "e2e_q3_ns",
            "e2e_whisker_high_ns"))
        return Row(scheme=raw["scheme"], active=int(raw["active"]),
                   seed=int(raw["seed"]), loss_ratio=float(raw["loss_ratio"]),
                   e2e_box_ns=None if None in box else box,
                   wakeup_mean_ns=_opt_float(raw["wakeup_mean_ns"]))
    except ValueError as exc:
        raise SchemaError(f"line {line_no}: {exc}") from None


def load_table(path: str | Path) -> SummaryTable:
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        first = fh.readline().rstrip("\n")
        if first != f"# {ACCEPTED_SCHEMA}":
            raise SchemaError(
                f"{path}: expected a '# {ACCEPTED_SCHEMA}' header, "
                f"got {first[:60]!r}")
        lines = [(i, ln) for i, ln in enumerate(fh, start=2)
                 if not ln.startswith("#")]
    reader = csv.DictReader(ln for _, ln in lines)
    if reader.fieldnames is None:
        raise SchemaError(f"{path}: no header row")
    missing = [c for c in REQUIRED_COLUMNS if c not in reader.fieldnames]
    if missing:
        raise SchemaError(f"{path}: missing columns {missing}")
    unknown = sorted(set(reader.fieldnames) - KNOWN_COLUMNS)
    if unknown:
        warnings.warn(f"{path}: ignoring unknown columns {unknown}")

    rows: dict[tuple[str, int, int], Row] = {}
    header_line = lines[0][0] if lines else 0
    for offset, raw in enumerate(reader):
        row = _parse_row(raw, header_line + 1 + offset)
        key = (row.scheme, row.active, row.seed)
        if key in rows:
            raise SchemaError(f"{path}: duplicate run {key}")
        rows[key] = row
    return SummaryTable(rows)
