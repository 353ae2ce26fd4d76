"""Single runs, experiment sweeps, and the CSV schemas they emit."""

from __future__ import annotations

import csv
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Iterable, TextIO

from .config import RunConfig, build_config
from .errors import ConfigError
from .kernel import TraceLog
from .mac import Scheme
from .metrics import BoxStats, RunSummary
from .sim import Simulation

SUMMARY_SCHEMA = "a2psim-summary v1"
PACKETS_SCHEMA = "a2psim-packets v1"

SUMMARY_FIELDS = [
    "scheme", "active", "seed", "config_hash", "duration_ns",
    "generated", "on_time", "outdated", "dropped", "in_flight", "loss_ratio",
    "e2e_count", "e2e_mean_ns", "e2e_q1_ns", "e2e_median_ns", "e2e_q3_ns",
    "e2e_whisker_low_ns", "e2e_whisker_high_ns", "e2e_max_ns",
    "e2e_high_outlier_mean_ns",
    "wakeup_count", "wakeup_mean_ns", "dl_sent", "dl_lost", "max_exchange_ns",
]

PACKETS_FIELDS = ["sta", "window", "gen_ns", "size_bytes", "period_id",
                  "period_start_ns", "disposition", "ap_rx_ns"]

DEFAULT_ACTIVE_COUNTS = (8, 13, 19, 24, 30, 36)
DEFAULT_SEEDS = tuple(range(1, 11))


def run_one(cfg: RunConfig, *, trace: TraceLog | None = None) -> RunSummary:
    return Simulation(cfg, trace=trace).run()


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)  # repr round-trips floats exactly
    return str(value)


def summary_row(s: RunSummary) -> dict[str, str]:
    box = s.e2e_box
    return {
        "scheme": s.scheme,
        "active": str(s.active_count),
        "seed": str(s.seed),
        "config_hash": s.config_hash,
        "duration_ns": str(s.duration_ns),
        "generated": str(s.generated),
        "on_time": str(s.delivered_on_time),
        "outdated": str(s.outdated),
        "dropped": str(s.dropped),
        "in_flight": str(s.in_flight),
        "loss_ratio": repr(s.loss_ratio),
        "e2e_count": str(s.e2e_count),
        "e2e_mean_ns": _fmt(s.e2e_mean_ns),
        "e2e_q1_ns": _fmt(box.q1 if box else None),
        "e2e_median_ns": _fmt(box.median if box else None),
        "e2e_q3_ns": _fmt(box.q3 if box else None),
        "e2e_whisker_low_ns": _fmt(box.whisker_low if box else None),
        "e2e_whisker_high_ns": _fmt(box.whisker_high if box else None),
        "e2e_max_ns": _fmt(s.e2e_max_ns),
        "e2e_high_outlier_mean_ns": _fmt(s.e2e_high_outlier_mean_ns),
        "wakeup_count": str(s.wakeup_count),
        "wakeup_mean_ns": _fmt(s.wakeup_mean_ns),
        "dl_sent": str(s.dl_sent),
        "dl_lost": str(s.dl_lost),
        "max_exchange_ns": str(s.max_exchange_ns),
    }


@dataclass(frozen=True)
class SummaryRow:
    """One parsed summary.csv row; numeric fields typed, blanks become None."""
    scheme: str
    active: int
    seed: int
    config_hash: str
    duration_ns: int
    generated: int
    on_time: int
    outdated: int
    dropped: int
    in_flight: int
    loss_ratio: float
    e2e_count: int
    e2e_mean_ns: float | None
    e2e_q1_ns: float | None
    e2e_median_ns: float | None
    e2e_q3_ns: float | None
    e2e_whisker_low_ns: float | None
    e2e_whisker_high_ns: float | None
    e2e_max_ns: float | None
    e2e_high_outlier_mean_ns: float | None
    wakeup_count: int
    wakeup_mean_ns: float | None
    dl_sent: int
    dl_lost: int
    max_exchange_ns: int


def _opt_float(text: str) -> float | None:
    return float(text) if text else None


def parse_summary_row(row: dict[str, str]) -> SummaryRow:
    return SummaryRow(
        scheme=row["scheme"],
        active=int(row["active"]),
        seed=int(row["seed"]),
        config_hash=row["config_hash"],
        duration_ns=int(row["duration_ns"]),
        generated=int(row["generated"]),
        on_time=int(row["on_time"]),
        outdated=int(row["outdated"]),
        dropped=int(row["dropped"]),
        in_flight=int(row["in_flight"]),
        loss_ratio=float(row["loss_ratio"]),
        e2e_count=int(row["e2e_count"]),
        e2e_mean_ns=_opt_float(row["e2e_mean_ns"]),
        e2e_q1_ns=_opt_float(row["e2e_q1_ns"]),
        e2e_median_ns=_opt_float(row["e2e_median_ns"]),
        e2e_q3_ns=_opt_float(row["e2e_q3_ns"]),
        e2e_whisker_low_ns=_opt_float(row["e2e_whisker_low_ns"]),
        e2e_whisker_high_ns=_opt_float(row["e2e_whisker_high_ns"]),
        e2e_max_ns=_opt_float(row["e2e_max_ns"]),
        e2e_high_outlier_mean_ns=_opt_float(row["e2e_high_outlier_mean_ns"]),
        wakeup_count=int(row["wakeup_count"]),
        wakeup_mean_ns=_opt_float(row["wakeup_mean_ns"]),
        dl_sent=int(row["dl_sent"]),
        dl_lost=int(row["dl_lost"]),
        max_exchange_ns=int(row["max_exchange_ns"]),
    )


def read_summary_csv(path: str) -> list[SummaryRow]:
    with open(path, newline="", encoding="utf-8") as fh:
        plain = (line for line in fh if not line.startswith("#"))
        reader = csv.DictReader(plain)
        return [parse_summary_row(row) for row in reader]


class SummaryWriter:
    """Row-atomic summary.csv writer; each row is flushed as it lands."""

    def __init__(self, fh: TextIO, *, config_line: str | None = None):
        self.fh = fh
        fh.write(f"# {SUMMARY_SCHEMA}\n")
        if config_line:
            fh.write(f"# config {config_line}\n")
        self.writer = csv.DictWriter(fh, fieldnames=SUMMARY_FIELDS,
                                     lineterminator="\n")
        self.writer.writeheader()
        fh.flush()

    def write(self, summary: RunSummary) -> None:
        self.writer.writerow(summary_row(summary))
        self.fh.flush()


def write_packets_csv(path: str, sim: Simulation) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# {PACKETS_SCHEMA}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(PACKETS_FIELDS)
        for p in sim.ledger.packets:
            writer.writerow([p.sta, p.window, p.gen_ns, p.size_bytes, p.period_id,
                             p.period_start_ns, p.disposition,
                             "" if p.ap_rx_ns is None else p.ap_rx_ns])


@dataclass(frozen=True)
class SweepSpec:
    schemes: tuple[Scheme, ...]
    active_counts: tuple[int, ...]
    seeds: tuple[int, ...]

    def configs(self, base: RunConfig) -> list[RunConfig]:
        out = []
        for scheme in sorted(self.schemes, key=lambda s: s.value):
            for count in sorted(self.active_counts):
                for seed in sorted(self.seeds):
                    out.append(replace(base, scheme=scheme, active=count,
                                       seed=seed))
        return out


def default_sweep() -> SweepSpec:
    return SweepSpec(schemes=tuple(Scheme), active_counts=DEFAULT_ACTIVE_COUNTS,
                     seeds=DEFAULT_SEEDS)


def _parse_int_list(text: str, key: str) -> tuple[int, ...]:
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            lo, _, hi = part.partition("..")
            try:
                out.extend(range(int(lo), int(hi) + 1))
            except ValueError:
                raise ConfigError(f"{key}: bad range {part!r}") from None
        else:
            try:
                out.append(int(part))
            except ValueError:
                raise ConfigError(f"{key}: bad integer {part!r}") from None
    if not out:
        raise ConfigError(f"{key}: empty list")
    return tuple(out)


def parse_sweep_file(path: str) -> SweepSpec:
    """Sweep files hold three keys: schemes, counts, seeds (comma lists,
    seeds/counts accepting lo..hi ranges)."""
    spec = {"schemes": None, "counts": None, "seeds": None}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            key, eq, value = stripped.partition("=")
            key = key.strip()
            if not eq or key not in spec:
                raise ConfigError(f"{path}:{lineno}: expected schemes/counts/seeds")
            spec[key] = value.strip()
    base = default_sweep()
    schemes = base.schemes
    if spec["schemes"]:
        try:
            schemes = tuple(Scheme(s.strip()) for s in spec["schemes"].split(","))
        except ValueError as exc:
            raise ConfigError(f"schemes: {exc}") from None
    counts = (_parse_int_list(spec["counts"], "counts")
              if spec["counts"] else base.active_counts)
    seeds = (_parse_int_list(spec["seeds"], "seeds")
             if spec["seeds"] else base.seeds)
    return SweepSpec(schemes=schemes, active_counts=counts, seeds=seeds)


def _run_config(cfg: RunConfig) -> RunSummary:
    return run_one(cfg)


def run_sweep(spec: SweepSpec, base: RunConfig, out_path: str, *,
              workers: int = 1) -> list[RunSummary]:
    """Run the grid, appending each row to out_path as it completes.

    With multiple workers, rows land in completion order and the file is
    rewritten in (scheme, active, seed) order once every run has finished;
    a partial file is valid CSV either way.
    """
    configs = spec.configs(base)
    results: list[RunSummary] = []
    with open(out_path, "w", newline="", encoding="utf-8") as fh:
        writer = SummaryWriter(fh, config_line=base.canonical())
        if workers <= 1:
            for cfg in configs:
                summary = run_one(cfg)
                results.append(summary)
                writer.write(summary)
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                for summary in pool.map(_run_config, configs):
                    results.append(summary)
                    writer.write(summary)
    order = {(c.scheme.value, c.active, c.seed): i for i, c in enumerate(configs)}
    by_key = sorted(results, key=lambda s: order[(s.scheme, s.active_count, s.seed)])
    if by_key != results:
        with open(out_path, "w", newline="", encoding="utf-8") as fh:
            writer = SummaryWriter(fh, config_line=base.canonical())
            for summary in by_key:
                writer.write(summary)
    return by_key


def build_base_config(config_path: str | None,
                      overrides: dict[str, str] | None = None) -> RunConfig:
    return build_config(config_path, overrides)


def ensure_out_dir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def summaries_equal(a: Iterable[RunSummary], b: Iterable[RunSummary]) -> bool:
    def key(s: RunSummary):
        return summary_row(s)
    return [key(s) for s in a] == [key(s) for s in b]


def box_from_row(row: SummaryRow) -> BoxStats | None:
    if row.e2e_median_ns is None:
        return None
    return BoxStats(q1=row.e2e_q1_ns, median=row.e2e_median_ns, q3=row.e2e_q3_ns,
                    whisker_low=row.e2e_whisker_low_ns,
                    whisker_high=row.e2e_whisker_high_ns, outliers=())
