"""Command-line entry point: single runs and scheme/count/seed sweeps."""

from __future__ import annotations

import argparse
import os
import sys

from .config import build_config, parse_time_ns
from .errors import ConfigError
from .kernel import TraceLog
from .mac import Scheme
from .runner import (SummaryWriter, default_sweep, parse_sweep_file, run_sweep,
                     summary_row, write_packets_csv)
from .sim import Simulation

# trace level 1 keeps the protocol-level records; level 2 adds every
# contention and medium event
_COARSE_KINDS = frozenset({
    "exchange-ul", "exchange-dl", "null-win", "list-add", "list-remove",
    "edca-grant", "edca-collision", "edca-drop", "edca-disable", "edca-enable",
    "mu-edca-reset",
})


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="a2psim",
        description="Discrete-event simulator of one Wi-Fi BSS running "
                    "adaptive-polling, contention, and static-polling uplink "
                    "schemes over a teleconferencing workload.")
    p.add_argument("--scheme", choices=[s.value for s in Scheme],
                   help="channel-access scheme for a single run")
    p.add_argument("--active", type=int, metavar="N",
                   help="total active STAs (initial plus joining)")
    p.add_argument("--seed", type=int, metavar="K", help="run seed")
    p.add_argument("--duration", metavar="S",
                   help="simulated time in seconds (unit suffix allowed)")
    p.add_argument("--config", metavar="PATH",
                   help="key = value configuration file")
    p.add_argument("--out", metavar="DIR",
                   help="directory for summary.csv (and packets.csv)")
    p.add_argument("--sweep", metavar="PATH", nargs="?", const="default",
                   help="run the full grid; PATH names a sweep file, "
                        "bare --sweep uses the built-in grid")
    p.add_argument("--trace", type=int, default=0, metavar="LEVEL",
                   help="0 silent, 1 protocol events, 2 everything")
    p.add_argument("--packets", action="store_true",
                   help="also write the per-packet ledger (single runs)")
    p.add_argument("--workers", type=int, default=1, metavar="W",
                   help="parallel sweep processes")
    return p


def _duration_ns(text: str) -> int:
    bare = text.strip()
    if bare and (bare[-1].isdigit() or bare[-1] == "."):
        bare += "s"  # bare numbers mean seconds on the command line
    return parse_time_ns(bare, "duration")


def _overrides(args: argparse.Namespace) -> dict[str, str]:
    out: dict[str, str] = {}
    if args.scheme is not None:
        out["scheme"] = args.scheme
    if args.active is not None:
        out["active"] = str(args.active)
    if args.seed is not None:
        out["seed"] = str(args.seed)
    if args.duration is not None:
        out["duration"] = f"{_duration_ns(args.duration)}ns"
    return out


def _make_trace(level: int) -> TraceLog | None:
    if level <= 0:
        return None
    return TraceLog(kinds=_COARSE_KINDS if level == 1 else None)


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.sweep is not None:
            return _run_sweep(args)
        return _run_single(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _run_sweep(args: argparse.Namespace) -> int:
    spec = default_sweep() if args.sweep == "default" else parse_sweep_file(args.sweep)
    base = build_config(args.config, _overrides(args))
    out_dir = args.out or "."
    os.makedirs(out_dir, exist_ok=True)
    out_path = os.path.join(out_dir, "summary.csv")
    rows = run_sweep(spec, base, out_path, workers=max(1, args.workers))
    print(f"{len(rows)} runs -> {out_path}")
    return 0


def _run_single(args: argparse.Namespace) -> int:
    cfg = build_config(args.config, _overrides(args))
    trace = _make_trace(args.trace)
    sim = Simulation(cfg, trace=trace)
    summary = sim.run()
    if trace is not None:
        for rec in trace.records:
            print(rec.line())
    for key, value in summary_row(summary).items():
        print(f"{key}: {value}")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        out_path = os.path.join(args.out, "summary.csv")
        with open(out_path, "w", newline="", encoding="utf-8") as fh:
            SummaryWriter(fh, config_line=cfg.canonical()).write(summary)
        if args.packets:
            write_packets_csv(os.path.join(args.out, "packets.csv"), sim)
    elif args.packets:
        print("error: --packets needs --out", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
