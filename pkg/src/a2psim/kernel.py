"""Deterministic discrete-event core.

All simulation time is integer nanoseconds, so every duration used by the
MAC and traffic models (SIFS, slot, OFDM symbol, timers, stream windows) is
exact and two runs with the same seed replay the same event sequence.
Events firing at the same instant are delivered in insertion order.
"""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass, field
from typing import Any, Callable

NS = 1
US = 1_000
MS = 1_000_000
SEC = 1_000_000_000

RNG_STREAMS = ("topology", "traffic", "backoff")


def rng_stream(seed: int, name: str) -> random.Random:
    """Reproducible RNG for one randomness domain, independent of the others."""
    if name not in RNG_STREAMS:
        raise ValueError(f"unknown rng stream {name!r}")
    return random.Random(f"{seed}/{name}")


class EventHandle:
    """Ticket for a scheduled action; cancel() through the simulator."""

    __slots__ = ("fire_at", "seq", "action", "cancelled", "done")

    def __init__(self, fire_at: int, seq: int, action: Callable[[], None]):
        self.fire_at = fire_at
        self.seq = seq
        self.action = action
        self.cancelled = False
        self.done = False

    def __lt__(self, other: "EventHandle") -> bool:
        return (self.fire_at, self.seq) < (other.fire_at, other.seq)


class Simulator:
    """Single-threaded event loop over an integer-nanosecond clock."""

    def __init__(self) -> None:
        self._queue: list[EventHandle] = []
        self._seq = 0
        self.now = 0

    def schedule(self, action: Callable[[], None], fire_at: int) -> EventHandle:
        if fire_at < self.now:
            raise ValueError(f"schedule into the past: {fire_at} < now {self.now}")
        ev = EventHandle(fire_at, self._seq, action)
        self._seq += 1
        heapq.heappush(self._queue, ev)
        return ev

    def schedule_in(self, action: Callable[[], None], delay: int) -> EventHandle:
        return self.schedule(action, self.now + delay)

    def cancel(self, ev: EventHandle) -> bool:
        """True if the event was still pending; False if fired or already cancelled."""
        if ev.done or ev.cancelled:
            return False
        ev.cancelled = True
        return True

    def run_until(self, t_end: int) -> int:
        """Deliver every event with fire_at <= t_end, then park the clock at t_end."""
        queue = self._queue
        while queue and queue[0].fire_at <= t_end:
            ev = heapq.heappop(queue)
            if ev.cancelled:
                continue
            self.now = ev.fire_at
            ev.done = True
            ev.action()
        self.now = t_end
        return self.now


@dataclass(frozen=True)
class TraceRecord:
    t: int
    kind: str
    node: int
    info: dict[str, Any] = field(default_factory=dict)

    def line(self) -> str:
        extra = " ".join(f"{k}={v}" for k, v in self.info.items())
        return f"{self.t} {self.kind} node={self.node} {extra}".rstrip()


class TraceLog:
    """Optional event log; pass kinds to restrict what gets recorded."""

    def __init__(self, kinds: set[str] | None = None):
        self.kinds = kinds
        self.records: list[TraceRecord] = []

    def emit(self, t: int, kind: str, node: int, **info: Any) -> None:
        if self.kinds is not None and kind not in self.kinds:
            return
        self.records.append(TraceRecord(t, kind, node, info))

    def by_kind(self, *kinds: str) -> list[TraceRecord]:
        want = set(kinds)
        return [r for r in self.records if r.kind in want]
