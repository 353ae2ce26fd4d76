"""Single collision-domain radio medium with EDCA contention.

The medium is ideal: a transmission is lost only when two contenders' grant
instants fall inside the same backoff slot. Backoff is tracked arithmetically
(counted slots between busy periods) instead of per-slot timer events, which
keeps the event count proportional to transmissions rather than slots.

A contender registers three callbacks:
  on_grant(now)            sole winner; the medium is reserved for it until it
                           calls release(), with occupy()/schedule_response()
                           building up the SIFS-separated exchange
  on_collision(now) -> ns  airtime its garbled transmission occupies; the
                           callback may consume a one-shot frame (broadcast)
  on_drop(now)             retry budget exhausted, contender deregistered
"""

from __future__ import annotations

from dataclasses import dataclass
from random import Random
from typing import Callable

from .kernel import EventHandle, Simulator, TraceLog


@dataclass(frozen=True)
class EdcaParams:
    aifsn: int
    cw_min: int
    cw_max: int
    retry_limit: int

    def __post_init__(self) -> None:
        if self.aifsn < 2:
            raise ValueError(f"aifsn must be >= 2, got {self.aifsn}")
        for name, cw in (("cw_min", self.cw_min), ("cw_max", self.cw_max)):
            if cw < 0 or (cw + 1) & cw:
                raise ValueError(f"{name} must be 2^k - 1, got {cw}")
        if self.cw_min > self.cw_max:
            raise ValueError("cw_min exceeds cw_max")
        if self.retry_limit < 0:
            raise ValueError("retry_limit must be >= 0")


#: 11ax voice access category defaults
VO_PARAMS = EdcaParams(aifsn=2, cw_min=3, cw_max=7, retry_limit=7)


class _Contender:
    __slots__ = ("node", "params", "cw", "retries", "remaining", "counted_from",
                 "on_grant", "on_collision", "on_drop")

    def __init__(self, node: int, params: EdcaParams, remaining: int, counted_from: int,
                 on_grant: Callable[[int], None],
                 on_collision: Callable[[int], int],
                 on_drop: Callable[[int], None]):
        self.node = node
        self.params = params
        self.cw = params.cw_min
        self.retries = 0
        self.remaining = remaining
        self.counted_from = counted_from
        self.on_grant = on_grant
        self.on_collision = on_collision
        self.on_drop = on_drop


class Channel:
    def __init__(self, sim: Simulator, *, sifs_ns: int, slot_ns: int, rng: Random,
                 trace: TraceLog | None = None):
        self.sim = sim
        self.sifs_ns = sifs_ns
        self.slot_ns = slot_ns
        self.rng = rng
        self.trace = trace
        self.busy_until = 0
        self.collisions = 0
        self._reserved_by: int | None = None
        self._contenders: dict[int, _Contender] = {}
        self._grant_ev: EventHandle | None = None

    # -- contention ----------------------------------------------------------

    def request_access(self, node: int, params: EdcaParams, *,
                       on_grant: Callable[[int], None],
                       on_collision: Callable[[int], int],
                       on_drop: Callable[[int], None]) -> None:
        if node in self._contenders:
            raise RuntimeError(f"node {node} already contending")
        draw = self.rng.randint(0, params.cw_min)
        self._contenders[node] = _Contender(node, params, draw, self.sim.now,
                                            on_grant, on_collision, on_drop)
        if self.trace:
            self.trace.emit(self.sim.now, "edca-request", node, backoff=draw)
        self._reschedule()

    def cancel_request(self, node: int) -> bool:
        if self._contenders.pop(node, None) is None:
            return False
        self._reschedule()
        return True

    def is_contending(self, node: int) -> bool:
        return node in self._contenders

    def contender_state(self, node: int) -> tuple[int, int, int]:
        """(remaining backoff slots, current cw, retries) for white-box checks."""
        c = self._contenders[node]
        return c.remaining, c.cw, c.retries

    def _aifs(self, params: EdcaParams) -> int:
        return self.sifs_ns + params.aifsn * self.slot_ns

    def _candidate(self, c: _Contender) -> int:
        start = c.counted_from if c.counted_from > self.busy_until else self.busy_until
        return start + self._aifs(c.params) + c.remaining * self.slot_ns

    def _reschedule(self) -> None:
        if self._reserved_by is not None or not self._contenders:
            if self._grant_ev is not None:
                self.sim.cancel(self._grant_ev)
                self._grant_ev = None
            return
        t0 = min(self._candidate(c) for c in self._contenders.values())
        if self._grant_ev is not None:
            if not self._grant_ev.cancelled and self._grant_ev.fire_at == t0:
                return
            self.sim.cancel(self._grant_ev)
        self._grant_ev = self.sim.schedule(self._on_grant_event, t0)

    def _freeze(self, t_busy: int, idle_start: int, exclude: tuple[int, ...]) -> None:
        # bank backoff slots counted during the idle period that just ended
        for c in self._contenders.values():
            if c.node in exclude:
                continue
            start = c.counted_from if c.counted_from > idle_start else idle_start
            elapsed = t_busy - start - self._aifs(c.params)
            if elapsed > 0:
                used = elapsed // self.slot_ns
                c.remaining -= used if used < c.remaining else c.remaining
            c.counted_from = t_busy

    def _on_grant_event(self) -> None:
        self._grant_ev = None
        now = self.sim.now
        candidates = {n: self._candidate(c) for n, c in self._contenders.items()}
        t0 = min(candidates.values())
        if t0 > now:  # stale wakeup after a state change
            self._reschedule()
            return
        if t0 < now:
            raise RuntimeError("missed grant instant")
        # grants falling inside one slot overlap before carrier sense can defer
        winners = sorted(n for n, t in candidates.items() if t < t0 + self.slot_ns)
        if len(winners) == 1:
            node = winners[0]
            winner = self._contenders.pop(node)
            self._reserved_by = node
            if self.trace:
                self.trace.emit(now, "edca-grant", node)
            winner.on_grant(now)
        else:
            self._collide(winners, now)

    def _collide(self, winners: list[int], now: int) -> None:
        self.collisions += 1
        idle_start = self.busy_until
        duration = 0
        dropped: list[_Contender] = []
        for node in winners:
            c = self._contenders[node]
            airtime = c.on_collision(now)
            if airtime > duration:
                duration = airtime
            c.retries += 1
            if c.retries > c.params.retry_limit:
                del self._contenders[node]
                dropped.append(c)
            else:
                c.cw = min(2 * c.cw + 1, c.params.cw_max)
                c.remaining = self.rng.randint(0, c.cw)
                c.counted_from = now
        self._freeze(now, idle_start, tuple(winners))
        if now + duration > self.busy_until:
            self.busy_until = now + duration
        if self.trace:
            self.trace.emit(now, "edca-collision", -1,
                            nodes=tuple(winners), busy_ns=duration)
            for c in dropped:
                self.trace.emit(now, "edca-drop", c.node, retries=c.retries)
        for c in dropped:
            c.on_drop(now)
        self._reschedule()

    # -- reserved medium (sole winner running its exchange) -------------------

    def occupy(self, participants: tuple[int, ...] | list[int], duration_ns: int) -> int:
        """Transmit for duration_ns starting now; returns the end time."""
        if self._reserved_by is None:
            raise RuntimeError("occupy without a granted reservation")
        if not participants:
            raise ValueError("occupy with zero participants")
        now = self.sim.now
        self._freeze(now, self.busy_until, ())
        self.busy_until = now + duration_ns
        if self.trace:
            self.trace.emit(now, "occupy", self._reserved_by,
                            participants=tuple(participants), duration_ns=duration_ns)
        return self.busy_until

    def schedule_response(self, gap_ns: int, action: Callable[[], None]) -> EventHandle:
        """Schedule the next frame of the exchange exactly gap_ns after busy end."""
        if gap_ns != self.sifs_ns:
            raise ValueError(f"in-sequence responses follow after SIFS, got {gap_ns}")
        return self.sim.schedule(action, self.busy_until + gap_ns)

    def release(self) -> None:
        if self._reserved_by is None:
            raise RuntimeError("release without a reservation")
        if self.trace:
            self.trace.emit(self.sim.now, "release", self._reserved_by)
        self._reserved_by = None
        if self.sim.now > self.busy_until:
            self.busy_until = self.sim.now
        self._reschedule()
