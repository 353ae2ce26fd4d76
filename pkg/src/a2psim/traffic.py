"""Teleconference workload: CBR voice uplink per active STA, mixed downlink.

The timeline is divided into fixed windows of `interval_ns`. An STA whose
stream is on generates exactly one uplink packet per window, at an instant
drawn uniformly inside the window's opening `gen_window_ns` slice.
A co-located mixing server waits for every active STA's packet of a window
(or that window's delay budget) and then emits a single broadcast downlink
frame of constant size.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import partial
from random import Random
from typing import Callable

from .errors import ConfigError
from .kernel import Simulator

IN_FLIGHT = "in-flight"
ON_TIME = "on-time"
OUTDATED = "outdated"
DROPPED = "dropped"


@dataclass(frozen=True)
class AudioParams:
    interval_ns: int        # window length, one packet per window
    gen_window_ns: int      # generation happens inside the window's first slice
    ul_samples: int
    ul_sample_bits: int
    dl_samples: int
    dl_sample_bits: int
    header_bits: int

    def __post_init__(self) -> None:
        if not 0 < self.gen_window_ns <= self.interval_ns:
            raise ConfigError("gen_window: must satisfy 0 < B <= interval")
        for name, bits in (("ul", self.ul_samples * self.ul_sample_bits + self.header_bits),
                           ("dl", self.dl_samples * self.dl_sample_bits + self.header_bits)):
            if bits % 8:
                raise ConfigError(f"{name} payload: {bits} bits is not a whole byte count")

    @property
    def ul_bytes(self) -> int:
        return (self.ul_samples * self.ul_sample_bits + self.header_bits) // 8

    @property
    def dl_bytes(self) -> int:
        return (self.dl_samples * self.dl_sample_bits + self.header_bits) // 8


def sample_bounded_exp(rng: Random, mean_ns: int, bound_ns: int) -> int:
    """Exponential holding time clipped to an upper bound, in ns."""
    draw = int(rng.expovariate(1.0 / mean_ns))
    return draw if draw < bound_ns else bound_ns


@dataclass(frozen=True)
class OnPeriod:
    sta: int
    period_id: int
    start_ns: int
    end_ns: int


@dataclass(slots=True)
class UlPacket:
    sta: int
    window: int
    gen_ns: int
    size_bytes: int
    period_id: int
    period_start_ns: int
    disposition: str
    ap_rx_ns: int | None


@dataclass(frozen=True)
class DlFrame:
    window: int
    size_bytes: int


def build_topology(rng: Random, n_total: int, n_initial: int,
                   n_joining: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Disjoint random STA id sets (ids 1..n_total); AP is node 0."""
    if n_initial + n_joining > n_total:
        raise ConfigError("active: initial plus joining STAs exceed n_total")
    ids = list(range(1, n_total + 1))
    initial = sorted(rng.sample(ids, n_initial))
    rest = [i for i in ids if i not in set(initial)]
    joining = sorted(rng.sample(rest, n_joining))
    return tuple(initial), tuple(joining)


def build_schedules(rng: Random, initial: tuple[int, ...], joining: tuple[int, ...],
                    params: AudioParams, duration_ns: int, tau_mean_ns: int,
                    tau_max_ns: int) -> list[OnPeriod]:
    """On/off stream schedule for every STA, drawn in a fixed order.

    Initial STAs stream for the whole run. Joining STAs start off and then
    alternate bounded-exponential off and on holding times.
    """
    periods: list[OnPeriod] = []
    pid = 0
    for sta in initial:
        periods.append(OnPeriod(sta, pid, 0, duration_ns))
        pid += 1
    for sta in joining:
        t = 0
        while True:
            t += sample_bounded_exp(rng, tau_mean_ns, tau_max_ns)  # off time
            if t >= duration_ns:
                break
            on = sample_bounded_exp(rng, tau_mean_ns, tau_max_ns)
            end = t + on
            periods.append(OnPeriod(sta, pid, t, min(end, duration_ns)))
            pid += 1
            t = end
    return periods


def draw_gen_times(rng: Random, period: OnPeriod, interval_ns: int,
                   gen_window_ns: int) -> tuple[tuple[int, int], ...]:
    """(window index, generation time) pairs for one on-period.

    Window k yields a packet when its drawn instant (uniform inside the
    window's opening slice) falls inside the period; the draw count depends
    only on the period bounds, so replaying the same rng reproduces it.
    """
    k_lo = (period.start_ns - gen_window_ns) // interval_ns + 1
    if k_lo < 0:
        k_lo = 0
    k_hi = (period.end_ns - 1) // interval_ns
    out = []
    for k in range(k_lo, k_hi + 1):
        t = k * interval_ns + rng.randrange(gen_window_ns)
        if period.start_ns <= t < period.end_ns:
            out.append((k, t))
    return tuple(out)


GenMap = dict[OnPeriod, tuple[tuple[int, int], ...]]


def build_gen_map(rng: Random, periods: list[OnPeriod],
                  params: AudioParams) -> GenMap:
    """Generation instants for every period, drawn in schedule order."""
    return {p: draw_gen_times(rng, p, params.interval_ns, params.gen_window_ns)
            for p in periods}


def expected_by_window(gen_map: GenMap) -> dict[int, frozenset[int]]:
    """For each window, the STA set whose stream generates a packet in it."""
    acc: dict[int, set[int]] = {}
    for p, times in gen_map.items():
        for k, _ in times:
            acc.setdefault(k, set()).add(p.sta)
    return {k: frozenset(v) for k, v in acc.items()}


class PacketSource:
    """Schedules the generation events of every on-period into the simulator."""

    def __init__(self, sim: Simulator, gen_map: GenMap, params: AudioParams,
                 sink: Callable[[UlPacket], None]):
        self.sim = sim
        self.params = params
        self.sink = sink
        self.generated = 0
        for period, times in gen_map.items():
            if times:
                sim.schedule(partial(self._gen, period, times, 0), times[0][1])

    def _gen(self, period: OnPeriod, times: tuple[tuple[int, int], ...],
             i: int) -> None:
        window, t = times[i]
        pkt = UlPacket(period.sta, window, t, self.params.ul_bytes,
                       period.period_id, period.start_ns, IN_FLIGHT, None)
        self.generated += 1
        self.sink(pkt)
        if i + 1 < len(times):
            self.sim.schedule(partial(self._gen, period, times, i + 1),
                              times[i + 1][1])


class MixServer:
    """Emits one downlink broadcast per window once every expected uplink
    arrived or the window's delay budget ran out, whichever is earlier."""

    def __init__(self, sim: Simulator, expected: dict[int, frozenset[int]],
                 interval_ns: int, dl_bytes: int,
                 enqueue_dl: Callable[[DlFrame], None]):
        self.sim = sim
        self.expected = expected
        self.dl_bytes = dl_bytes
        self.enqueue_dl = enqueue_dl
        self._arrived: dict[int, set[int]] = {}
        self._closed: set[int] = set()
        for k in expected:
            sim.schedule(partial(self._deadline, k), (k + 1) * interval_ns)

    def on_arrival(self, sta: int, window: int) -> None:
        if window in self._closed or window not in self.expected:
            return
        got = self._arrived.setdefault(window, set())
        got.add(sta)
        if got >= self.expected[window]:
            self._close(window)

    def _deadline(self, window: int) -> None:
        if window not in self._closed:
            self._close(window)

    def _close(self, window: int) -> None:
        self._closed.add(window)
        self.enqueue_dl(DlFrame(window, self.dl_bytes))
