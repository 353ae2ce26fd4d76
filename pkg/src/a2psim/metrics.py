"""Per-run bookkeeping and summary statistics.

Loss counts only uplink packets that were either dropped after exhausting
their retries or delivered later than the delay budget; packets still queued
or unfinished when the run ends are excluded from the ratio entirely.
End-to-end delay pairs each on-time uplink packet with the downlink broadcast
of the same window. Wake-up delay is measured per on-period, from generation
to AP receipt of the first packet of that period that arrives at all.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass

from .traffic import DROPPED, IN_FLIGHT, ON_TIME, OUTDATED, UlPacket


@dataclass(frozen=True)
class BoxStats:
    q1: float
    median: float
    q3: float
    whisker_low: float
    whisker_high: float
    outliers: tuple[float, ...]

    def high_outlier_mean(self) -> float | None:
        """Mean of the samples above the upper whisker, if any."""
        high = [v for v in self.outliers if v > self.whisker_high]
        return statistics.fmean(high) if high else None


def box_stats(samples: list[int] | list[float]) -> BoxStats:
    """Tukey box summary: interpolated quartiles, 1.5*IQR whiskers."""
    if not samples:
        raise ValueError("box_stats of an empty sample set")
    data = sorted(samples)
    if len(data) == 1:
        v = float(data[0])
        return BoxStats(v, v, v, v, v, ())
    q1, med, q3 = statistics.quantiles(data, n=4, method="inclusive")
    iqr = q3 - q1
    lo_bound = q1 - 1.5 * iqr
    hi_bound = q3 + 1.5 * iqr
    whisker_low = float(min(s for s in data if s >= lo_bound))
    whisker_high = float(max(s for s in data if s <= hi_bound))
    outliers = tuple(float(s) for s in data if s < lo_bound or s > hi_bound)
    return BoxStats(float(q1), float(med), float(q3), whisker_low, whisker_high, outliers)


def pair_e2e(packets: list[UlPacket], dl_rx: dict[int, int]) -> list[int]:
    """Mouth-to-ear samples: DL broadcast reception minus UL generation, for
    every (sta, window) whose uplink made it in time and whose window's
    broadcast was received."""
    return [dl_rx[p.window] - p.gen_ns
            for p in packets
            if p.disposition == ON_TIME and p.window in dl_rx]


@dataclass(frozen=True)
class RunSummary:
    scheme: str
    active_count: int
    seed: int
    config_hash: str
    duration_ns: int
    generated: int
    delivered_on_time: int
    outdated: int
    dropped: int
    in_flight: int
    loss_ratio: float
    e2e_count: int
    e2e_mean_ns: float | None
    e2e_box: BoxStats | None
    e2e_max_ns: float | None
    e2e_high_outlier_mean_ns: float | None
    wakeup_count: int
    wakeup_mean_ns: float | None
    dl_sent: int
    dl_lost: int
    max_exchange_ns: int


class PacketLedger:
    """Tracks every generated packet through to its final disposition."""

    def __init__(self, budget_ns: int):
        self.budget_ns = budget_ns
        self.packets: list[UlPacket] = []
        self.dl_rx: dict[int, int] = {}
        self.dl_lost = 0
        self.wakeup_samples: list[int] = []
        self._woken: set[int] = set()

    def register(self, pkt: UlPacket) -> None:
        self.packets.append(pkt)

    def deliver(self, pkt: UlPacket, rx_ns: int) -> None:
        pkt.ap_rx_ns = rx_ns
        if pkt.period_id not in self._woken:
            # wake-up delay: AP-receipt delay of the first packet of the
            # on-period that actually arrives, whether or not it is on time
            self._woken.add(pkt.period_id)
            self.wakeup_samples.append(rx_ns - pkt.gen_ns)
        if rx_ns - pkt.gen_ns <= self.budget_ns:
            pkt.disposition = ON_TIME
        else:
            pkt.disposition = OUTDATED

    def drop(self, pkt: UlPacket) -> None:
        pkt.disposition = DROPPED

    def record_dl_sent(self, window: int, rx_ns: int) -> None:
        self.dl_rx[window] = rx_ns

    def record_dl_lost(self, window: int) -> None:
        self.dl_lost += 1

    def finalize(self, *, scheme: str, active_count: int, seed: int, config_hash: str,
                 duration_ns: int, max_exchange_ns: int) -> RunSummary:
        counts = {ON_TIME: 0, OUTDATED: 0, DROPPED: 0, IN_FLIGHT: 0}
        for p in self.packets:
            counts[p.disposition] += 1
        generated = len(self.packets)
        settled = generated - counts[IN_FLIGHT]
        lost = counts[OUTDATED] + counts[DROPPED]
        loss_ratio = lost / settled if settled else 0.0
        e2e = pair_e2e(self.packets, self.dl_rx)
        box = box_stats(e2e) if e2e else None
        return RunSummary(
            scheme=scheme,
            active_count=active_count,
            seed=seed,
            config_hash=config_hash,
            duration_ns=duration_ns,
            generated=generated,
            delivered_on_time=counts[ON_TIME],
            outdated=counts[OUTDATED],
            dropped=counts[DROPPED],
            in_flight=counts[IN_FLIGHT],
            loss_ratio=loss_ratio,
            e2e_count=len(e2e),
            e2e_mean_ns=statistics.fmean(e2e) if e2e else None,
            e2e_box=box,
            e2e_max_ns=float(max(e2e)) if e2e else None,
            e2e_high_outlier_mean_ns=box.high_outlier_mean() if box else None,
            wakeup_count=len(self.wakeup_samples),
            wakeup_mean_ns=statistics.fmean(self.wakeup_samples)
            if self.wakeup_samples else None,
            dl_sent=len(self.dl_rx) + self.dl_lost,
            dl_lost=self.dl_lost,
            max_exchange_ns=max_exchange_ns,
        )
