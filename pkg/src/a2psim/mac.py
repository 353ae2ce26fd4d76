"""AP and STA MAC state machines for the four channel-access schemes.

The AP alternates uplink and downlink turns. On an uplink turn it runs a
trigger-based exchange against the next round-robin block of its polling
list: buffer-status poll, status reports, trigger, simultaneous RU data
padded to the longest aggregate, and a multi-STA block ack, all SIFS
separated inside one TXOP. Downlink turns broadcast the head of the mixing
queue. Between turns the AP re-contends, gated by the access request
interval unless a downlink frame is waiting.

STAs deliver through EDCA while their contention is enabled. A successful
EDCA uplink puts them on the polling list and, in the schemes that use it,
starts the MU-EDCA timer that suspends their contention for Y; every block
ack covering their data re-arms it, so steadily polled STAs stay silent and
only newly woken ones contend.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum
from functools import partial
from typing import Callable

from .channel import Channel, EdcaParams
from .kernel import EventHandle, Simulator, TraceLog
from .phy import PhyProfile, PreambleKind, frame_airtime, full_band_airtime
from .traffic import DlFrame, UlPacket

AP_ID = 0

UL = "ul"
DL = "dl"


class Scheme(str, Enum):
    A2P = "a2p"
    EDCA_ONLY = "edca"
    OFDMA_ONLY = "ofdma"
    OFDMA_EDCA = "ofdma-edca"


@dataclass(frozen=True)
class SchemeBehavior:
    polls: bool            # AP runs trigger-based uplink exchanges
    static_list: bool      # polling list holds every STA and never shrinks
    mu_edca: bool          # EDCA acks carry a contention-suspension timer
    mu_edca_timer_ns: int  # Y; unused when mu_edca is False
    ari_gated: bool        # AP waits out the access request interval between wins


def configure_scheme(scheme: Scheme, *, mu_edca_timer_ns: int,
                     static_list_timer_ns: int) -> SchemeBehavior:
    if scheme is Scheme.A2P:
        return SchemeBehavior(True, False, True, mu_edca_timer_ns, True)
    if scheme is Scheme.EDCA_ONLY:
        return SchemeBehavior(False, False, False, 0, False)
    if scheme is Scheme.OFDMA_ONLY:
        return SchemeBehavior(True, True, True, static_list_timer_ns, True)
    if scheme is Scheme.OFDMA_EDCA:
        return SchemeBehavior(True, True, False, 0, True)
    raise ValueError(f"unknown scheme {scheme!r}")


def ari_gate(last_access_ns: int, now_ns: int, dl_enqueued: bool, ari_ns: int) -> bool:
    """May the AP request channel access now?"""
    return dl_enqueued or now_ns - last_access_ns >= ari_ns


def select_poll_set(n_entries: int, cursor: int, max_count: int) -> tuple[range, int]:
    """Next round-robin block of polling-list indices.

    Blocks never straddle the end of the list, so with a stable list of n
    entries every STA is polled exactly once per ceil(n / max_count) calls.
    """
    if max_count <= 0:
        raise ValueError("max_count must be positive")
    if n_entries == 0:
        return range(0), cursor
    if cursor >= n_entries:
        cursor = 0
    count = min(max_count, n_entries - cursor)
    nxt = cursor + count
    return range(cursor, nxt), nxt if nxt < n_entries else 0


@dataclass(frozen=True)
class FrameSizes:
    """MAC frame byte counts; header-format defaults, overridable in config."""
    mac_overhead_bytes: int = 30   # per-MPDU header/FCS/delimiter share
    ack_bytes: int = 14
    bsr_bytes: int = 34            # QoS Null carrying the buffer status
    ba_base_bytes: int = 32        # multi-STA block ack
    ba_per_user_bytes: int = 8
    tf_base_bytes: int = 28        # trigger / status-poll frame
    tf_per_user_bytes: int = 5


class FrameAirtimes:
    """Cached airtimes of every frame kind used by the exchanges.

    Data goes at the profile MCS: per 26-tone RU inside trigger exchanges,
    full band single-user otherwise. Control frames span the full channel at
    the MCS 0 basic rate behind a legacy preamble.
    """

    def __init__(self, profile: PhyProfile, sizes: FrameSizes):
        self.profile = profile
        self.sizes = sizes
        self.sifs_ns = profile.sifs_ns
        self.ack_ns = full_band_airtime(sizes.ack_bytes, profile,
                                        PreambleKind.LEGACY, mcs_index=0).total_ns
        self.bsr_ns = frame_airtime(sizes.bsr_bytes, profile.ru_tones, profile,
                                    PreambleKind.HE_TB).total_ns
        self._trigger: dict[int, int] = {}
        self._ba: dict[int, int] = {}
        self._ru: dict[int, int] = {}
        self._su: dict[int, int] = {}

    def trigger_ns(self, n_users: int) -> int:
        t = self._trigger.get(n_users)
        if t is None:
            size = self.sizes.tf_base_bytes + self.sizes.tf_per_user_bytes * n_users
            t = full_band_airtime(size, self.profile, PreambleKind.LEGACY,
                                  mcs_index=0).total_ns
            self._trigger[n_users] = t
        return t

    def ba_ns(self, n_users: int) -> int:
        t = self._ba.get(n_users)
        if t is None:
            size = self.sizes.ba_base_bytes + self.sizes.ba_per_user_bytes * n_users
            t = full_band_airtime(size, self.profile, PreambleKind.LEGACY,
                                  mcs_index=0).total_ns
            self._ba[n_users] = t
        return t

    def ru_data_ns(self, mpdu_bytes: int) -> int:
        t = self._ru.get(mpdu_bytes)
        if t is None:
            t = frame_airtime(mpdu_bytes, self.profile.ru_tones, self.profile,
                              PreambleKind.HE_TB).total_ns
            self._ru[mpdu_bytes] = t
        return t

    def su_data_ns(self, mpdu_bytes: int) -> int:
        t = self._su.get(mpdu_bytes)
        if t is None:
            t = full_band_airtime(mpdu_bytes, self.profile, PreambleKind.HE_SU).total_ns
            self._su[mpdu_bytes] = t
        return t

    def _max_bytes(self, budget_ns: int, preamble_ns: int, bits_per_symbol: int) -> int:
        symbols = (budget_ns - preamble_ns) // self.profile.symbol_ns
        return symbols * bits_per_symbol // 8 if symbols > 0 else 0

    def ru_data_max_bytes(self, budget_ns: int) -> int:
        from .phy import bits_per_symbol
        return self._max_bytes(budget_ns, self.profile.he_tb_preamble_ns,
                               bits_per_symbol(self.profile.ru_tones,
                                               self.profile.mcs_index))

    def su_data_max_bytes(self, budget_ns: int) -> int:
        from .phy import full_band_bits_per_symbol
        return self._max_bytes(budget_ns, self.profile.he_su_preamble_ns,
                               full_band_bits_per_symbol(self.profile.bandwidth_mhz,
                                                         self.profile.mcs_index))


@dataclass(slots=True)
class PollingEntry:
    sta: int
    expiry_ns: int
    polled_since_reset: bool = False
    last_reported: int = 0


class _UlExchange:
    __slots__ = ("start_ns", "entries", "bsr", "senders", "delivered")

    def __init__(self, start_ns: int, entries: list[PollingEntry]):
        self.start_ns = start_ns
        self.entries = entries
        self.bsr: dict[int, int] = {}
        self.senders: list[int] = []
        self.delivered: list[int] = []


class ApMac:
    def __init__(self, sim: Simulator, channel: Channel, *, behavior: SchemeBehavior,
                 airtimes: FrameAirtimes, edca: EdcaParams, ari_ns: int, txop_ns: int,
                 max_rus: int, deliver_ul: Callable[[UlPacket, int], None],
                 record_dl_sent: Callable[[int, int], None],
                 record_dl_lost: Callable[[int], None],
                 remove_unpolled_on_expiry: bool = False,
                 trace: TraceLog | None = None):
        self.sim = sim
        self.channel = channel
        self.behavior = behavior
        self.airtimes = airtimes
        self.edca = edca
        self.ari_ns = ari_ns
        self.txop_ns = txop_ns
        self.max_rus = max_rus
        self.deliver_ul = deliver_ul
        self.record_dl_sent = record_dl_sent
        self.record_dl_lost = record_dl_lost
        self.remove_unpolled_on_expiry = remove_unpolled_on_expiry
        self.trace = trace
        self.stas: dict[int, "StaMac"] = {}
        self.polling: list[PollingEntry] = []
        self.entry_map: dict[int, PollingEntry] = {}
        self.rr_cursor = 0
        self.next_exchange = UL
        self.last_access = 0
        self.dl_queue: deque[DlFrame] = deque()
        self.max_exchange_ns = 0
        self.ul_exchanges = 0
        self._contending = False
        self._in_exchange = False
        self._ari_ev: EventHandle | None = None

    def register_stas(self, stas: dict[int, "StaMac"]) -> None:
        self.stas = stas

    def preload_polling_list(self, sta_ids: list[int], now: int) -> None:
        """Static schemes start with every associated STA on the list."""
        for sta in sta_ids:
            e = PollingEntry(sta, now + self.behavior.mu_edca_timer_ns)
            self.polling.append(e)
            self.entry_map[sta] = e

    # -- access requests -------------------------------------------------

    def _has_work(self) -> bool:
        if self.dl_queue:
            return True
        return self.behavior.polls and bool(self.polling)

    def maybe_request(self) -> None:
        if self._contending or self._in_exchange or not self._has_work():
            return
        now = self.sim.now
        if not self.behavior.ari_gated or ari_gate(self.last_access, now,
                                                   bool(self.dl_queue), self.ari_ns):
            self._contending = True
            self.channel.request_access(AP_ID, self.edca, on_grant=self._on_grant,
                                        on_collision=self._on_collision,
                                        on_drop=self._on_drop)
        else:
            self._arm_ari()

    def _arm_ari(self) -> None:
        if self._ari_ev is not None and not (self._ari_ev.done or self._ari_ev.cancelled):
            return
        self._ari_ev = self.sim.schedule(self.maybe_request, self.last_access + self.ari_ns)

    def enqueue_dl(self, frame: DlFrame) -> None:
        self.dl_queue.append(frame)
        self.maybe_request()

    def on_list_insert(self) -> None:
        self.maybe_request()

    # -- contention callbacks ----------------------------------------------

    def _first_frame(self) -> tuple[str, int]:
        """(kind, airtime) of the frame an access attempt would lead with."""
        if not self.behavior.polls:
            if self.dl_queue:
                f = self.dl_queue[0]
                return DL, self.airtimes.su_data_ns(
                    f.size_bytes + self.airtimes.sizes.mac_overhead_bytes)
            return "none", 0
        if self.next_exchange == DL and self.dl_queue:
            f = self.dl_queue[0]
            return DL, self.airtimes.su_data_ns(
                f.size_bytes + self.airtimes.sizes.mac_overhead_bytes)
        if self.polling:
            cursor = self.rr_cursor if self.rr_cursor < len(self.polling) else 0
            n = min(self.max_rus, len(self.polling) - cursor)
            return UL, self.airtimes.trigger_ns(n)
        return "none", 0

    def _on_collision(self, now: int) -> int:
        kind, airtime = self._first_frame()
        if kind == DL:
            # the broadcast went out garbled; broadcasts are never retried
            frame = self.dl_queue.popleft()
            self.record_dl_lost(frame.window)
        return airtime

    def _on_drop(self, now: int) -> None:
        self._contending = False
        self.maybe_request()

    def _on_grant(self, now: int) -> None:
        self._contending = False
        self._in_exchange = True
        self.last_access = now
        if not self.behavior.polls:
            if self.dl_queue:
                self._start_broadcast()
            else:
                self._null_win()
            return
        turn = self.next_exchange
        self.next_exchange = DL if turn == UL else UL
        if turn == DL and self.dl_queue:
            self._start_broadcast()
        elif self.polling:
            self._start_ul_exchange(now)
        else:
            self._null_win()

    def _null_win(self) -> None:
        if self.trace:
            self.trace.emit(self.sim.now, "null-win", AP_ID)
        self.channel.release()
        self._finish()

    def _finish(self) -> None:
        self._in_exchange = False
        self.maybe_request()

    # -- downlink broadcast --------------------------------------------------

    def _start_broadcast(self) -> None:
        frame = self.dl_queue.popleft()
        dur = self.airtimes.su_data_ns(frame.size_bytes
                                       + self.airtimes.sizes.mac_overhead_bytes)
        end = self.channel.occupy((AP_ID,), dur)
        self.sim.schedule(partial(self._broadcast_done, frame, dur), end)

    def _broadcast_done(self, frame: DlFrame, dur: int) -> None:
        now = self.sim.now
        self.record_dl_sent(frame.window, now)
        if self.trace:
            self.trace.emit(now, "exchange-dl", AP_ID, window=frame.window,
                            duration_ns=dur)
        self.channel.release()
        self._finish()

    # -- trigger-based uplink exchange ----------------------------------------

    def _start_ul_exchange(self, now: int) -> None:
        sel, self.rr_cursor = select_poll_set(len(self.polling), self.rr_cursor,
                                              self.max_rus)
        entries = [self.polling[i] for i in sel]
        for e in entries:
            e.polled_since_reset = True
        x = _UlExchange(now, entries)
        self.channel.occupy((AP_ID,), self.airtimes.trigger_ns(len(entries)))
        self.channel.schedule_response(self.airtimes.sifs_ns, partial(self._phase_bsr, x))

    def _phase_bsr(self, x: _UlExchange) -> None:
        for e in x.entries:
            bsr = self.stas[e.sta].queued_bytes()
            x.bsr[e.sta] = bsr
            e.last_reported = bsr
        self.channel.occupy(tuple(e.sta for e in x.entries), self.airtimes.bsr_ns)
        self.channel.schedule_response(self.airtimes.sifs_ns, partial(self._phase_tf, x))

    def _phase_tf(self, x: _UlExchange) -> None:
        x.senders = [e.sta for e in x.entries if x.bsr[e.sta] > 0]
        if not x.senders:
            self._finish_ul(x)  # nothing to solicit, skip TF/DATA/BA
            return
        self.channel.occupy((AP_ID,), self.airtimes.trigger_ns(len(x.senders)))
        self.channel.schedule_response(self.airtimes.sifs_ns, partial(self._phase_data, x))

    def _data_budget_ns(self, n_polled: int, n_senders: int) -> int:
        s = self.airtimes.sifs_ns
        fixed = (self.airtimes.trigger_ns(n_polled) + s + self.airtimes.bsr_ns + s
                 + self.airtimes.trigger_ns(n_senders) + s + s
                 + self.airtimes.ba_ns(n_senders))
        return self.txop_ns - fixed

    def _phase_data(self, x: _UlExchange) -> None:
        max_bytes = self.airtimes.ru_data_max_bytes(
            self._data_budget_ns(len(x.entries), len(x.senders)))
        dur = 0
        deliveries: list[tuple[int, list[UlPacket]]] = []
        for sta in x.senders:
            pkts = self.stas[sta].take_for_poll(max_bytes)
            agg = sum(p.size_bytes + self.airtimes.sizes.mac_overhead_bytes
                      for p in pkts)
            airtime = self.airtimes.ru_data_ns(agg)
            if airtime > dur:
                dur = airtime  # shorter aggregates are padded to the longest
            deliveries.append((sta, pkts))
        end = self.channel.occupy(tuple(x.senders), dur)
        self.sim.schedule(partial(self._phase_data_end, x, deliveries), end)

    def _phase_data_end(self, x: _UlExchange,
                        deliveries: list[tuple[int, list[UlPacket]]]) -> None:
        now = self.sim.now
        for sta, pkts in deliveries:
            x.delivered.append(sta)
            for pkt in pkts:
                self.deliver_ul(pkt, now)
        self.channel.schedule_response(self.airtimes.sifs_ns, partial(self._phase_ba, x))

    def _phase_ba(self, x: _UlExchange) -> None:
        end = self.channel.occupy((AP_ID,), self.airtimes.ba_ns(len(x.senders)))
        self.sim.schedule(partial(self._phase_ba_end, x), end)

    def _phase_ba_end(self, x: _UlExchange) -> None:
        now = self.sim.now
        for sta in x.delivered:
            self.stas[sta].on_ba(now)
            e = self.entry_map[sta]
            e.expiry_ns = now + self.behavior.mu_edca_timer_ns
            e.polled_since_reset = False
        self._finish_ul(x)

    def _finish_ul(self, x: _UlExchange) -> None:
        now = self.sim.now
        duration = self.channel.busy_until - x.start_ns
        if duration > self.txop_ns:
            raise RuntimeError(f"uplink exchange overran TXOP: {duration} ns")
        if duration > self.max_exchange_ns:
            self.max_exchange_ns = duration
        self.ul_exchanges += 1
        if self.trace:
            self.trace.emit(now, "exchange-ul", AP_ID,
                            polled=tuple(e.sta for e in x.entries),
                            senders=tuple(x.senders),
                            delivered=tuple(x.delivered),
                            duration_ns=duration)
        if not self.behavior.static_list:
            self._expire_entries(now)
        self.channel.release()
        self._finish()

    def _expire_entries(self, now: int) -> None:
        doomed = [e for e in self.polling
                  if e.expiry_ns <= now
                  and (e.polled_since_reset or self.remove_unpolled_on_expiry)]
        if not doomed:
            return
        gone = {e.sta for e in doomed}
        ahead = sum(1 for i, e in enumerate(self.polling)
                    if i < self.rr_cursor and e.sta in gone)
        self.polling = [e for e in self.polling if e.sta not in gone]
        self.rr_cursor -= ahead
        if self.rr_cursor >= len(self.polling):
            self.rr_cursor = 0
        for e in doomed:
            del self.entry_map[e.sta]
            if self.trace:
                self.trace.emit(now, "list-remove", e.sta, expiry_ns=e.expiry_ns)

    # -- EDCA uplink handling --------------------------------------------------

    def ap_handle_edca_ul(self, sta: int, now: int) -> None:
        """Acked EDCA uplink: put the sender on the polling list (or refresh it)."""
        if not self.behavior.polls:
            return
        e = self.entry_map.get(sta)
        if e is not None:
            e.expiry_ns = now + self.behavior.mu_edca_timer_ns
            e.polled_since_reset = False
            return
        e = PollingEntry(sta, now + self.behavior.mu_edca_timer_ns)
        self.polling.append(e)
        self.entry_map[sta] = e
        if self.trace:
            self.trace.emit(now, "list-add", sta)
        self.on_list_insert()


class StaMac:
    def __init__(self, sim: Simulator, channel: Channel, sta_id: int, *,
                 behavior: SchemeBehavior, airtimes: FrameAirtimes, edca: EdcaParams,
                 txop_ns: int, deliver_ul: Callable[[UlPacket, int], None],
                 drop_ul: Callable[[UlPacket], None],
                 trace: TraceLog | None = None):
        self.sim = sim
        self.channel = channel
        self.sta_id = sta_id
        self.behavior = behavior
        self.airtimes = airtimes
        self.edca = edca
        self.deliver_ul = deliver_ul
        self.drop_ul = drop_ul
        self.trace = trace
        self.ap: ApMac | None = None
        self.queue: list[UlPacket] = []
        self.edca_enabled = True
        self.mu_deadline: int | None = None
        self._timer_ev: EventHandle | None = None
        self._contending = False
        self._edca_max_bytes = airtimes.su_data_max_bytes(
            txop_ns - airtimes.sifs_ns - airtimes.ack_ns)

    # -- queue -----------------------------------------------------------------

    def on_packet(self, pkt: UlPacket) -> None:
        self.queue.append(pkt)
        self._maybe_contend()

    def queued_bytes(self) -> int:
        return sum(p.size_bytes for p in self.queue)

    def _burst(self, max_bytes: int) -> list[UlPacket]:
        """Longest whole-packet aggregate that fits max_bytes of MPDU space."""
        out = []
        total = 0
        overhead = self.airtimes.sizes.mac_overhead_bytes
        for p in self.queue:
            total += p.size_bytes + overhead
            if out and total > max_bytes:
                break
            out.append(p)
        return out

    def take_for_poll(self, max_bytes: int) -> list[UlPacket]:
        """Dequeue the aggregate for a granted RU; called inside the exchange."""
        pkts = self._burst(max_bytes)
        del self.queue[:len(pkts)]
        if not self.queue and self._contending:
            # the polled path just emptied the queue; withdraw the EDCA copy
            self.channel.cancel_request(self.sta_id)
            self._contending = False
        return pkts

    # -- EDCA contention ---------------------------------------------------------

    def _maybe_contend(self) -> None:
        if not self.queue or not self.edca_enabled or self._contending:
            return
        self._contending = True
        self.channel.request_access(self.sta_id, self.edca, on_grant=self._on_grant,
                                    on_collision=self._on_collision,
                                    on_drop=self._on_drop)

    def _on_collision(self, now: int) -> int:
        agg = sum(p.size_bytes + self.airtimes.sizes.mac_overhead_bytes
                  for p in self._burst(self._edca_max_bytes))
        return self.airtimes.su_data_ns(agg)

    def _on_drop(self, now: int) -> None:
        self._contending = False
        pkt = self.queue.pop(0)
        self.drop_ul(pkt)
        self._maybe_contend()

    def _on_grant(self, now: int) -> None:
        self._contending = False
        burst = self._burst(self._edca_max_bytes)
        del self.queue[:len(burst)]
        agg = sum(p.size_bytes + self.airtimes.sizes.mac_overhead_bytes for p in burst)
        end = self.channel.occupy((self.sta_id,), self.airtimes.su_data_ns(agg))
        self.sim.schedule(partial(self._data_end, burst), end)

    def _data_end(self, burst: list[UlPacket]) -> None:
        now = self.sim.now
        for pkt in burst:
            self.deliver_ul(pkt, now)
        self.channel.schedule_response(self.airtimes.sifs_ns, self._send_ack)

    def _send_ack(self) -> None:
        end = self.channel.occupy((AP_ID,), self.airtimes.ack_ns)
        self.sim.schedule(self._ack_end, end)

    def _ack_end(self) -> None:
        now = self.sim.now
        assert self.ap is not None
        self.ap.ap_handle_edca_ul(self.sta_id, now)
        self.on_ack(now)
        self.channel.release()
        self._maybe_contend()

    # -- MU-EDCA timer -------------------------------------------------------------

    def on_ack(self, now: int) -> None:
        """Ack of an own EDCA uplink; carries the contention-suspension timer."""
        if self.behavior.mu_edca:
            self.edca_enabled = False
            self._arm_timer(now + self.behavior.mu_edca_timer_ns)
            if self.trace:
                self.trace.emit(now, "edca-disable", self.sta_id,
                                deadline_ns=self.mu_deadline)

    def on_ba(self, now: int) -> None:
        """Block ack covering this STA's polled data restarts the timer."""
        if self.behavior.mu_edca and not self.edca_enabled:
            self._arm_timer(now + self.behavior.mu_edca_timer_ns)
            if self.trace:
                self.trace.emit(now, "mu-edca-reset", self.sta_id,
                                deadline_ns=self.mu_deadline)

    def _arm_timer(self, deadline: int) -> None:
        self.mu_deadline = deadline
        if self._timer_ev is not None:
            self.sim.cancel(self._timer_ev)
        self._timer_ev = self.sim.schedule(self._timer_fire, deadline)

    def _timer_fire(self) -> None:
        self._timer_ev = None
        self.mu_deadline = None
        self.edca_enabled = True
        if self.trace:
            self.trace.emit(self.sim.now, "edca-enable", self.sta_id)
        self._maybe_contend()
