"""MAC behaviors: scheme wiring, poll-set selection, exchange airtime math,
polling-list lifecycle, and the contention-suspension timer."""

import pytest

from a2psim.channel import Channel, EdcaParams
from a2psim.config import RunConfig
from a2psim.errors import ConfigError
from a2psim.kernel import MS, US, Simulator, TraceLog, rng_stream
from a2psim.mac import (AP_ID, ApMac, FrameAirtimes, FrameSizes, PollingEntry,
                        Scheme, StaMac, ari_gate, configure_scheme,
                        select_poll_set)
from a2psim.phy import PhyProfile
from a2psim.sim import Simulation
from a2psim.traffic import UlPacket

PROFILE = PhyProfile(bandwidth_mhz=40, mcs_index=8, guard_interval_ns=800)
AIRTIMES = FrameAirtimes(PROFILE, FrameSizes())
VO = EdcaParams(aifsn=2, cw_min=3, cw_max=7, retry_limit=7)


# -- scheme behavior ---------------------------------------------------------

def test_scheme_behavior_matrix():
    a2p = configure_scheme(Scheme.A2P, mu_edca_timer_ns=40 * MS,
                           static_list_timer_ns=2_088_960 * US)
    assert (a2p.polls, a2p.static_list, a2p.mu_edca, a2p.ari_gated) == (
        True, False, True, True)
    assert a2p.mu_edca_timer_ns == 40 * MS

    edca = configure_scheme(Scheme.EDCA_ONLY, mu_edca_timer_ns=40 * MS,
                            static_list_timer_ns=0)
    assert (edca.polls, edca.static_list, edca.mu_edca, edca.ari_gated) == (
        False, False, False, False)

    ofdma = configure_scheme(Scheme.OFDMA_ONLY, mu_edca_timer_ns=40 * MS,
                             static_list_timer_ns=2_088_960 * US)
    assert (ofdma.polls, ofdma.static_list, ofdma.mu_edca) == (True, True, True)
    assert ofdma.mu_edca_timer_ns == 2_088_960 * US

    both = configure_scheme(Scheme.OFDMA_EDCA, mu_edca_timer_ns=40 * MS,
                            static_list_timer_ns=0)
    assert (both.polls, both.static_list, both.mu_edca) == (True, True, False)


def test_scheme_values_are_the_cli_names():
    assert [s.value for s in Scheme] == ["a2p", "edca", "ofdma", "ofdma-edca"]


def test_access_gate_timing():
    assert ari_gate(0, 16_000, False, 16_000) is True      # interval elapsed
    assert ari_gate(0, 15_999, False, 16_000) is False     # one ns short
    assert ari_gate(0, 15_999, True, 16_000) is True       # downlink bypass
    assert ari_gate(100_000, 116_000, False, 16_000) is True


# -- round-robin poll blocks -------------------------------------------------

def test_poll_blocks_never_straddle_the_wrap():
    cursor = 0
    blocks = []
    for _ in range(6):
        sel, cursor = select_poll_set(100, cursor, 18)
        blocks.append(list(sel))
    assert [len(b) for b in blocks] == [18, 18, 18, 18, 18, 10]
    assert sorted(i for b in blocks for i in b) == list(range(100))
    assert cursor == 0  # cycle complete, ready to repeat


def test_poll_block_with_short_list():
    sel, cursor = select_poll_set(5, 0, 18)
    assert (list(sel), cursor) == ([0, 1, 2, 3, 4], 0)


def test_poll_block_tail_shorter_than_ru_count():
    sel, cursor = select_poll_set(20, 18, 18)
    assert (list(sel), cursor) == ([18, 19], 0)


def test_poll_block_resets_a_stale_cursor():
    # the list shrank below the cursor since the last call
    sel, cursor = select_poll_set(4, 9, 18)
    assert (list(sel), cursor) == ([0, 1, 2, 3], 0)


def test_poll_block_of_empty_list():
    sel, cursor = select_poll_set(0, 5, 18)
    assert (list(sel), cursor) == ([], 5)


def test_poll_block_requires_positive_capacity():
    with pytest.raises(ValueError):
        select_poll_set(10, 0, 0)


# -- frame airtimes ----------------------------------------------------------

def test_frame_airtime_cache_matches_hand_math():
    assert AIRTIMES.ack_ns == 33_600          # 14 B at the basic rate
    assert AIRTIMES.bsr_ns == 71_200          # 34 B on a 26-tone RU, 2 symbols
    assert AIRTIMES.trigger_ns(1) == 47_200   # 33 B -> 2 symbols
    assert AIRTIMES.trigger_ns(18) == 88_000  # 118 B -> 5 symbols
    assert AIRTIMES.ba_ns(1) == 47_200        # 40 B -> 2 symbols
    assert AIRTIMES.ba_ns(18) == 115_200      # 176 B -> 7 symbols
    assert AIRTIMES.ru_data_ns(770) == 628_800
    assert AIRTIMES.su_data_ns(770) == 72_800


def test_ru_capacity_round_trip():
    # 43 symbols x 144 bits fit exactly the airtime of a 770-byte frame
    assert AIRTIMES.ru_data_max_bytes(628_800) == 774
    assert AIRTIMES.ru_data_max_bytes(628_799) == 756
    assert AIRTIMES.ru_data_max_bytes(AIRTIMES.ru_data_ns(770)) >= 770


def test_su_capacity_within_txop():
    budget = 2_080_000 - 16_000 - AIRTIMES.ack_ns
    # (2030400 - 32000) // 13600 = 146 symbols x 2808 bits
    assert AIRTIMES.su_data_max_bytes(budget) == 51_246
    assert AIRTIMES.su_data_max_bytes(30_000) == 0  # smaller than the preamble


def test_frame_size_defaults():
    s = FrameSizes()
    assert (s.mac_overhead_bytes, s.ack_bytes, s.bsr_bytes) == (30, 14, 34)
    assert (s.ba_base_bytes, s.ba_per_user_bytes) == (32, 8)
    assert (s.tf_base_bytes, s.tf_per_user_bytes) == (28, 5)


# -- STA queue and aggregation ----------------------------------------------

def mk_pkt(sta, window, gen_ns):
    return UlPacket(sta, window, gen_ns, 740, 0, 0, "in-flight", None)


def make_sta(behavior=None) -> tuple[Simulator, Channel, StaMac]:
    sim = Simulator()
    ch = Channel(sim, sifs_ns=16_000, slot_ns=9_000,
                 rng=rng_stream(1, "backoff"))
    behavior = behavior or configure_scheme(Scheme.A2P, mu_edca_timer_ns=40 * MS,
                                            static_list_timer_ns=0)
    sta = StaMac(sim, ch, 7, behavior=behavior, airtimes=AIRTIMES, edca=VO,
                 txop_ns=2_080_000, deliver_ul=lambda p, t: None,
                 drop_ul=lambda p: None)
    return sim, ch, sta


def test_burst_is_greedy_and_whole_packet():
    sim, ch, sta = make_sta()
    sta.edca_enabled = False  # keep the queue put
    for i in range(3):
        sta.on_packet(mk_pkt(7, i, i))
    assert sta.queued_bytes() == 3 * 740
    assert [p.window for p in sta._burst(2 * 770)] == [0, 1]
    assert [p.window for p in sta._burst(2 * 770 - 1)] == [0]
    # an aggregate always carries at least the head packet
    assert [p.window for p in sta._burst(100)] == [0]


def test_take_for_poll_withdraws_the_edca_request():
    sim, ch, sta = make_sta()
    sta.on_packet(mk_pkt(7, 0, 0))
    assert ch.is_contending(7)
    taken = sta.take_for_poll(10_000)
    assert [p.window for p in taken] == [0]
    assert not sta.queue
    assert not ch.is_contending(7)


def test_partial_poll_keeps_the_edca_request_alive():
    sim, ch, sta = make_sta()
    sta.on_packet(mk_pkt(7, 0, 0))
    sta.on_packet(mk_pkt(7, 1, 100))
    taken = sta.take_for_poll(770)  # room for one packet only
    assert len(taken) == 1 and len(sta.queue) == 1
    assert ch.is_contending(7)


# -- AP polling-list bookkeeping ----------------------------------------------

def make_ap(behavior=None, **kwargs) -> tuple[Simulator, ApMac]:
    sim = Simulator()
    ch = Channel(sim, sifs_ns=16_000, slot_ns=9_000,
                 rng=rng_stream(1, "backoff"))
    behavior = behavior or configure_scheme(Scheme.A2P, mu_edca_timer_ns=40 * MS,
                                            static_list_timer_ns=0)
    ap = ApMac(sim, ch, behavior=behavior, airtimes=AIRTIMES, edca=VO,
               ari_ns=16_000, txop_ns=2_080_000, max_rus=18,
               deliver_ul=lambda p, t: None,
               record_dl_sent=lambda w, t: None,
               record_dl_lost=lambda w: None, **kwargs)
    return sim, ap


def test_acked_uplink_adds_then_refreshes_a_list_entry():
    sim, ap = make_ap()
    ap.ap_handle_edca_ul(5, now=1_000)
    assert [e.sta for e in ap.polling] == [5]
    entry = ap.polling[0]
    assert entry.expiry_ns == 1_000 + 40 * MS
    entry.polled_since_reset = True
    ap.ap_handle_edca_ul(5, now=2_000)
    assert len(ap.polling) == 1 and ap.polling[0] is entry
    assert entry.expiry_ns == 2_000 + 40 * MS
    assert entry.polled_since_reset is False


def test_expiry_requires_a_poll_since_the_last_reset():
    sim, ap = make_ap()
    polled = PollingEntry(1, expiry_ns=5_000, polled_since_reset=True)
    fresh = PollingEntry(2, expiry_ns=5_000, polled_since_reset=False)
    live = PollingEntry(3, expiry_ns=9_000, polled_since_reset=True)
    ap.polling = [polled, fresh, live]
    ap.entry_map = {e.sta: e for e in ap.polling}
    ap._expire_entries(now=5_000)
    assert [e.sta for e in ap.polling] == [2, 3]
    assert set(ap.entry_map) == {2, 3}


def test_unpolled_expiry_removal_is_switchable():
    sim, ap = make_ap(remove_unpolled_on_expiry=True)
    fresh = PollingEntry(2, expiry_ns=5_000, polled_since_reset=False)
    ap.polling = [fresh]
    ap.entry_map = {2: fresh}
    ap._expire_entries(now=5_000)
    assert ap.polling == []


def test_expiry_shifts_the_cursor_past_removed_entries():
    sim, ap = make_ap()
    entries = [PollingEntry(i, expiry_ns=1_000 if i < 2 else 99_000,
                            polled_since_reset=True) for i in range(5)]
    ap.polling = list(entries)
    ap.entry_map = {e.sta: e for e in entries}
    ap.rr_cursor = 3
    ap._expire_entries(now=2_000)  # removes entries 0 and 1, both ahead
    assert [e.sta for e in ap.polling] == [2, 3, 4]
    assert ap.rr_cursor == 1


def test_static_preload_covers_every_sta():
    behavior = configure_scheme(Scheme.OFDMA_ONLY, mu_edca_timer_ns=0,
                                static_list_timer_ns=2_088_960 * US)
    sim, ap = make_ap(behavior=behavior)
    ap.preload_polling_list(list(range(1, 101)), now=0)
    assert len(ap.polling) == 100
    assert ap.polling[0].expiry_ns == 2_088_960 * US


# -- end-to-end lifecycles over small runs -------------------------------------

def small_cfg(**kw) -> RunConfig:
    base = dict(scheme=Scheme.A2P, active=2, n_initial=2,
                duration_ns=200 * MS, seed=1)
    base.update(kw)
    return RunConfig(**base)


def run_traced(cfg) -> tuple[TraceLog, object]:
    trace = TraceLog()
    summary = Simulation(cfg, trace=trace).run()
    return trace, summary


def test_steadily_polled_stas_contend_only_once():
    trace, summary = run_traced(small_cfg())
    sta_grants = [r for r in trace.by_kind("edca-grant") if r.node != AP_ID]
    adds = trace.by_kind("list-add")
    assert len(adds) == 2                      # each STA joins once
    assert len(sta_grants) == 2                # and never re-contends
    assert trace.by_kind("list-remove") == []  # block acks keep entries fresh
    assert summary.loss_ratio == 0.0
    assert summary.dropped == 0
    exchanges = trace.by_kind("exchange-ul")
    assert exchanges, "the poll loop should have run"
    assert all(r.info["duration_ns"] <= 2_080_000 for r in exchanges)
    assert all(set(r.info["senders"]) <= set(r.info["polled"])
               for r in exchanges)


def test_idle_timer_cycles_membership_and_contention():
    # Y shorter than the packet interval: after each delivery the entry
    # expires and contention re-enables before the next packet
    trace, summary = run_traced(small_cfg(active=1, n_initial=1,
                                          mu_edca_timer_ns=3 * MS,
                                          duration_ns=100 * MS))
    adds = len(trace.by_kind("list-add"))
    removes = len(trace.by_kind("list-remove"))
    disables = len(trace.by_kind("edca-disable"))
    enables = len(trace.by_kind("edca-enable"))
    assert adds == disables
    assert adds >= 15                 # nearly one join per 5 ms window
    assert abs(adds - removes) <= 1
    assert disables - 1 <= enables <= disables
    assert summary.loss_ratio == 0.0


def test_static_list_never_changes():
    trace, summary = run_traced(small_cfg(scheme=Scheme.OFDMA_ONLY,
                                          duration_ns=100 * MS))
    assert trace.by_kind("list-add") == []
    assert trace.by_kind("list-remove") == []
    polled = [i for r in trace.by_kind("exchange-ul") for i in r.info["polled"]]
    assert set(polled) == set(range(1, 101))  # the whole association table


def test_static_round_robin_polls_everyone_once_per_cycle():
    trace, _ = run_traced(small_cfg(scheme=Scheme.OFDMA_ONLY,
                                    duration_ns=100 * MS))
    exchanges = trace.by_kind("exchange-ul")
    sizes = [len(r.info["polled"]) for r in exchanges]
    whole_cycles = len(exchanges) // 6
    assert whole_cycles >= 2
    for c in range(whole_cycles):
        cycle = exchanges[6 * c:6 * c + 6]
        assert [len(r.info["polled"]) for r in cycle] == [18] * 5 + [10]
        seen = [sta for r in cycle for sta in r.info["polled"]]
        assert sorted(seen) == list(range(1, 101))


def test_contention_only_scheme_never_polls():
    trace, summary = run_traced(small_cfg(scheme=Scheme.EDCA_ONLY))
    assert trace.by_kind("exchange-ul") == []
    assert trace.by_kind("list-add") == []
    assert trace.by_kind("edca-disable") == []   # no suspension timer
    assert summary.loss_ratio == 0.0
    assert summary.dl_sent > 0


def test_downlink_turns_interleave_with_polls():
    trace, summary = run_traced(small_cfg(duration_ns=100 * MS))
    kinds = [r.kind for r in trace.by_kind("exchange-ul", "exchange-dl")]
    assert "exchange-dl" in kinds
    first_ul = kinds.index("exchange-ul")
    for a, b in zip(kinds[first_ul:], kinds[first_ul + 1:]):
        assert not (a == b == "exchange-dl"), "broadcasts must alternate with polls"
    assert summary.dl_lost == 0
    assert summary.dl_sent >= 100 * MS // (5 * MS) - 2


def test_infeasible_txop_is_rejected_up_front():
    with pytest.raises(ConfigError, match="txop"):
        Simulation(small_cfg(txop_ns=600 * US))
