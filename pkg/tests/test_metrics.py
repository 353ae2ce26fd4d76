"""Statistics oracles: box summaries, loss arithmetic, delay pairing."""

import pytest

from a2psim.kernel import MS
from a2psim.metrics import BoxStats, PacketLedger, box_stats, pair_e2e
from a2psim.traffic import DROPPED, IN_FLIGHT, ON_TIME, OUTDATED, UlPacket


def mk_pkt(sta=1, window=0, gen_ns=0, period_id=0, period_start_ns=0,
           disposition=IN_FLIGHT):
    return UlPacket(sta, window, gen_ns, 740, period_id, period_start_ns,
                    disposition, None)


def test_box_stats_odd_sample_count():
    assert box_stats([5, 3, 1, 4, 2]) == BoxStats(
        q1=2.0, median=3.0, q3=4.0, whisker_low=1.0, whisker_high=5.0,
        outliers=())


def test_box_stats_even_count_interpolates():
    assert box_stats([1, 2, 3, 4]) == BoxStats(
        q1=1.75, median=2.5, q3=3.25, whisker_low=1.0, whisker_high=4.0,
        outliers=())


def test_box_stats_flags_outliers_beyond_whiskers():
    # iqr = 2, so the upper fence sits at 4 + 3 = 7 and 100 falls outside
    assert box_stats([1, 2, 3, 4, 100]) == BoxStats(
        q1=2.0, median=3.0, q3=4.0, whisker_low=1.0, whisker_high=4.0,
        outliers=(100.0,))


def test_box_stats_degenerate_inputs():
    assert box_stats([7]) == BoxStats(7.0, 7.0, 7.0, 7.0, 7.0, ())
    with pytest.raises(ValueError):
        box_stats([])


def test_high_outlier_mean_averages_only_the_upper_tail():
    two_high = box_stats([10, 11, 12, 13, 14, 15, 16, 17, 100, 200])
    assert two_high.outliers == (100.0, 200.0)
    assert two_high.high_outlier_mean() == 150.0
    assert box_stats([1, 2, 3, 4, 5]).high_outlier_mean() is None
    # a lower-side outlier alone leaves the upper tail empty
    low_sided = box_stats([-100, 10, 11, 12, 13])
    assert low_sided.outliers == (-100.0,)
    assert low_sided.high_outlier_mean() is None


def test_pair_e2e_takes_on_time_uplinks_with_received_broadcasts():
    packets = [
        mk_pkt(sta=1, window=0, gen_ns=1_000, disposition=ON_TIME),
        mk_pkt(sta=2, window=0, gen_ns=2_000, disposition=OUTDATED),
        mk_pkt(sta=1, window=1, gen_ns=3_000, disposition=ON_TIME),  # dl missing
        mk_pkt(sta=2, window=2, gen_ns=4_000, disposition=DROPPED),
    ]
    assert pair_e2e(packets, {0: 9_000}) == [8_000]


def test_ledger_classifies_against_the_delay_budget():
    ledger = PacketLedger(budget_ns=5 * MS)
    on_time = mk_pkt(gen_ns=0)
    late = mk_pkt(gen_ns=1 * MS)
    for p in (on_time, late):
        ledger.register(p)
    ledger.deliver(on_time, 5 * MS)       # exactly the budget still counts
    ledger.deliver(late, 6 * MS + 1)      # one nanosecond over
    assert on_time.disposition == ON_TIME
    assert late.disposition == OUTDATED
    assert on_time.ap_rx_ns == 5 * MS


def test_wakeup_samples_first_arrival_of_each_period():
    ledger = PacketLedger(budget_ns=5 * MS)
    first = mk_pkt(gen_ns=0, period_id=4)
    second = mk_pkt(gen_ns=5 * MS, period_id=4)
    other = mk_pkt(gen_ns=2 * MS, period_id=5)
    for p in (first, second, other):
        ledger.register(p)
    ledger.deliver(first, 7 * MS)    # outdated, but still the wake-up signal
    ledger.deliver(second, 6 * MS)   # same period: not a wake-up
    ledger.deliver(other, 3 * MS)
    assert ledger.wakeup_samples == [7 * MS, 1 * MS]


def test_dropped_packets_never_produce_wakeup_samples():
    ledger = PacketLedger(budget_ns=5 * MS)
    lost = mk_pkt(gen_ns=0, period_id=1)
    arrived = mk_pkt(gen_ns=5 * MS, period_id=1)
    for p in (lost, arrived):
        ledger.register(p)
    ledger.drop(lost)
    ledger.deliver(arrived, 6 * MS)
    assert lost.disposition == DROPPED
    assert ledger.wakeup_samples == [1 * MS]


def test_finalize_counts_and_loss_ratio():
    ledger = PacketLedger(budget_ns=5 * MS)
    a = mk_pkt(sta=1, window=0, gen_ns=0, period_id=0)
    b = mk_pkt(sta=1, window=1, gen_ns=1 * MS, period_id=0)
    c = mk_pkt(sta=2, window=0, gen_ns=2 * MS, period_id=1)
    d = mk_pkt(sta=2, window=0, gen_ns=7 * MS, period_id=1)
    e = mk_pkt(sta=3, window=1, gen_ns=9 * MS, period_id=2)
    for p in (a, b, c, d, e):
        ledger.register(p)
    ledger.deliver(a, 4 * MS)              # on time
    ledger.deliver(b, 7 * MS + 1)          # outdated
    ledger.drop(c)
    ledger.deliver(d, 8 * MS)              # on time
    # e stays in flight
    ledger.record_dl_sent(0, 9 * MS)
    ledger.record_dl_lost(1)
    s = ledger.finalize(scheme="a2p", active_count=3, seed=7, config_hash="c0ffee",
                        duration_ns=30 * MS, max_exchange_ns=2 * MS)
    assert (s.generated, s.delivered_on_time, s.outdated, s.dropped,
            s.in_flight) == (5, 2, 1, 1, 1)
    # 2 lost out of 4 settled; the in-flight packet is excluded
    assert s.loss_ratio == pytest.approx(0.5)
    # on-time packets a and d pair with window 0's broadcast at 9 ms
    assert s.e2e_count == 2
    assert s.e2e_mean_ns == pytest.approx((9 * MS + 2 * MS) / 2)
    assert s.e2e_max_ns == 9 * MS
    assert s.wakeup_count == 2
    assert s.wakeup_mean_ns == pytest.approx((4 * MS + 1 * MS) / 2)
    assert (s.dl_sent, s.dl_lost) == (2, 1)
    assert s.max_exchange_ns == 2 * MS
    assert (s.scheme, s.active_count, s.seed) == ("a2p", 3, 7)


def test_finalize_with_no_delivered_traffic():
    ledger = PacketLedger(budget_ns=5 * MS)
    s = ledger.finalize(scheme="edca", active_count=0, seed=1, config_hash="0",
                        duration_ns=MS, max_exchange_ns=0)
    assert s.generated == 0
    assert s.loss_ratio == 0.0
    assert s.e2e_mean_ns is None and s.e2e_box is None and s.e2e_max_ns is None
    assert s.wakeup_mean_ns is None
