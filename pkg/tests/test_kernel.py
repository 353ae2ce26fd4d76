"""Event loop ordering, cancellation, and seeded stream independence."""

import pytest

from a2psim.kernel import MS, NS, SEC, US, Simulator, TraceLog, rng_stream


def test_time_unit_constants():
    assert (NS, US, MS, SEC) == (1, 1_000, 1_000_000, 1_000_000_000)


def test_events_fire_in_time_order():
    sim = Simulator()
    fired = []
    sim.schedule(lambda: fired.append(50), 50)
    sim.schedule(lambda: fired.append(10), 10)
    sim.schedule(lambda: fired.append(30), 30)
    sim.run_until(100)
    assert fired == [10, 30, 50]
    assert sim.now == 100


def test_same_instant_events_fire_in_insertion_order():
    sim = Simulator()
    fired = []
    for tag in ("a", "b", "c"):
        sim.schedule(lambda tag=tag: fired.append(tag), 100)
    sim.run_until(100)
    assert fired == ["a", "b", "c"]


def test_handler_sees_clock_at_fire_instant():
    sim = Simulator()
    seen = []
    sim.schedule(lambda: seen.append(sim.now), 42)
    sim.run_until(1000)
    assert seen == [42]


def test_events_scheduled_by_handlers_run_in_same_pass():
    sim = Simulator()
    fired = []
    sim.schedule(lambda: sim.schedule(lambda: fired.append("child"), 20), 10)
    sim.run_until(100)
    assert fired == ["child"]


def test_schedule_into_past_raises():
    sim = Simulator()
    sim.run_until(100)
    with pytest.raises(ValueError):
        sim.schedule(lambda: None, 99)
    sim.schedule(lambda: None, 100)  # the present instant is allowed


def test_run_until_leaves_later_events_pending():
    sim = Simulator()
    fired = []
    sim.schedule(lambda: fired.append("late"), 200)
    sim.run_until(100)
    assert fired == []
    sim.run_until(300)
    assert fired == ["late"]


def test_cancel_pending_event():
    sim = Simulator()
    fired = []
    ev = sim.schedule(lambda: fired.append("x"), 10)
    assert sim.cancel(ev) is True
    assert sim.cancel(ev) is False  # already cancelled
    sim.run_until(100)
    assert fired == []


def test_cancel_after_fire_returns_false():
    sim = Simulator()
    ev = sim.schedule(lambda: None, 10)
    sim.run_until(100)
    assert sim.cancel(ev) is False


def test_schedule_in_is_relative_to_now():
    sim = Simulator()
    fired = []
    sim.schedule(lambda: sim.schedule_in(lambda: fired.append(sim.now), 5), 10)
    sim.run_until(100)
    assert fired == [15]


def test_rng_streams_are_reproducible():
    a = [rng_stream(7, "traffic").random() for _ in range(3)]
    b = [rng_stream(7, "traffic").random() for _ in range(3)]
    assert a == b


def test_rng_streams_differ_by_name_and_seed():
    draws = {
        (seed, name): rng_stream(seed, name).random()
        for seed in (1, 2)
        for name in ("topology", "traffic", "backoff")
    }
    assert len(set(draws.values())) == len(draws)


def test_rng_stream_rejects_unknown_name():
    with pytest.raises(ValueError):
        rng_stream(1, "weather")


def test_trace_log_filters_by_kind():
    log = TraceLog(kinds={"keep"})
    log.emit(5, "keep", 1, detail=3)
    log.emit(6, "drop", 1)
    assert [r.kind for r in log.records] == ["keep"]
    assert log.by_kind("keep")[0].info == {"detail": 3}


def test_trace_record_line_format():
    log = TraceLog()
    log.emit(12, "edca-grant", 4, backoff=2)
    assert log.records[0].line() == "12 edca-grant node=4 backoff=2"
