import pytest

from mistqueue.model import Arrival, ArrivalBatch, EngineError, Packet, RunStats, Trace, apply_processing


def test_parsing_cycle_reveals_unknown_packet():
    p = apply_processing(Packet(0, 5, 3, known=False))
    assert (p.remaining_work, p.known) == (4, True)


def test_last_cycle_makes_packet_transmittable():
    p = apply_processing(Packet(0, 1, 3, known=True))
    assert p.remaining_work == 0 and p.known and p.transmittable


def test_plain_work_cycle():
    p = apply_processing(Packet(0, 3, 3, known=True))
    assert (p.remaining_work, p.known, p.transmittable) == (2, True, False)


def test_processing_finished_packet_is_engine_bug():
    with pytest.raises(EngineError):
        apply_processing(Packet(0, 2, 1, True, remaining_work=0))


def test_known_never_reverts_and_work_drops_by_one():
    p = Packet(0, 4, 1, known=False)
    seen = []
    while p.remaining_work:
        before = p.remaining_work
        apply_processing(p)
        assert p.remaining_work == before - 1
        seen.append(p.known)
    assert seen == [True] * 4


def test_packet_defaults_and_range():
    p = Packet(3, 7, 2, True)
    assert p.remaining_work == 7 and not p.processed
    with pytest.raises(ValueError):
        Packet(0, 3, 1, True, remaining_work=4)


def test_trace_validate_rejects_bad_batches():
    ok = Trace([ArrivalBatch(0, (Arrival(1, 1, True),)), ArrivalBatch(4, (Arrival(256, 16, False),))],
               {"W": 256, "V": 16, "seed": 0})
    ok.validate()
    assert (ok.num_packets, ok.first_cycle, ok.last_cycle) == (2, 0, 4)
    bad_order = Trace([ArrivalBatch(2, (Arrival(1, 1, True),)), ArrivalBatch(2, (Arrival(1, 1, True),))],
                      {"W": 4, "V": 4, "seed": 0})
    with pytest.raises(ValueError):
        bad_order.validate()
    with pytest.raises(ValueError):
        Trace([ArrivalBatch(0, (Arrival(5, 1, True),))], {"W": 4, "V": 4}).validate()
    with pytest.raises(ValueError):
        Trace([ArrivalBatch(0, (Arrival(1, 0, True),))], {"W": 4, "V": 4}).validate()


def test_empty_trace_has_no_cycles():
    t = Trace([], {"W": 2, "V": 2, "seed": 1})
    assert t.first_cycle is None and t.last_cycle is None and t.num_packets == 0


def test_dropped_count_adds_rejections_and_push_outs():
    s = RunStats(rejected_count=3, pushed_out_count=2)
    assert s.dropped_count == 5
