import io

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mistqueue import traceio
from mistqueue.model import Arrival, ArrivalBatch, Trace
from mistqueue.traffic import TrafficConfig, generate_trace


def test_empty_trace_is_header_only():
    t = Trace([], {"W": 256, "V": 16, "seed": 9})
    text = traceio.dumps(t)
    assert text.splitlines() == ["#mistqueue-trace v1 W=256 V=16 seed=9"]
    back = traceio.loads(text)
    assert back.batches == [] and back.meta == t.meta


def test_generated_trace_round_trips(tmp_path):
    t = generate_trace(TrafficConfig(total_packets=500, seed=4), 4)
    path = tmp_path / "t.trace"
    traceio.save(t, path)
    back = traceio.load(path)
    assert back.batches == t.batches
    assert back.meta == t.meta


def test_line_format():
    t = Trace([ArrivalBatch(3, (Arrival(5, 2, True), Arrival(1, 16, False)))], {"W": 8, "V": 16, "seed": 1})
    assert traceio.dumps(t).splitlines()[1] == "3\t2\t5:2:K,1:16:U"


arrivals = st.builds(Arrival, st.integers(1, 64), st.integers(1, 8), st.booleans())


@st.composite
def traces(draw):
    cycles = sorted(draw(st.sets(st.integers(0, 10_000), max_size=12)))
    batches = [ArrivalBatch(c, tuple(draw(st.lists(arrivals, min_size=1, max_size=6)))) for c in cycles]
    meta = {"W": 64, "V": 8, "seed": draw(st.integers(0, 2**32)),
            "alpha": draw(st.floats(0, 1)), "note": draw(st.sampled_from(["x", "abc"])),
            "flag": draw(st.booleans())}
    return Trace(batches, meta)


@given(traces())
def test_round_trip_property(t):
    back = traceio.loads(traceio.dumps(t))
    assert back.batches == t.batches and back.meta == t.meta


def test_out_of_range_work_names_line():
    text = "#mistqueue-trace v1 W=256 V=16 seed=0\n0\t1\t1:1:K\n5\t1\t300:2:U\n"
    with pytest.raises(traceio.TraceFormatError) as err:
        traceio.loads(text)
    assert err.value.line_no == 3 and "line 3" in str(err.value)


@pytest.mark.parametrize("body, line", [
    ("0\t2\t1:1:K\n", 2),             # count does not match
    ("0\t1\t1:1:X\n", 2),             # bad known flag
    ("0\t1\t1:17:K\n", 2),            # profit above V
    ("0\t1\t1:1\n", 2),               # missing field
    ("4\t1\t1:1:K\n2\t1\t1:1:K\n", 3),  # cycles not increasing
    ("zero\t1\t1:1:K\n", 2),
])
def test_malformed_lines_rejected(body, line):
    with pytest.raises(traceio.TraceFormatError) as err:
        traceio.loads("#mistqueue-trace v1 W=256 V=16 seed=0\n" + body)
    assert err.value.line_no == line


@pytest.mark.parametrize("header", ["", "#other v1 W=2 V=2 seed=0", "#mistqueue-trace v2 W=2 V=2 seed=0",
                                    "#mistqueue-trace v1 W=2 seed=0"])
def test_bad_header(header):
    with pytest.raises(traceio.TraceFormatError) as err:
        traceio.read_trace(io.StringIO(header + "\n"))
    assert err.value.line_no == 1
