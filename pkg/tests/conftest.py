from typing import Iterable, Sequence, Tuple

import pytest
from hypothesis import settings

from mistqueue.model import Arrival, ArrivalBatch, Trace

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def make_trace(batches: Sequence[Tuple[int, Iterable[Tuple[int, int, bool]]]], W: int = 256, V: int = 16,
               seed: int = 0, **meta) -> Trace:
    """Trace from ``[(cycle, [(work, profit, known), ...]), ...]``."""
    out = [ArrivalBatch(c, tuple(Arrival(w, v, k) for w, v, k in pkts)) for c, pkts in batches]
    return Trace([b for b in out if b.packets], {"W": W, "V": V, "seed": seed, **meta})


@pytest.fixture
def trace_factory():
    return make_trace


# one "[PASS]/[FAIL] C<n> ..." line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1][1:])):
            terminalreporter.write_line(line)
