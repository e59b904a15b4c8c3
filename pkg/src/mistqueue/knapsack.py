"""Offline knapsack benchmark used as the yardstick for simulated throughput."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple

from .model import Trace

Item = Tuple[int, int]  # (size, value)


def greedy_knapsack(items: Iterable[Item], capacity: int) -> int:
    """Classic 2-approximation.

    Items are taken in decreasing value/size order until the first one
    that does not fit; the answer is the better of that prefix and the
    most valuable single item that fits on its own.
    """
    if capacity <= 0:
        return 0
    fitting = [(s, v) for s, v in items if s <= capacity]
    if not fitting:
        return 0
    # value/size descending, ties keep input order
    order = sorted(range(len(fitting)), key=lambda k: (-fitting[k][1] / fitting[k][0], k))
    used = total = 0
    for k in order:
        s, v = fitting[k]
        if used + s > capacity:
            break
        used += s
        total += v
    return max(total, max(v for _, v in fitting))


def exact_knapsack(items: Sequence[Item], capacity: int) -> int:
    """Exact 0/1 knapsack by dynamic programming over capacity."""
    if capacity <= 0:
        return 0
    best = [0] * (capacity + 1)
    for s, v in items:
        if s > capacity:
            continue
        for c in range(capacity, s - 1, -1):
            cand = best[c - s] + v
            if cand > best[c]:
                best[c] = cand
    return best[capacity]


def trace_items(trace: Trace) -> List[Item]:
    return [(a.work, a.profit) for a in trace.arrivals()]


def trace_capacity(trace: Trace, nonempty_only: bool = False) -> int:
    """Processing cycles available while packets arrive: the arrival span,
    or the number of cycles with arrivals when ``nonempty_only``."""
    if not trace.batches:
        return 0
    if nonempty_only:
        return len(trace.batches)
    return trace.last_cycle - trace.first_cycle + 1


@dataclass(frozen=True)
class Benchmark:
    greedy: int
    ub_greedy: float
    ub_certified: float
    capacity: int

    def ratio(self, throughput: int) -> float:
        return performance_ratio(throughput, self.ub_greedy)


def benchmark(trace: Trace, B: int, V: int, nonempty_only: bool = False) -> Benchmark:
    """Greedy knapsack value plus the B*V end-of-arrivals allowance.

    ``ub_greedy`` is greedy + B*V, the figure the performance ratio is
    measured against.  ``ub_certified`` doubles the greedy value first,
    which bounds the exact knapsack optimum and so the optimal
    throughput.
    """
    capacity = trace_capacity(trace, nonempty_only)
    g = greedy_knapsack(trace_items(trace), capacity)
    allowance = B * V
    return Benchmark(g, float(g + allowance), float(2 * g + allowance), capacity)


def knapsack_upper_bound(trace: Trace, B: int, V: int, nonempty_only: bool = False) -> float:
    return benchmark(trace, B, V, nonempty_only).ub_certified


def performance_ratio(alg_throughput: float, upper: float) -> float:
    if upper == 0:
        if alg_throughput == 0:
            return 0.0
        raise ZeroDivisionError("positive throughput against a zero upper bound")
    return alg_throughput / upper
