import itertools
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mistqueue import engine
from mistqueue.knapsack import (benchmark, exact_knapsack, greedy_knapsack, knapsack_upper_bound,
                                performance_ratio, trace_capacity)
from mistqueue.policies import POLICY_NAMES, PolicyConfig
from mistqueue.traffic import TrafficConfig, generate_trace

from conftest import make_trace


def brute_force(items, capacity):
    best = 0
    for mask in itertools.product((0, 1), repeat=len(items)):
        size = sum(s for (s, _), m in zip(items, mask) if m)
        if size <= capacity:
            best = max(best, sum(v for (_, v), m in zip(items, mask) if m))
    return best


def test_three_item_example():
    items = [(2, 3), (3, 4), (4, 5)]
    assert greedy_knapsack(items, 5) == 7
    assert exact_knapsack(items, 5) == brute_force(items, 5) == 7


def test_oversized_single_item():
    assert greedy_knapsack([(5, 9)], 4) == 0
    assert greedy_knapsack([], 10) == 0
    assert greedy_knapsack([(1, 1)], 0) == 0


def test_best_single_item_rule():
    # density order takes (1, 2) and then stops at (10, 10)
    assert greedy_knapsack([(1, 2), (10, 10)], 10) == 10
    assert exact_knapsack([(1, 2), (10, 10)], 10) == 10


@given(st.lists(st.tuples(st.integers(1, 12), st.integers(1, 30)), max_size=10), st.integers(0, 40))
def test_dp_matches_brute_force(items, capacity):
    assert exact_knapsack(items, capacity) == brute_force(items, capacity)


@given(st.lists(st.tuples(st.integers(1, 12), st.integers(1, 30)), max_size=10), st.integers(0, 40))
def test_greedy_half_approximation(items, capacity):
    g = greedy_knapsack(items, capacity)
    opt = brute_force(items, capacity)
    assert opt / 2 <= g <= opt


def test_greedy_half_approximation_random_instances():
    rng = random.Random(17)
    for _ in range(200):
        items = [(rng.randint(1, 30), rng.randint(1, 50)) for _ in range(rng.randint(0, 14))]
        cap = rng.randint(0, 120)
        assert 2 * greedy_knapsack(items, cap) >= brute_force(items, cap)


def test_capacity_modes():
    trace = make_trace([(3, [(1, 1, True)]), (5, [(2, 2, True)]), (10, [(1, 1, False)])])
    assert trace_capacity(trace) == 8
    assert trace_capacity(trace, nonempty_only=True) == 3
    assert trace_capacity(make_trace([])) == 0


def test_benchmark_fields():
    trace = make_trace([(0, [(1, 5, True)])], V=16)
    b = benchmark(trace, B=10, V=16)
    assert (b.greedy, b.capacity) == (5, 1)
    assert b.ub_greedy == 5 + 160 and b.ub_certified == 10 + 160
    assert b.ratio(5) == pytest.approx(5 / 165)
    assert knapsack_upper_bound(make_trace([]), 10, 16) == 160


def test_performance_ratio_examples():
    assert performance_ratio(50, 100) == 0.5
    assert performance_ratio(0, 100) == 0
    assert performance_ratio(37, 37) == 1
    assert performance_ratio(0, 0) == 0
    with pytest.raises(ZeroDivisionError):
        performance_ratio(1, 0)


@pytest.mark.parametrize("seed", range(3))
def test_certified_bound_dominates_every_policy(seed):
    trace = generate_trace(TrafficConfig(total_packets=1500, seed=seed), engine.traffic_rng(seed))
    ub = knapsack_upper_bound(trace, 10, 16)
    for name in POLICY_NAMES:
        kw = {"work_values": (1, 2, 4, 8), "profit_values": (1, 2, 4)} if name == "sam-ss" else {}
        stats = engine.run(trace, PolicyConfig.from_name(name, **kw), seed)
        assert stats.throughput <= ub
