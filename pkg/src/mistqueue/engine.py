"""Cycle-level simulation driver."""

from __future__ import annotations

import functools
import random
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .model import RunStats, Trace
from .policies import Policy, PolicyConfig, make_policy

STREAMS = ("traffic", "class", "admittance", "reservoir", "oblivious")

# observer(step, cycle, policy) with step in {"transmission", "arrival", "processing"}
Observer = Callable[[str, int, Policy], None]


def substreams(seed: int) -> Dict[str, random.Random]:
    """Independent named generators derived from one master seed.

    Each stochastic component draws from its own stream, so switching one
    of them off leaves the draws of the others unchanged.
    """
    return {name: random.Random(state) for name, state in zip(STREAMS, _stream_states(int(seed)))}


@functools.lru_cache(maxsize=4096)
def _stream_states(seed: int) -> Tuple[int, ...]:
    # spawning is slow next to a short run, and sweeps reuse each seed per policy
    children = np.random.SeedSequence(seed).spawn(len(STREAMS))
    return tuple(int(child.generate_state(2, np.uint64)[0]) for child in children)


def traffic_rng(seed: int) -> np.random.Generator:
    """numpy generator for the traffic stream of ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(int(seed)).spawn(len(STREAMS))[0])


def build_policy(trace: Trace, config: PolicyConfig, seed: int) -> Policy:
    rngs = substreams(seed)
    return make_policy(config, trace.W, trace.V, class_rng=rngs["class"],
                       admit_rng=rngs["admittance"], reservoir_rng=rngs["reservoir"],
                       oblivious_rng=rngs["oblivious"])


def run(trace: Trace, config: PolicyConfig, seed: int = 0, observer: Optional[Observer] = None,
        policy: Optional[Policy] = None) -> RunStats:
    """Simulate ``config`` over ``trace``.

    Cycles run from 0 through the last arrival cycle, then continue with
    no arrivals until the buffer drains.  Deterministic in
    (trace, config, seed).
    """
    trace.validate()
    config.validate()
    if policy is None:
        policy = build_policy(trace, config, seed)

    by_cycle = {b.cycle: b.packets for b in trace.batches}
    last = trace.last_cycle if trace.batches else -1
    transmit, arrive, process, end = (policy.transmission_step, policy.arrival_step,
                                      policy.processing_step, policy.end_cycle)
    empty: Tuple = ()
    cycle = 0
    while cycle <= last:
        transmit(cycle)
        if observer:
            observer("transmission", cycle, policy)
        arrive(cycle, by_cycle.get(cycle, empty))
        if observer:
            observer("arrival", cycle, policy)
        process(cycle)
        if observer:
            observer("processing", cycle, policy)
        end(cycle)
        cycle += 1
    while True:
        transmit(cycle)
        if observer:
            observer("transmission", cycle, policy)
        if not policy.state.buffer:
            break
        arrive(cycle, empty)
        if observer:
            observer("arrival", cycle, policy)
        process(cycle)
        if observer:
            observer("processing", cycle, policy)
        end(cycle)
        cycle += 1
    if policy.selector is not None and policy.selector.selected is not None:
        policy.stats.selected = tuple(policy.selector.selected)
    return policy.stats


@dataclass
class BatchRow:
    trace_id: int
    policy: str
    seed: int
    stats: RunStats
    extra: Dict[str, object] = field(default_factory=dict)


@dataclass
class BatchResult:
    rows: List[BatchRow]

    def metric(self, policy: str, fn: Callable[[BatchRow], float]) -> List[float]:
        return [fn(r) for r in self.rows if r.policy == policy]

    def summary(self, fn: Callable[[BatchRow], float]) -> Dict[str, Tuple[float, float, int]]:
        """(mean, sample std, count) of ``fn`` per policy, in first-seen order."""
        out = {}
        for name in dict.fromkeys(r.policy for r in self.rows):
            vals = self.metric(name, fn)
            std = statistics.stdev(vals) if len(vals) > 1 else 0.0
            out[name] = (statistics.fmean(vals), std, len(vals))
        return out


def _run_job(job):
    trace_id, trace, config, seed = job
    return BatchRow(trace_id, config.name, seed, run(trace, config, seed))


def run_batch(traces: Sequence[Trace], policies: Sequence[PolicyConfig], seeds: Sequence[int],
              paired: bool = True, workers: int = 1) -> BatchResult:
    """Run every policy over the traces.

    ``paired`` runs trace k with seeds[k]; otherwise every (trace, seed)
    combination is run.  Rows are ordered by (trace, policy, seed) no
    matter how many workers are used.
    """
    if paired and len(seeds) != len(traces):
        raise ValueError("paired execution needs one seed per trace")
    jobs = []
    for t_idx, trace in enumerate(traces):
        trace_seeds = [seeds[t_idx]] if paired else list(seeds)
        for p_idx, config in enumerate(policies):
            for seed in trace_seeds:
                jobs.append(((t_idx, p_idx, seed), (t_idx, trace, config, seed)))
    jobs.sort(key=lambda j: j[0])
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_job, [j[1] for j in jobs], chunksize=4))
    else:
        rows = [_run_job(j[1]) for j in jobs]
    return BatchResult(rows)
