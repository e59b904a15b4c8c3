"""Independent checkers shared by the unit and acceptance tests."""

from collections import deque
from typing import List, Tuple

from mistqueue import engine
from mistqueue.model import Trace
from mistqueue.policies import PolicyConfig


def csk_audit(trace: Trace, config: PolicyConfig, seed: int) -> Tuple[int, int, int]:
    """Run ``config`` and return (pushed-out CsK packets, CsK packets never
    transmitted, CsK packets seen).

    With a fixed selection a packet turns CsK exactly when it is accepted
    known and in class, or when a parse reveals it to be in class, so only
    those two moments are watched.
    """
    policy = engine.build_policy(trace, config, seed)
    if policy.selector is not None and policy.selector.oblivious:
        raise ValueError("csk_audit needs a fixed selection")
    pushed_csk = []
    csk_ids = set()
    next_new = [0]

    def on_push_out(p):
        if policy.is_csk(p):
            pushed_csk.append(p.id)

    parsed = policy.on_parsed

    def on_parsed(p):
        parsed(p)
        if policy.is_csk(p):
            csk_ids.add(p.id)

    def observer(step, cycle, pol):
        if step != "arrival":
            return
        lo = next_new[0]
        for p in pol.state.buffer:
            if p.id >= lo and pol.is_csk(p):
                csk_ids.add(p.id)
        next_new[0] = pol._next_id

    policy.on_push_out = on_push_out
    policy.on_parsed = on_parsed
    stats = engine.run(trace, config, seed, observer=observer, policy=policy)
    missing = csk_ids - set(stats.transmitted_ids)
    return len(pushed_csk), len(missing), len(csk_ids)


def fifo_oracle(trace: Trace, B: int) -> Tuple[int, List[int]]:
    """Plain FIFO written from scratch: accept while fewer than B packets
    are queued, run the head to completion, transmit at the start of the
    next cycle.  Returns (throughput, transmitted ids)."""
    queue = deque()  # [id, remaining, profit]
    arrivals = {b.cycle: b.packets for b in trace.batches}
    last = trace.last_cycle if trace.batches else -1
    next_id = 0
    total, sent = 0, []
    cycle = 0
    while cycle <= last or queue:
        if queue and queue[0][1] == 0:
            pid, _, profit = queue.popleft()
            total += profit
            sent.append(pid)
        if cycle > last and not queue:
            break
        for a in arrivals.get(cycle, ()):
            if len(queue) < B:
                queue.append([next_id, a.work, a.profit])
            next_id += 1
        if queue:
            queue[0][1] -= 1
        cycle += 1
    return total, sent
