"""Domain types shared by the simulator, the policies and the analysis code."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Tuple


class Phase(enum.Enum):
    FILL = "fill"
    FLUSH = "flush"


class Arrival(NamedTuple):
    """Descriptor of one arriving packet as it appears in a trace."""

    work: int
    profit: int
    known: bool


@dataclass(slots=True, eq=False)
class Packet:
    """A unit-size packet inside the queue.

    ``known`` is False for a U-packet until its first processing cycle.
    Ids are handed out in trace order, so comparing ids compares arrival
    order (cycle, then position within the batch).
    """

    id: int
    total_work: int
    profit: int
    known: bool
    arrival_cycle: int = 0
    remaining_work: int = -1
    admitted: bool = False
    rank: tuple = ()  # the owning policy's cached sort key

    def __post_init__(self) -> None:
        if self.remaining_work < 0:
            self.remaining_work = self.total_work
        if not 0 <= self.remaining_work <= self.total_work:
            raise ValueError(f"remaining work {self.remaining_work} outside [0, {self.total_work}]")

    @property
    def transmittable(self) -> bool:
        return self.remaining_work == 0

    @property
    def processed(self) -> bool:
        return self.remaining_work < self.total_work


class EngineError(RuntimeError):
    """An internal contract of the cycle engine was broken."""


def apply_processing(packet: Packet) -> Packet:
    """Run one processing cycle on ``packet`` in place and return it.

    The first cycle spent on a U-packet is its parsing cycle, after which
    its work and profit are known.
    """
    if packet.remaining_work < 1:
        raise EngineError(f"packet {packet.id} has no remaining work")
    packet.remaining_work -= 1
    packet.known = True
    return packet


@dataclass(frozen=True)
class ArrivalBatch:
    cycle: int
    packets: Tuple[Arrival, ...]

    def __len__(self) -> int:
        return len(self.packets)


@dataclass
class Trace:
    """Per-cycle arrival batches plus the parameters that produced them.

    Only non-empty cycles are stored; ``meta`` always carries ``W``, ``V``
    and ``seed``.
    """

    batches: List[ArrivalBatch]
    meta: Dict[str, object] = field(default_factory=dict)

    @property
    def W(self) -> int:
        return int(self.meta["W"])

    @property
    def V(self) -> int:
        return int(self.meta["V"])

    @property
    def seed(self) -> int:
        return int(self.meta.get("seed", 0))

    @property
    def num_packets(self) -> int:
        return sum(len(b) for b in self.batches)

    @property
    def first_cycle(self) -> Optional[int]:
        return self.batches[0].cycle if self.batches else None

    @property
    def last_cycle(self) -> Optional[int]:
        return self.batches[-1].cycle if self.batches else None

    def arrivals(self):
        for batch in self.batches:
            yield from batch.packets

    def validate(self) -> None:
        W, V = self.W, self.V
        prev = -1
        for batch in self.batches:
            if batch.cycle <= prev:
                raise ValueError(f"cycle {batch.cycle} does not follow cycle {prev}")
            if not batch.packets:
                raise ValueError(f"empty batch stored for cycle {batch.cycle}")
            prev = batch.cycle
            for a in batch.packets:
                if not 1 <= a.work <= W:
                    raise ValueError(f"cycle {batch.cycle}: work {a.work} outside [1, {W}]")
                if not 1 <= a.profit <= V:
                    raise ValueError(f"cycle {batch.cycle}: profit {a.profit} outside [1, {V}]")


@dataclass
class RunStats:
    """Counters collected by one simulation run.

    ``parse_cycles + work_cycles + idle_cycles`` equals the number of
    simulated cycles. ``per_class_profit`` is keyed by the exact
    (work-class, profit-class) pair of each transmitted packet.
    """

    throughput: int = 0
    transmitted_count: int = 0
    accepted_count: int = 0
    rejected_count: int = 0
    pushed_out_count: int = 0
    parse_cycles: int = 0
    work_cycles: int = 0
    idle_cycles: int = 0
    cycles: int = 0
    flush_entries: int = 0
    per_class_profit: Dict[Tuple[int, int], int] = field(default_factory=dict)
    transmitted_ids: List[int] = field(default_factory=list)
    selected: Optional[Tuple[int, int]] = None  # the policy's class at the end of the run

    @property
    def dropped_count(self) -> int:
        """Arrivals refused plus queued packets pushed out."""
        return self.rejected_count + self.pushed_out_count
