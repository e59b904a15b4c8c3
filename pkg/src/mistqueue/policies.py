"""Online queue-management policies.

Every policy owns a bounded buffer and is driven once per cycle by the
engine through :meth:`Policy.transmission_step`, :meth:`Policy.arrival_step`
and :meth:`Policy.processing_step`, in that order.

``PLAIN_FIFO`` accepts while there is room and runs packets to completion.
``SAM`` keeps known packets of the selected class ahead of everything
else, speculatively parses one randomly admitted U-packet per admittance
cycle and alternates between filling and flushing the buffer.  ``SAO``
adds class closure, filling during flush and a configurable order inside
the priority bands.  ``SAM_SS`` is SAM over concrete (work, profit) values.
"""

from __future__ import annotations

import copy
import enum
import math
import random
from dataclasses import dataclass, field
from operator import attrgetter
from typing import Callable, List, Optional, Sequence, Set

from .classes import ClassSelector, Regime, class_of, oblivious_uncover, select_class, work_class, profit_class
from .model import Arrival, Packet, Phase, RunStats, apply_processing


class Kind(enum.Enum):
    PLAIN_FIFO = "fifo"
    SAM = "sam"
    SAO = "sao"
    SAM_SS = "sam-ss"


class Order(enum.Enum):
    FIFO = "fifo"
    W_THEN_V = "wtv"
    EFFECT = "effect"


POLICY_NAMES = ("fifo", "sam", "sao-fifo", "sao-wtv", "sao-effect", "sam-ss")

_NATURAL_REGIME = {
    Kind.PLAIN_FIFO: Regime.EXACT,
    Kind.SAM: Regime.EXACT,
    Kind.SAO: Regime.CLOSURE,
    Kind.SAM_SS: Regime.SMALL_SETS,
}


def decide_admittance(rng: random.Random, r: float) -> bool:
    """True with probability ``r``."""
    return rng.random() < r


def admit_candidate(rng: random.Random, count_so_far: int) -> bool:
    """Reservoir step: the ``count_so_far``-th U-arrival of the cycle
    replaces the current candidate with probability 1/count_so_far."""
    if count_so_far < 1:
        raise ValueError("count_so_far must be at least 1")
    return rng.random() * count_so_far < 1.0


@dataclass
class PolicyConfig:
    kind: Kind = Kind.SAM
    r: float = 1.0
    order: Order = Order.FIFO
    pipelining: bool = False
    B: int = 10
    regime: Optional[Regime] = None
    selection: Optional[tuple] = None  # fixed (i*, j*) or (w*, v*); None draws one per run
    selector: Optional[ClassSelector] = None  # template, copied per run; overrides the two above
    oblivious: bool = False
    work_values: Sequence[int] = ()
    profit_values: Sequence[int] = ()
    batch_sort: bool = False
    name: str = ""

    def __post_init__(self):
        if not self.name:
            self.name = self.kind.value if self.kind is not Kind.SAO else f"sao-{self.order.value}"

    @property
    def effective_regime(self) -> Regime:
        if self.selector is not None:
            return self.selector.regime
        return self.regime or _NATURAL_REGIME[self.kind]

    def validate(self) -> None:
        if self.B < 2:
            raise ValueError("B must be at least 2")
        if not 0.0 <= self.r <= 1.0:
            raise ValueError(f"r={self.r} outside [0, 1]")
        if self.selection is not None and len(self.selection) != 2:
            raise ValueError("selection must be a pair")

    def make_selector(self, W: int, V: int, rng: random.Random) -> ClassSelector:
        if self.selector is not None:
            return copy.deepcopy(self.selector)
        regime = self.effective_regime
        if self.oblivious:
            return select_class(rng, W, V, regime, self.work_values, self.profit_values, oblivious=True)
        if self.selection is not None:
            return ClassSelector(regime, tuple(self.selection),
                                 work_values=tuple(self.work_values), profit_values=tuple(self.profit_values))
        return select_class(rng, W, V, regime, self.work_values, self.profit_values)

    @classmethod
    def from_name(cls, name: str, **kwargs) -> "PolicyConfig":
        """Build the config behind a CLI policy name such as ``sao-effect``."""
        name = name.strip().lower()
        if name == "fifo":
            return cls(kind=Kind.PLAIN_FIFO, name=name, **kwargs)
        if name == "sam":
            return cls(kind=Kind.SAM, name=name, **kwargs)
        if name == "sam-ss":
            return cls(kind=Kind.SAM_SS, name=name, **kwargs)
        if name.startswith("sao-"):
            try:
                order = Order(name[4:])
            except ValueError:
                raise ValueError(f"unknown SAO order in {name!r}") from None
            kwargs.setdefault("pipelining", True)
            return cls(kind=Kind.SAO, order=order, name=name, **kwargs)
        raise ValueError(f"unknown policy {name!r}; expected one of {', '.join(POLICY_NAMES)}")


@dataclass
class QueueState:
    buffer: List[Packet] = field(default_factory=list)
    phase: Phase = Phase.FILL
    admitted: Optional[Packet] = None
    barrier: Set[int] = field(default_factory=set)
    u_seen_this_cycle: int = 0


class Policy:
    """Base class: greedy FIFO buffer with run-to-completion processing."""

    def __init__(self, config: PolicyConfig, selector: Optional[ClassSelector] = None,
                 admit_rng: Optional[random.Random] = None, reservoir_rng: Optional[random.Random] = None,
                 oblivious_rng: Optional[random.Random] = None):
        config.validate()
        self.config = config
        self.B = config.B
        self.selector = selector
        self.admit_rng = admit_rng or random.Random(0)
        self.reservoir_rng = reservoir_rng or random.Random(1)
        self.oblivious_rng = oblivious_rng or random.Random(2)
        self.state = QueueState()
        self.stats = RunStats()
        self._next_id = 0
        self._finished: List[Packet] = []
        # fired with the victim whenever a queued packet is pushed out
        self.on_push_out: Optional[Callable[[Packet], None]] = None

    # -- helpers -------------------------------------------------------

    def new_packet(self, arrival: Arrival, cycle: int) -> Packet:
        pkt = Packet(self._next_id, arrival.work, arrival.profit, arrival.known, cycle)
        self._next_id += 1
        return pkt

    def is_csk(self, packet: Packet) -> bool:
        """Known packet of the currently selected class."""
        return packet.known and self.selector is not None and self.selector.matches(packet.total_work, packet.profit)

    def _reject(self, n: int = 1) -> None:
        self.stats.rejected_count += n

    # -- cycle steps ---------------------------------------------------

    def transmission_step(self, cycle: int) -> List[Packet]:
        # only the packet processed last cycle can have reached zero work
        done = self._finished
        if not done:
            return []
        self._finished = []
        st = self.state
        st.buffer = [p for p in st.buffer if p.remaining_work != 0]
        stats = self.stats
        for p in done:
            stats.throughput += p.profit
            stats.transmitted_count += 1
            stats.transmitted_ids.append(p.id)
            key = (work_class(p.total_work), profit_class(p.profit))
            stats.per_class_profit[key] = stats.per_class_profit.get(key, 0) + p.profit
            st.barrier.discard(p.id)
        return done

    def arrival_step(self, cycle: int, arrivals: Sequence[Arrival]) -> None:
        st = self.state
        for a in arrivals:
            pkt = self.new_packet(a, cycle)
            if len(st.buffer) < self.B:
                st.buffer.append(pkt)
                self.stats.accepted_count += 1
            else:
                self._reject()

    def processing_step(self, cycle: int) -> Optional[Packet]:
        st = self.state
        self.stats.cycles += 1
        if not st.buffer:
            self.stats.idle_cycles += 1
            return None
        target = st.buffer[0]
        self._process(target)
        return target

    def end_cycle(self, cycle: int) -> None:
        pass

    def _process(self, target: Packet) -> None:
        if target.known:
            self.stats.work_cycles += 1
            apply_processing(target)
        else:
            self.stats.parse_cycles += 1
            apply_processing(target)
            self.on_parsed(target)
        if target.remaining_work == 0:
            self._finished.append(target)

    def on_parsed(self, packet: Packet) -> None:
        pass

    @property
    def buffer(self) -> List[Packet]:
        return self.state.buffer

    @property
    def phase(self) -> Phase:
        return self.state.phase


class PlainFifo(Policy):
    pass


class SpeculativePolicy(Policy):
    """SAM, SAM-SS and the SAO flavours.

    The buffer is kept sorted by a per-packet rank cached in
    ``Packet.rank``.  A rank is refreshed when its packet is accepted,
    processed or gains/loses admitted status, and all ranks are refreshed
    when the phase, the flush barrier or the selected class changes.
    """

    def __init__(self, config: PolicyConfig, selector: ClassSelector, **rngs):
        super().__init__(config, selector, **rngs)
        self.r = config.r
        self.three_bands = config.kind is Kind.SAO
        self.pipelining = config.pipelining
        self.order = config.order
        self.batch_sort = config.batch_sort
        self._member = selector.member_test()
        self._dirty = False

    # -- selection -----------------------------------------------------

    def _uncover(self, work: int, profit: int) -> None:
        sel = self.selector
        before = sel.selected
        oblivious_uncover(sel, class_of(work, profit, sel.regime), self.oblivious_rng)
        if sel.selected != before:
            self._member = sel.member_test()
            self.sort_buffer(rerank=True)
            # a packet being processed right now is re-ranked after this
            self._dirty = True

    def on_parsed(self, packet: Packet) -> None:
        if self.selector.oblivious:
            self._uncover(packet.total_work, packet.profit)

    def is_csk(self, packet: Packet) -> bool:
        return packet.known and self._member(packet.total_work, packet.profit)

    # -- ordering ------------------------------------------------------

    def rank_of(self, p: Packet) -> tuple:
        """Sort key of ``p``; smaller ranks are served first."""
        st = self.state
        outside = 1 if st.phase is Phase.FLUSH and st.barrier and p.id not in st.barrier else 0
        csk = p.known and self._member(p.total_work, p.profit)
        if not self.three_bands:
            return (outside, 0 if csk else 1, 0, p.id)
        wtv = self.order is Order.W_THEN_V
        if p.known:
            order = self.order
            if order is Order.FIFO:
                k = 0
            elif wtv:
                k = (p.remaining_work, -p.profit)
            else:
                k = -p.profit / p.remaining_work if p.remaining_work else -math.inf
            return (outside, 0 if csk else 2, k, p.id)
        return (outside, 1 if p is st.admitted else 3, (0, 0) if wtv else 0, p.id)

    def sort_buffer(self, rerank: bool = False) -> None:
        buf = self.state.buffer
        if rerank:
            for p in buf:
                p.rank = self.rank_of(p)
        buf.sort(key=_RANK)
        self._dirty = False

    # -- phase machine ---------------------------------------------------

    def is_hfull(self) -> bool:
        buf = self.state.buffer
        if len(buf) < self.B:
            return False
        member = self._member
        return all(p.known and member(p.total_work, p.profit) for p in buf)

    def update_phase(self) -> Phase:
        """Empty buffer means FILL; an Hfull buffer in FILL means FLUSH.

        With pipelining the FLUSH phase ends once the packets present at
        its start (the barrier) are gone, and Hfull is re-checked at once.
        """
        st = self.state
        if not st.buffer:
            st.phase = Phase.FILL
            st.barrier.clear()
            return st.phase
        changed = False
        if st.phase is Phase.FLUSH:
            if not (self.pipelining and not st.barrier):
                return st.phase
            st.phase = Phase.FILL
            changed = True
        if self.is_hfull():
            st.phase = Phase.FLUSH
            self.stats.flush_entries += 1
            if self.pipelining:
                st.barrier = {p.id for p in st.buffer}
            changed = True
        if changed:
            self.sort_buffer(rerank=True)
        return st.phase

    # -- cycle steps ---------------------------------------------------

    def _victim(self) -> Optional[Packet]:
        """Lowest-priority queued packet that may be pushed out, if any."""
        st = self.state
        buf = sorted(st.buffer, key=_RANK) if self.batch_sort else st.buffer
        for p in reversed(buf):
            if p.id in st.barrier:
                continue
            if self.is_csk(p):
                return None
            return p
        return None

    def _set_admitted(self, pkt: Optional[Packet]) -> None:
        st = self.state
        old = st.admitted
        st.admitted = pkt
        if old is not None:
            old.admitted = False
        if pkt is not None:
            pkt.admitted = True
        if self.three_bands:
            if old is not None:
                old.rank = self.rank_of(old)
            if pkt is not None:
                pkt.rank = self.rank_of(pkt)

    def arrival_step(self, cycle: int, arrivals: Sequence[Arrival]) -> None:
        st = self.state
        stats = self.stats
        self.update_phase()
        st.u_seen_this_cycle = 0
        if not arrivals:
            return
        admittance = False
        if any(not a.known for a in arrivals):
            admittance = decide_admittance(self.admit_rng, self.r)
        oblivious = self.selector.oblivious
        accepted_any = False

        for a in arrivals:
            pkt = self.new_packet(a, cycle)
            if a.known and oblivious:
                self._uncover(a.work, a.profit)
            if not a.known:
                st.u_seen_this_cycle += 1
            if st.phase is Phase.FLUSH and not self.pipelining:
                self._reject()
                continue
            filling = st.phase is Phase.FILL
            chosen = (filling and admittance and not a.known
                      and admit_candidate(self.reservoir_rng, st.u_seen_this_cycle))

            if len(st.buffer) >= self.B:
                if not ((a.known and self._member(a.work, a.profit)) or chosen):
                    self._reject()
                    continue
                victim = self._victim()
                if victim is None:
                    self._reject()
                    continue
                st.buffer.remove(victim)
                stats.pushed_out_count += 1
                if victim is st.admitted:
                    self._set_admitted(None)
                if self.on_push_out is not None:
                    self.on_push_out(victim)

            st.buffer.append(pkt)
            stats.accepted_count += 1
            accepted_any = True
            if chosen:
                self._set_admitted(pkt)
            pkt.rank = self.rank_of(pkt)
            if not self.batch_sort:
                self.update_phase()
                self.sort_buffer()
        if self.batch_sort and accepted_any:
            self.update_phase()
            self.sort_buffer()

    def processing_step(self, cycle: int) -> Optional[Packet]:
        st = self.state
        self.stats.cycles += 1
        if not st.buffer:
            self.stats.idle_cycles += 1
            return None
        admitted = st.admitted
        target = admitted if (st.phase is Phase.FILL and admitted is not None) else st.buffer[0]
        if target is not st.buffer[0]:
            st.buffer.remove(target)
            st.buffer.insert(0, target)
        self._process(target)
        if target is admitted:
            # parsed: it competes by the ordinary rules from now on
            self._set_admitted(None)
            self._dirty = True
        target.rank = self.rank_of(target)
        self.update_phase()
        # Processing an ordinary head-of-line packet only raises its
        # priority, so the order survives unless something else changed.
        if self._dirty:
            self.sort_buffer()
        return target

    def end_cycle(self, cycle: int) -> None:
        if self.state.admitted is not None:
            self._set_admitted(None)
            self.sort_buffer()


_RANK = attrgetter("rank")


def make_policy(config: PolicyConfig, W: int, V: int, class_rng: Optional[random.Random] = None,
                **rngs) -> Policy:
    if config.kind is Kind.PLAIN_FIFO:
        return PlainFifo(config, None, **rngs)
    selector = config.make_selector(W, V, class_rng or random.Random(0))
    return SpeculativePolicy(config, selector, **rngs)
