"""Packet classes and the randomly selected class a policy prioritises."""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from typing import Optional, Sequence, Set, Tuple

from .model import Packet


class Regime(enum.Enum):
    EXACT = "exact"
    CLOSURE = "closure"
    SMALL_SETS = "small-sets"


def _log_class(x: int) -> int:
    if x < 1:
        raise ValueError(f"class index undefined for value {x}")
    # ceil(log2 x) with 1 and 2 both in class 1
    return max(1, (x - 1).bit_length())


def _class_bounds(k: int) -> Tuple[int, int]:
    """Open-closed interval (lo, hi] of the values in class ``k``."""
    if k < 1:
        return (0, 0)
    return (0 if k == 1 else 1 << (k - 1), 1 << k)


def work_class(w: int) -> int:
    """Index i of the work-class holding work ``w``: 1 for w in [1, 2], else ceil(log2 w)."""
    return _log_class(w)


def profit_class(v: int) -> int:
    return _log_class(v)


def num_classes(limit: int) -> int:
    """Number of classes for values in [1, limit]; rounds up for non-powers of two."""
    return _log_class(max(limit, 2))


@dataclass(frozen=True, order=True)
class ClassId:
    i: int
    j: int


def class_of(work: int, profit: int, regime: Regime = Regime.EXACT) -> Tuple[int, int]:
    """The (work, profit) key under which a packet is uncovered in ``regime``."""
    if regime is Regime.SMALL_SETS:
        return (work, profit)
    return (work_class(work), profit_class(profit))


@dataclass
class ClassSelector:
    """The selected class of one policy instance.

    ``selected`` holds (i*, j*) class indices for EXACT and CLOSURE, and a
    concrete (w*, v*) pair for SMALL_SETS.  With ``oblivious`` set the
    selection starts empty and is driven by :func:`oblivious_uncover`.
    """

    regime: Regime
    selected: Optional[Tuple[int, int]] = None
    oblivious: bool = False
    seen: Set[Tuple[int, int]] = field(default_factory=set)
    work_values: Tuple[int, ...] = ()
    profit_values: Tuple[int, ...] = ()

    @property
    def count(self) -> int:
        return len(self.seen)

    def matches(self, work: int, profit: int) -> bool:
        sel = self.selected
        if sel is None:
            return False
        if self.regime is Regime.EXACT:
            return work_class(work) == sel[0] and profit_class(profit) == sel[1]
        if self.regime is Regime.CLOSURE:
            return work <= 1 << sel[0] and profit >= 1 << (sel[1] - 1)
        return work == sel[0] and profit == sel[1]

    def member_test(self):
        """A fast ``(work, profit) -> bool`` predicate for the current selection."""
        sel = self.selected
        if sel is None:
            return lambda w, v: False
        if self.regime is Regime.CLOSURE:
            wmax, vmin = 1 << sel[0], 1 << (sel[1] - 1)
            return lambda w, v: w <= wmax and v >= vmin
        if self.regime is Regime.SMALL_SETS:
            return lambda w, v: w == sel[0] and v == sel[1]
        # class k covers (2^(k-1), 2^k], with class 1 also taking the value 1
        wlo, whi = _class_bounds(sel[0])
        vlo, vhi = _class_bounds(sel[1])
        return lambda w, v: wlo < w <= whi and vlo < v <= vhi


class UnknownPacketQuery(RuntimeError):
    pass


def is_selected(packet: Packet, sel: ClassSelector) -> bool:
    if not packet.known:
        raise UnknownPacketQuery(f"class of unknown packet {packet.id} queried")
    return sel.matches(packet.total_work, packet.profit)


def select_class(rng: random.Random, W: int, V: int, regime: Regime = Regime.EXACT,
                 work_values: Sequence[int] = (), profit_values: Sequence[int] = (),
                 oblivious: bool = False) -> ClassSelector:
    """Pick the selected class uniformly at random.

    EXACT/CLOSURE draw (i*, j*) from [1, log2 W] x [1, log2 V]; SMALL_SETS
    draws (w*, v*) from the declared value sets.  An oblivious selector
    draws nothing up front.
    """
    lw, lv = tuple(sorted(set(work_values))), tuple(sorted(set(profit_values)))
    if oblivious:
        return ClassSelector(regime, None, True, work_values=lw, profit_values=lv)
    if regime is Regime.SMALL_SETS:
        if not lw or not lv:
            raise ValueError("small-sets selection needs nonempty work and profit value sets")
        if lw[0] < 1 or lv[0] < 1:
            raise ValueError("value sets must hold positive integers")
        pick = (lw[rng.randrange(len(lw))], lv[rng.randrange(len(lv))])
    else:
        pick = (rng.randrange(num_classes(W)) + 1, rng.randrange(num_classes(V)) + 1)
    return ClassSelector(regime, pick, False, work_values=lw, profit_values=lv)


def fixed_selector(regime: Regime, selected: Tuple[int, int]) -> ClassSelector:
    return ClassSelector(regime, tuple(selected))


def oblivious_uncover(sel: ClassSelector, revealed: Tuple[int, int], rng: random.Random) -> ClassSelector:
    """Reservoir step over uncovered classes.

    A class not seen before bumps the count N and replaces the selection
    with probability 1/N.  Already-seen classes change nothing.  Mutates
    and returns ``sel``.
    """
    if not sel.oblivious:
        raise ValueError("selector is not in oblivious mode")
    revealed = tuple(revealed)
    if revealed in sel.seen:
        return sel
    sel.seen.add(revealed)
    if rng.random() * len(sel.seen) < 1.0:
        sel.selected = revealed
    return sel
