"""Lower-bound evaluators, the adversarial input family behind them and
the tail estimate on U-arrivals per burst cycle."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, List, Optional

import mpmath
import numpy as np

from .model import Arrival, ArrivalBatch, Trace

mpmath.mp.dps = 40

SMALL_M = "small-M"
LARGE_M = "large-M"
DEGENERATE = "degenerate"

# (e-1)/(2e)
_LARGE_M_CONST = (mpmath.e - 1) / (2 * mpmath.e)


class BoundViolation(AssertionError):
    """A proven inequality failed to hold numerically."""


@dataclass(frozen=True)
class BoundParams:
    V: int
    W: int
    w: int = 1
    M: int = 1
    r: float = 1.0

    def __post_init__(self):
        if self.V < 1 or self.W < 2 or self.M < 1:
            raise ValueError(f"need V >= 1, W >= 2, M >= 1 (got {self})")
        if not 1 <= self.w <= self.W:
            raise ValueError(f"minimum work w={self.w} outside [1, W={self.W}]")
        if not 0.0 <= self.r <= 1.0:
            raise ValueError("r outside [0, 1]")

    @property
    def denominator(self) -> int:
        return self.V * (self.W - 1) + 1 - self.w

    @property
    def degenerate(self) -> bool:
        """V=1 and w=W: every packet is identical and p* is undefined."""
        return self.denominator <= 0


def p_star(V: int, W: int, w: int) -> float:
    """Best-packet probability 1/(V(W-1)+1-w) of the adversarial input."""
    return float(p_star_exact(V, W, w))


def p_star_exact(V: int, W: int, w: int) -> Fraction:
    d = V * (W - 1) + 1 - w
    if d <= 0:
        raise ValueError(f"p* undefined for V={V}, W={W}, w={w}")
    return Fraction(1, d)


def _miss_probability(p, n):
    """(1-p)^n via exp(n*log1p(-p)), in mpmath precision."""
    p = mpmath.mpf(p)
    if p == 1:
        return mpmath.mpf(0)
    return mpmath.exp(n * mpmath.log1p(-p))


def _bound_mp(params: BoundParams, p=None):
    if params.degenerate:
        raise ValueError(f"bound undefined for degenerate parameters {params}")
    if p is None:
        p = mpmath.mpf(1) / params.denominator
    scale = mpmath.mpf(params.V * (params.W - 1)) / params.w
    return scale * (1 - _miss_probability(p, params.M * params.w))


def lower_bound_general(params: BoundParams) -> float:
    """(V(W-1)/w) * [1 - (1 - p*)^(Mw)]."""
    return float(_bound_mp(params))


def small_m_threshold(params: BoundParams) -> Fraction:
    """1/(p* w) + 1 - 1/w, which simplifies to V(W-1)/w."""
    return Fraction(params.V * (params.W - 1), params.w)


def region(params: BoundParams) -> str:
    if params.degenerate:
        return DEGENERATE
    return SMALL_M if params.M <= small_m_threshold(params) else LARGE_M


def check_small_M(params: BoundParams) -> bool:
    """bound >= M/2."""
    return bool(_bound_mp(params) >= mpmath.mpf(params.M) / 2)


def check_large_M(params: BoundParams) -> bool:
    """bound > ((e-1)/(2e)) * V W / w."""
    return bool(_bound_mp(params) > _LARGE_M_CONST * params.V * params.W / params.w)


def check(params: BoundParams) -> Optional[bool]:
    """The inequality check that applies in this region (None when degenerate)."""
    reg = region(params)
    if reg == SMALL_M:
        return check_small_M(params)
    if reg == LARGE_M:
        return check_large_M(params)
    return None


class Variant(enum.Enum):
    GENERAL = "general"
    UNIFORM_PROFIT = "uniform-profit"
    UNIFORM_WORK = "uniform-work"


def corollary_floor(V: int, W: int, M: int, variant: Variant = Variant.GENERAL) -> float:
    """Floor of the min(VW, M)-type corollaries at concrete parameters.

    Returns M/2 in the small-M region and ((e-1)/(2e)) V W / w otherwise,
    with w=1 (GENERAL, UNIFORM_PROFIT with V=1) or w=W (UNIFORM_WORK).
    Raises :class:`BoundViolation` if the general bound fails to dominate it.
    """
    variant = Variant(variant)
    if variant is Variant.UNIFORM_PROFIT and V != 1:
        raise ValueError("uniform profits means V=1")
    w = W if variant is Variant.UNIFORM_WORK else 1
    params = BoundParams(V, W, w, M)
    reg = region(params)
    if reg == DEGENERATE:
        raise ValueError(f"corollary undefined for {params}")
    if reg == SMALL_M:
        floor = mpmath.mpf(M) / 2
    else:
        floor = _LARGE_M_CONST * V * W / w
    if not _bound_mp(params) >= floor:
        raise BoundViolation(f"bound below corollary floor at {params}")
    return float(floor)


@dataclass(frozen=True)
class BoundRow:
    V: int
    W: int
    w: int
    M: int
    p_star: float
    bound: float
    region: str
    check: Optional[bool]


def bound_grid(Vs: Iterable[int], Ws: Iterable[int], ws: Optional[Iterable[int]] = None,
               Ms: Iterable[int] = range(1, 65), w_mode: str = "thirds") -> Iterator[BoundRow]:
    """Evaluate the bound and its region check over a grid.

    Without explicit ``ws`` the minimum work runs over {1, W/2, W}
    (``w_mode="thirds"``) or all of 1..W (``w_mode="all"``).
    """
    Ms = list(Ms)
    for V in Vs:
        for W in Ws:
            if ws is not None:
                w_values = [w for w in ws if 1 <= w <= W]
            elif w_mode == "all":
                w_values = range(1, W + 1)
            else:
                w_values = sorted({1, max(1, W // 2), W})
            for w in w_values:
                for M in Ms:
                    params = BoundParams(V, W, w, M)
                    if params.degenerate:
                        yield BoundRow(V, W, w, M, math.nan, math.nan, DEGENERATE, None)
                        continue
                    yield BoundRow(V, W, w, M, p_star(V, W, w), lower_bound_general(params),
                                   region(params), check(params))


# -- adversarial input and SubOPT ------------------------------------------

def adversarial_trace(params: BoundParams, N: int, B: int, rng: np.random.Generator,
                      p: Optional[float] = None) -> Trace:
    """N fill cycles of M U-packets each, then B*W empty flush cycles.

    Each packet is a best packet (work w, profit V) with probability p
    (default p*) and a worst packet (work W, profit 1) otherwise.
    """
    if p is None:
        p = p_star(params.V, params.W, params.w)
    if not 0.0 <= p <= 1.0:
        raise ValueError("p outside [0, 1]")
    best = Arrival(params.w, params.V, False)
    worst = Arrival(params.W, 1, False)
    draws = rng.random((N, params.M)) < p
    batches = [ArrivalBatch(t, tuple(best if b else worst for b in row)) for t, row in enumerate(draws)]
    meta = {"W": params.W, "V": params.V, "seed": 0, "w": params.w, "M": params.M, "p": float(p),
            "fill_cycles": N, "flush_cycles": B * params.W, "B": B}
    return Trace(batches, meta)


def subopt_run(trace: Trace, params: BoundParams, B: int = 2) -> int:
    """Throughput of the period-based offline policy on an adversarial trace.

    Fill-phase cycles are grouped into periods of w cycles.  In each
    period the policy keeps the first best packet that arrives.  During
    the next period it spends w cycles on that pick and transmits it in
    the period's last cycle.  After arrivals end it finishes the final
    pick.  It never holds more than two packets.
    """
    if B < 2:
        raise ValueError("SubOPT needs room for two packets")
    w, V = params.w, params.V
    fill = int(trace.meta.get("fill_cycles", (trace.last_cycle + 1) if trace.batches else 0))
    by_cycle = {b.cycle: b.packets for b in trace.batches}

    def is_best(a: Arrival) -> bool:
        return a.work == w and a.profit == V

    profit = 0
    in_service = None  # remaining work of the packet being processed
    cycle = 0
    n_periods = -(-fill // w)
    for period in range(n_periods):
        pick_this = False
        for offset in range(w):
            if cycle < fill and not pick_this and any(is_best(a) for a in by_cycle.get(cycle, ())):
                pick_this = True
            if in_service is not None:
                in_service -= 1
                if in_service == 0:
                    profit += V
                    in_service = None
            cycle += 1
        if in_service is not None:
            raise RuntimeError("pick not finished within its period")
        in_service = w if pick_this else None
    # flush: finish the last pick
    while in_service is not None:
        in_service -= 1
        if in_service == 0:
            profit += V
            in_service = None
    return profit


def subopt_expectation(params: BoundParams, N: int, p: Optional[float] = None) -> float:
    """(N V / w) * [1 - (1 - p)^(Mw)]."""
    if p is None:
        p = p_star(params.V, params.W, params.w)
    return float(mpmath.mpf(N) * params.V / params.w * (1 - _miss_probability(p, params.M * params.w)))


# -- tail of U-arrivals in a burst cycle ------------------------------------

def _poisson_logpmf(lam: float, n_max: int) -> List[float]:
    """log Pr(X = n) for n = 0..n_max by the ratio recurrence."""
    if lam == 0:
        return [0.0] + [-math.inf] * n_max
    out = [-lam]
    log_lam = math.log(lam)
    for n in range(1, n_max + 1):
        out.append(out[-1] + log_lam - math.log(n))
    return out


def poisson_sf(lam: float, N: int) -> float:
    """Pr(X > N), summed upward from N+1 so small tails keep full precision."""
    if lam == 0:
        return 0.0
    log_lam = math.log(lam)
    logp = _poisson_logpmf(lam, N)[-1]
    n = N
    terms = []
    while True:
        n += 1
        logp += log_lam - math.log(n)
        term = math.exp(logp)
        terms.append(term)
        if n > lam and (term == 0.0 or term < 1e-18 * math.fsum(terms)):
            break
    return math.fsum(terms)


def binomial_sf(n: int, p: float, k: int) -> float:
    """Pr(Y > k) for Y ~ Binomial(n, p), summing the pmf upward from k+1."""
    if k >= n:
        return 0.0
    if k < 0:
        return 1.0
    if p <= 0.0:
        return 0.0
    if p >= 1.0:
        return 1.0
    log_ratio = math.log(p) - math.log1p(-p)
    logp = n * math.log1p(-p)  # log Pr(Y = 0)
    terms = []
    for y in range(1, n + 1):
        logp += math.log(n - y + 1) - math.log(y) + log_ratio
        if y > k:
            terms.append(math.exp(logp))
    return math.fsum(terms)


def tail_bound(lam: float, p_unknown: float, k: int, N: int) -> float:
    """Upper estimate of Pr(more than k U-packets in a burst cycle).

    Arrivals X ~ Poisson(lam); given X = n the U-count is Binomial(n,
    p_unknown).  Sums n = k..N exactly and charges the whole Poisson mass
    above N.
    """
    if lam < 0 or not 0.0 <= p_unknown <= 1.0 or k < 0 or N < k:
        raise ValueError("need lam >= 0, p in [0, 1], 0 <= k <= N")
    logpmf = _poisson_logpmf(lam, N)
    body = math.fsum(binomial_sf(n, p_unknown, k) * math.exp(logpmf[n]) for n in range(k, N + 1))
    return body + poisson_sf(lam, N)
