"""Batch experiments: paired traces, per-run result rows and parameter sweeps.

Both the command line and the acceptance suite go through this module, so
a sweep run from either place produces the same numbers.
"""

from __future__ import annotations

import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .classes import Regime
from .engine import run, traffic_rng
from .knapsack import Benchmark, benchmark
from .model import Trace
from .policies import Kind, PolicyConfig
from .traffic import TrafficConfig, generate_trace

ROW_FIELDS = ("trace", "algorithm", "i_star", "j_star", "regime", "order", "alpha", "r", "B", "seed",
              "throughput", "ub_greedy", "ub_certified", "ratio")
SWEEP_PARAMS = ("i_star", "j_star", "alpha", "r")
REGIME_CHOICES = ("exact", "closure", "small-sets", "oblivious")

DEFAULT_GRIDS = {
    "i_star": [1, 2, 3, 4, 5, 6, 7, 8],
    "j_star": [1, 2, 3, 4],
    "alpha": [round(0.1 * k, 1) for k in range(11)],
    "r": [0.0, 0.25, 0.5, 0.75, 1.0],
}


def trace_seed(master: int, k: int) -> int:
    """Seed of the k-th trace of a batch drawn from ``master``."""
    return int(np.random.SeedSequence([int(master), int(k)]).generate_state(1)[0])


def make_traces(traffic: TrafficConfig, n: int, master_seed: int) -> List[Trace]:
    """``n`` independent traces.

    Trace k depends only on (master_seed, k) and the traffic settings, so
    two batches that differ only in ``alpha`` share arrivals and
    characteristics trace by trace.
    """
    out = []
    for k in range(n):
        s = trace_seed(master_seed, k)
        cfg = replace(traffic, seed=s)
        out.append(generate_trace(cfg, traffic_rng(s)))
    return out


def default_values(limit: int) -> Tuple[int, ...]:
    """Powers of two in [1, limit]: the value sets used by small-sets
    selection when none are given."""
    return tuple(1 << k for k in range(limit.bit_length()) if 1 << k <= limit)


@dataclass
class Setup:
    """Everything besides the traces that determines a batch of runs."""

    policies: Sequence[str] = ("fifo", "sam", "sao-fifo", "sao-wtv", "sao-effect")
    B: int = 10
    r: float = 1.0
    i_star: Optional[int] = 3  # None draws the class at random per run
    j_star: Optional[int] = 3
    regime: Optional[str] = None  # None uses each policy's own regime
    work_values: Sequence[int] = ()
    profit_values: Sequence[int] = ()
    batch_sort: bool = False

    def validate(self) -> None:
        if self.regime is not None and self.regime not in REGIME_CHOICES:
            raise ValueError(f"unknown regime {self.regime!r}")
        if (self.i_star is None) != (self.j_star is None):
            raise ValueError("give both i* and j* or neither")
        for name in self.policies:
            PolicyConfig.from_name(name)

    def policy_config(self, name: str, W: int, V: int) -> PolicyConfig:
        kw = dict(B=self.B, r=self.r, batch_sort=self.batch_sort)
        if self.regime == "oblivious":
            kw["oblivious"] = True
        elif self.regime is not None:
            kw["regime"] = Regime(self.regime)
        cfg = PolicyConfig.from_name(name, **kw)
        if cfg.kind is Kind.PLAIN_FIFO:
            return cfg
        if cfg.effective_regime is Regime.SMALL_SETS:
            cfg.work_values = tuple(self.work_values) or default_values(W)
            cfg.profit_values = tuple(self.profit_values) or default_values(V)
        if self.i_star is not None and not cfg.oblivious:
            cfg.selection = (self.i_star, self.j_star)
        return cfg


@dataclass
class Row:
    trace: int
    algorithm: str
    i_star: Optional[int]
    j_star: Optional[int]
    regime: str
    order: str
    alpha: float
    r: float
    B: int
    seed: int
    throughput: int
    ub_greedy: float
    ub_certified: float
    ratio: float
    extra: Dict[str, object] = field(default_factory=dict)

    def values(self) -> Tuple:
        return tuple(getattr(self, f) for f in ROW_FIELDS)


def _regime_label(cfg: PolicyConfig) -> str:
    if cfg.kind is Kind.PLAIN_FIFO:
        return "none"
    return "oblivious" if cfg.oblivious else cfg.effective_regime.value


def _order_label(cfg: PolicyConfig) -> str:
    if cfg.kind is Kind.SAO:
        return cfg.order.value
    return "fifo"


def evaluate_one(k: int, trace: Trace, cfg: PolicyConfig, bench: Benchmark) -> Row:
    """Run one policy on one trace (seeded by the trace's own seed)."""
    seed = trace.seed
    stats = run(trace, cfg, seed)
    sel = stats.selected if cfg.kind is not Kind.PLAIN_FIFO else None
    return Row(trace=k, algorithm=cfg.name,
               i_star=sel[0] if sel else None, j_star=sel[1] if sel else None,
               regime=_regime_label(cfg), order=_order_label(cfg),
               alpha=float(trace.meta.get("alpha", math.nan)), r=cfg.r, B=cfg.B, seed=seed,
               throughput=stats.throughput, ub_greedy=bench.ub_greedy, ub_certified=bench.ub_certified,
               ratio=bench.ratio(stats.throughput))


def _job(args):
    return evaluate_one(*args)


def evaluate(traces: Sequence[Trace], setup: Setup, workers: int = 1,
             reuse: Optional[Dict[Tuple[int, str], Row]] = None) -> List[Row]:
    """One row per (trace, policy), ordered by trace then policy.

    ``reuse`` maps (trace index, policy name) to a row computed earlier
    for the same trace; matching jobs are taken from it instead of rerun.
    """
    setup.validate()
    jobs, slots = [], []
    rows: List[Optional[Row]] = []
    for k, trace in enumerate(traces):
        bench = benchmark(trace, setup.B, trace.V)
        for name in setup.policies:
            if reuse is not None and (k, name) in reuse:
                old = reuse[(k, name)]
                rows.append(replace(old, r=setup.r, extra=dict(old.extra)))
                continue
            cfg = setup.policy_config(name, trace.W, trace.V)
            slots.append(len(rows))
            rows.append(None)
            jobs.append((k, trace, cfg, bench))
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            done = list(pool.map(_job, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        done = [_job(j) for j in jobs]
    for slot, row in zip(slots, done):
        rows[slot] = row
    return rows


@dataclass(frozen=True)
class Summary:
    algorithm: str
    mean_ratio: float
    std_ratio: float
    mean_throughput: float
    n: int


def summarize(rows: Iterable[Row]) -> List[Summary]:
    """Mean and sample standard deviation per algorithm, in first-seen order."""
    groups: Dict[str, List[Row]] = {}
    for row in rows:
        groups.setdefault(row.algorithm, []).append(row)
    out = []
    for name, rs in groups.items():
        ratios = [r.ratio for r in rs]
        std = statistics.stdev(ratios) if len(ratios) > 1 else 0.0
        out.append(Summary(name, statistics.fmean(ratios), std,
                           statistics.fmean(r.throughput for r in rs), len(rs)))
    return out


# policies whose runs ignore a given sweep parameter
_INDEPENDENT = {"i_star": ("fifo",), "j_star": ("fifo",), "r": ("fifo",), "alpha": ()}


def sweep(param: str, grid: Sequence, traffic: TrafficConfig, setup: Setup, n_traces: int,
          master_seed: int, workers: int = 1, companion: Optional[int] = None) -> List[Row]:
    """Vary one of i*, j*, alpha or r over ``grid`` with everything else fixed.

    The i* sweep holds j* at ``companion`` (default 1, every profit
    allowed) and the j* sweep holds i* at ``companion`` (default log2 W,
    every work allowed).  Each row carries ``extra["value"]``.
    """
    if param not in SWEEP_PARAMS:
        raise ValueError(f"cannot sweep {param!r}; choose one of {', '.join(SWEEP_PARAMS)}")
    if not grid:
        raise ValueError("empty sweep grid")
    traffic.validate()
    setup.validate()
    cache: Dict[Tuple[int, str], Row] = {}
    traces = None if param == "alpha" else make_traces(traffic, n_traces, master_seed)
    out = []
    for value in grid:
        s = replace(setup)
        if param == "i_star":
            s.i_star = int(value)
            s.j_star = 1 if companion is None else companion
        elif param == "j_star":
            s.j_star = int(value)
            s.i_star = (traffic.W.bit_length() - 1) if companion is None else companion
        elif param == "r":
            s.r = float(value)
        if param == "alpha":
            batch = make_traces(replace(traffic, alpha=float(value)), n_traces, master_seed)
        else:
            batch = traces
        rows = evaluate(batch, s, workers, reuse=cache)
        for row in rows:
            if row.algorithm in _INDEPENDENT[param]:
                cache[(row.trace, row.algorithm)] = row
            row.extra["value"] = value
        out.extend(rows)
    return out


def sweep_means(rows: Iterable[Row]) -> Dict[str, List[Tuple[float, float, float]]]:
    """Per algorithm, (value, mean ratio, std ratio) in grid order."""
    groups: Dict[str, Dict[object, List[float]]] = {}
    for row in rows:
        groups.setdefault(row.algorithm, {}).setdefault(row.extra["value"], []).append(row.ratio)
    out = {}
    for name, by_value in groups.items():
        out[name] = [(float(v), statistics.fmean(rs), statistics.stdev(rs) if len(rs) > 1 else 0.0)
                     for v, rs in by_value.items()]
    return out


def row_dict(row: Row) -> Dict[str, object]:
    d = asdict(row)
    d.update(d.pop("extra"))
    return d


@dataclass
class Study:
    """Rows of the default-settings comparison and of the alpha and r sweeps."""

    base: List[Row]
    alpha: List[Row]
    r: List[Row]


SAO_FLAVORS = ("sao-fifo", "sao-wtv", "sao-effect")


def figure_study(n_traces: int, master_seed: int, alpha_grid: Sequence[float] = (0.0, 0.3, 0.6, 1.0),
                 r_grid: Sequence[float] = (0.0, 0.25, 0.5, 0.75, 1.0), traffic: Optional[TrafficConfig] = None,
                 workers: int = 1) -> Study:
    """Default comparison plus the alpha sweep (SAO flavors) and the r sweep
    at alpha=1 (all policies), sharing runs wherever settings coincide."""
    traffic = traffic or TrafficConfig()
    setup = Setup()
    base_traces = make_traces(traffic, n_traces, master_seed)
    base = evaluate(base_traces, setup, workers)

    def tag(rows, value):
        for row in rows:
            row.extra["value"] = value
        return rows

    alpha_rows: List[Row] = []
    at_one: Dict[Tuple[int, str], Row] = {}
    traces_at_one = None
    for a in alpha_grid:
        if a == traffic.alpha:
            rows = [replace(row, extra={}) for row in base if row.algorithm in SAO_FLAVORS]
        else:
            traces = make_traces(replace(traffic, alpha=float(a)), n_traces, master_seed)
            rows = evaluate(traces, replace(setup, policies=SAO_FLAVORS), workers)
            if a == 1.0:
                traces_at_one = traces
                at_one = {(row.trace, row.algorithm): row for row in rows}
        alpha_rows.extend(tag(rows, a))

    if traces_at_one is None:
        traces_at_one = make_traces(replace(traffic, alpha=1.0), n_traces, master_seed)
    r_rows: List[Row] = []
    fifo_cache: Dict[Tuple[int, str], Row] = {}
    for r in r_grid:
        reuse = dict(fifo_cache)
        if r == setup.r:
            reuse.update(at_one)
        rows = evaluate(traces_at_one, replace(setup, r=float(r)), workers, reuse=reuse)
        for row in rows:
            if row.algorithm == "fifo":
                fifo_cache[(row.trace, "fifo")] = row
        r_rows.extend(tag([replace(row, extra={}) for row in rows], r))
    return Study(base, alpha_rows, r_rows)
