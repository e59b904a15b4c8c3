"""Bursty synthetic workload: two-state MMPP arrivals with heavy-tailed packet characteristics."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional, Tuple

import numpy as np

from .model import Arrival, ArrivalBatch, Trace

# Pareto (shape, scale) per characteristic, fitted by
# scripts/calibrate_pareto.py so that the rounded, clamped draws have
# mean/std 17.97/22.22 (work, max 256) and 3.66/3.20 (profit, max 16).
WORK_PARETO = (4.3619, 57.2527)
PROFIT_PARETO = (3.3204, 6.6493)


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


@dataclass
class TrafficConfig:
    lambda_high: float = 10.0
    lambda_low: float = 0.5
    mean_high_duration: float = 10.0
    duration_ratio: Optional[float] = None  # LOW/HIGH mean duration; None means W
    alpha: float = 0.3
    W: int = 256
    V: int = 16
    pareto_work: Tuple[float, float] = WORK_PARETO
    pareto_profit: Tuple[float, float] = PROFIT_PARETO
    total_packets: int = 10_000
    seed: int = 0

    @property
    def mean_low_duration(self) -> float:
        ratio = self.W if self.duration_ratio is None else self.duration_ratio
        return ratio * self.mean_high_duration

    def validate(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha={self.alpha} outside [0, 1]")
        if not (_is_power_of_two(self.W) and _is_power_of_two(self.V)):
            raise ValueError("W and V must be powers of two")
        for name, (shape, scale) in (("work", self.pareto_work), ("profit", self.pareto_profit)):
            if shape <= 0 or scale < 1:
                raise ValueError(f"{name} Pareto needs shape > 0 and scale >= 1")
        if self.lambda_high < 0 or self.lambda_low < 0:
            raise ValueError("arrival rates must be nonnegative")
        if self.mean_high_duration < 1 or self.mean_low_duration < 1:
            raise ValueError("mean state durations must be at least one cycle")
        if self.total_packets < 0:
            raise ValueError("total_packets must be nonnegative")
        if self.lambda_high == 0 and self.lambda_low == 0 and self.total_packets > 0:
            raise ValueError("both arrival rates are zero")

    def meta(self) -> dict:
        d = asdict(self)
        d["pareto_work_shape"], d["pareto_work_scale"] = d.pop("pareto_work")
        d["pareto_profit_shape"], d["pareto_profit_scale"] = d.pop("pareto_profit")
        if d["duration_ratio"] is None:
            d["duration_ratio"] = float(self.W)
        return d


def truncated_pareto(rng: np.random.Generator, shape: float, scale: float, max_value: int,
                     size=None) -> np.ndarray:
    """Vectorised form of :func:`sample_truncated_pareto`."""
    if shape <= 0 or scale < 1 or max_value < 1:
        raise ValueError("need shape > 0, scale >= 1, max >= 1")
    # numpy's pareto() is Lomax; shifting by one puts the support at [1, inf)
    draws = 1.0 + scale * rng.pareto(shape, size=size)
    return np.clip(np.rint(draws), 1, max_value).astype(np.int64)


def sample_truncated_pareto(rng: np.random.Generator, shape: float, scale: float, max_value: int) -> int:
    """One draw of 1 + scale * Lomax(shape), rounded to the nearest
    integer; anything above ``max_value`` becomes exactly ``max_value``."""
    return int(truncated_pareto(rng, shape, scale, max_value))


def _mmpp_counts(rng: np.random.Generator, config: TrafficConfig) -> Tuple[np.ndarray, np.ndarray]:
    """Per-cycle arrival counts and HIGH-state flags, starting in HIGH,
    until ``total_packets`` packets have been produced."""
    means = (config.mean_high_duration, config.mean_low_duration)
    rates = (config.lambda_high, config.lambda_low)
    counts, states = [], []
    produced = 0
    state = 0
    while produced < config.total_packets:
        length = int(rng.geometric(1.0 / means[state]))
        chunk = rng.poisson(rates[state], size=length)
        counts.append(chunk)
        states.append(np.full(length, state == 0))
        produced += int(chunk.sum())
        state = 1 - state
    if not counts:
        return np.zeros(0, np.int64), np.zeros(0, bool)
    counts = np.concatenate(counts)
    high = np.concatenate(states)
    # cut the final cycle short so exactly total_packets are emitted
    cum = np.cumsum(counts)
    last = int(np.searchsorted(cum, config.total_packets))
    counts = counts[: last + 1].copy()
    high = high[: last + 1]
    counts[last] -= int(cum[last]) - config.total_packets
    return counts, high


def generate_trace(config: TrafficConfig, rng: np.random.Generator | int | None = None) -> Trace:
    """Generate one trace.

    Arrival counts, packet characteristics and the unknown-marking draws
    come from three independent child streams, so traces generated from
    the same seed with different ``alpha`` share arrivals and
    characteristics and the set of U-packets only grows with ``alpha``.
    """
    config.validate()
    if rng is None or isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(config.seed if rng is None else int(rng))
    arrivals_rng, chars_rng, marks_rng = rng.spawn(3)

    counts, _ = _mmpp_counts(arrivals_rng, config)
    n = int(counts.sum())
    work = truncated_pareto(chars_rng, *config.pareto_work, config.W, size=n)
    profit = truncated_pareto(chars_rng, *config.pareto_profit, config.V, size=n)
    known = marks_rng.random(n) >= config.alpha

    batches = []
    pos = 0
    for cycle in np.flatnonzero(counts):
        k = int(counts[cycle])
        batches.append(ArrivalBatch(int(cycle), tuple(
            Arrival(int(w), int(v), bool(kn))
            for w, v, kn in zip(work[pos:pos + k], profit[pos:pos + k], known[pos:pos + k]))))
        pos += k
    return Trace(batches, config.meta())


def high_state_counts(config: TrafficConfig, rng: np.random.Generator) -> np.ndarray:
    """Arrival counts of the HIGH-state cycles of one generated trace,
    with the same stream layout as :func:`generate_trace`."""
    arrivals_rng, _, _ = rng.spawn(3)
    counts, high = _mmpp_counts(arrivals_rng, config)
    return counts[high]
