#!/usr/bin/env python3
"""Fit Pareto (shape, scale) for the work and profit generators.

The sampler draws 1 + scale * Lomax(shape), a Pareto distribution of the
second kind with its support starting at 1, so that every work and
profit class receives packets.

The target is the mean/std of the *rounded and clamped* draws.  The fit
minimises the error of the exact moments of that discrete distribution,
then a 10^6-draw Monte Carlo of the real sampler confirms the result.

    python scripts/calibrate_pareto.py
"""

import argparse

import numpy as np
from scipy.optimize import minimize

from mistqueue.traffic import truncated_pareto

TARGETS = {
    "work": (256, 17.97, 22.22),
    "profit": (16, 3.66, 3.20),
}


def discrete_moments(shape, scale, max_value):
    ks = np.arange(1, max_value + 1, dtype=float)

    def cdf(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        above = x > 1.0
        out[above] = 1.0 - (1.0 + (x[above] - 1.0) / scale) ** -shape
        return out

    lower = cdf(ks - 0.5)
    upper = cdf(ks + 0.5)
    lower[0] = 0.0
    upper[-1] = 1.0
    p = upper - lower
    mean = float((p * ks).sum())
    return mean, float(np.sqrt((p * ks * ks).sum() - mean * mean))


def fit(max_value, mean, std):
    def loss(x):
        shape, scale = x
        if shape <= 0.05 or scale < 1 or shape > 50:
            return 1e6
        m, s = discrete_moments(shape, scale, max_value)
        return (m - mean) ** 2 + (s - std) ** 2

    best = None
    for shape0 in (1.0, 2.0, 3.0, 4.0, 6.0):
        for scale0 in (1.5, 3.0, 10.0, 30.0, 60.0):
            res = minimize(loss, [shape0, scale0], method="Nelder-Mead",
                           options={"xatol": 1e-6, "fatol": 1e-12, "maxiter": 4000})
            if best is None or res.fun < best.fun:
                best = res
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--draws", type=int, default=10**6)
    parser.add_argument("--seed", type=int, default=20240601)
    args = parser.parse_args()
    rng = np.random.default_rng(args.seed)
    for name, (max_value, mean, std) in TARGETS.items():
        res = fit(max_value, mean, std)
        shape, scale = (round(float(v), 4) for v in res.x)
        m, s = discrete_moments(shape, scale, max_value)
        x = truncated_pareto(rng, shape, scale, max_value, size=args.draws)
        print(f"{name:6s} shape={shape:.4f} scale={scale:.4f}  "
              f"exact mean/std={m:.3f}/{s:.3f}  "
              f"monte-carlo mean/std={x.mean():.3f}/{x.std():.3f}  target={mean}/{std}")


if __name__ == "__main__":
    main()
