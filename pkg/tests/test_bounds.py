import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats as sps

from mistqueue import bounds
from mistqueue.bounds import BoundParams, Variant

POW2_W = [2 ** k for k in range(1, 9)]
VS = [1, 2, 4, 8, 16]


def test_p_star_examples():
    assert bounds.p_star(1, 2, 1) == 1.0
    assert bounds.p_star(2, 2, 1) == 0.5
    assert bounds.p_star(1, 3, 1) == 0.5
    assert bounds.p_star_exact(16, 256, 1) == Fraction(1, 16 * 255)


def test_bound_examples():
    assert bounds.lower_bound_general(BoundParams(1, 2, 1, 1)) == 1.0
    assert bounds.lower_bound_general(BoundParams(2, 2, 1, 1)) == 1.0
    assert bounds.lower_bound_general(BoundParams(1, 3, 1, 2)) == pytest.approx(1.5, abs=1e-15)


def test_bound_matches_plain_float_formula():
    for V, W, w, M in [(16, 256, 1, 64), (4, 32, 16, 7), (2, 8, 8, 1)]:
        p = 1 / (V * (W - 1) + 1 - w)
        direct = V * (W - 1) / w * (1 - (1 - p) ** (M * w))
        assert bounds.lower_bound_general(BoundParams(V, W, w, M)) == pytest.approx(direct, rel=1e-12)


def test_degenerate_parameters():
    params = BoundParams(1, 2, 2, 5)
    assert params.degenerate and bounds.region(params) == bounds.DEGENERATE
    assert bounds.check(params) is None
    with pytest.raises(ValueError):
        bounds.lower_bound_general(params)
    with pytest.raises(ValueError):
        bounds.p_star(1, 4, 4)


def test_invalid_parameters():
    for args in [(0, 2), (1, 1), (1, 4, 5), (1, 4, 0), (1, 4, 1, 0)]:
        with pytest.raises(ValueError):
            BoundParams(*args)


def test_extreme_exponent_does_not_underflow():
    # (1 - p)^(Mw) with a huge exponent: the bracket saturates at 1 without NaN
    value = bounds.lower_bound_general(BoundParams(1, 2, 1, 10 ** 9))
    assert value == 1.0


def test_region_checks_on_full_grid():
    failures = [row for row in bounds.bound_grid(VS, POW2_W, w_mode="all") if row.check is False]
    assert failures == []


def test_threshold_boundary_is_small_m():
    for V, W, w in [(1, 3, 1), (2, 4, 2), (4, 8, 7), (16, 256, 255)]:
        t = bounds.small_m_threshold(BoundParams(V, W, w, 1))
        p = bounds.p_star_exact(V, W, w)
        assert t == 1 / (p * w) + 1 - Fraction(1, w)
        if t.denominator == 1:
            params = BoundParams(V, W, w, int(t))
            assert bounds.region(params) == bounds.SMALL_M and bounds.check_small_M(params)
        params = BoundParams(V, W, w, math.floor(t) + 1)
        assert bounds.region(params) == bounds.LARGE_M and bounds.check_large_M(params)


@given(st.sampled_from(VS), st.sampled_from(POW2_W), st.data())
def test_bound_monotone_in_m(V, W, data):
    w = data.draw(st.integers(1, W))
    params = BoundParams(V, W, w, 1)
    if params.degenerate:
        return
    values = [bounds.lower_bound_general(BoundParams(V, W, w, M)) for M in range(1, 65)]
    assert all(b >= a for a, b in zip(values, values[1:]))


def test_corollary_examples():
    assert bounds.corollary_floor(1, 2, 100, Variant.UNIFORM_PROFIT) == pytest.approx(
        float((mpmath.e - 1) / (2 * mpmath.e) * 2))
    assert bounds.corollary_floor(16, 256, 1, Variant.GENERAL) == 0.5
    assert bounds.corollary_floor(1, 2, 1) == 0.5
    with pytest.raises(ValueError):
        bounds.corollary_floor(2, 4, 3, Variant.UNIFORM_PROFIT)


def test_corollary_uniform_work():
    for V in (2, 4, 16):
        for W in (4, 64):
            for M in (1, 8, 64):
                floor = bounds.corollary_floor(V, W, M, Variant.UNIFORM_WORK)
                assert floor <= bounds.lower_bound_general(BoundParams(V, W, W, M))


def test_adversarial_trace_extremes():
    params = BoundParams(2, 4, 1, 3)
    rng = np.random.default_rng(0)
    all_best = bounds.adversarial_trace(params, 20, 2, rng, p=1.0)
    assert {(a.work, a.profit) for a in all_best.arrivals()} == {(1, 2)}
    all_worst = bounds.adversarial_trace(params, 20, 2, rng, p=0.0)
    assert {(a.work, a.profit) for a in all_worst.arrivals()} == {(4, 1)}
    assert all_worst.num_packets == 60 and not any(a.known for a in all_worst.arrivals())
    assert all_worst.meta["flush_cycles"] == 8


def test_adversarial_best_fraction():
    params = BoundParams(2, 4, 1, 3)
    N = 10 ** 4
    trace = bounds.adversarial_trace(params, N, 2, np.random.default_rng(5))
    p = bounds.p_star(2, 4, 1)
    n = N * params.M
    frac = sum(a.work == 1 for a in trace.arrivals()) / n
    assert abs(frac - p) <= 3 * math.sqrt(p * (1 - p) / n)


def test_subopt_hand_cases():
    params = BoundParams(2, 4, 1, 1)
    rng = np.random.default_rng(0)
    assert bounds.subopt_run(bounds.adversarial_trace(params, 50, 2, rng, p=0.0), params) == 0
    N = 37
    assert bounds.subopt_run(bounds.adversarial_trace(params, N, 2, rng, p=1.0), params) == N * 2
    # w=2: one pick per two-cycle period
    params2 = BoundParams(4, 8, 2, 2)
    assert bounds.subopt_run(bounds.adversarial_trace(params2, 10, 2, rng, p=1.0), params2) == 5 * 4
    with pytest.raises(ValueError):
        bounds.subopt_run(bounds.adversarial_trace(params2, 10, 2, rng), params2, B=1)


def test_subopt_expectation_formula():
    params = BoundParams(2, 4, 2, 2)
    p = 1 / (2 * 3 + 1 - 2)
    assert bounds.subopt_expectation(params, 100) == pytest.approx(100 * 2 / 2 * (1 - (1 - p) ** 4))


def test_tail_bound_example():
    assert bounds.tail_bound(10, 0.3, 10, 100) < 0.0003


@pytest.mark.parametrize("k", [0, 3, 10, 25])
def test_tail_bound_without_unknowns_is_poisson_tail(k):
    assert bounds.tail_bound(10, 0.0, k, 100) == pytest.approx(sps.poisson.sf(100, 10), rel=1e-9, abs=1e-300)


def test_tail_bound_truncation_is_negligible():
    assert abs(bounds.tail_bound(10, 0.3, 10, 100) - bounds.tail_bound(10, 0.3, 10, 200)) < 1e-9


def test_tail_bound_against_scipy_mixture():
    lam, p, k, N = 10.0, 0.3, 10, 100
    n = np.arange(k, N + 1)
    ref = float(np.sum(sps.binom.sf(k, n, p) * sps.poisson.pmf(n, lam)) + sps.poisson.sf(N, lam))
    assert bounds.tail_bound(lam, p, k, N) == pytest.approx(ref, rel=1e-9)
    # the U-count of a burst cycle is Poisson(lam * p) by thinning
    assert ref == pytest.approx(sps.poisson.sf(k, lam * p), rel=1e-6)


def test_tail_bound_monotonicity():
    ks = [bounds.tail_bound(10, 0.3, k, 100) for k in range(0, 30)]
    assert all(b <= a for a, b in zip(ks, ks[1:]))
    ps = [bounds.tail_bound(10, p, 10, 100) for p in np.linspace(0, 1, 21)]
    assert all(b >= a for a, b in zip(ps, ps[1:]))


def test_poisson_and_binomial_helpers_match_scipy():
    for lam, N in [(0.5, 3), (10, 10), (10, 40), (100, 130)]:
        assert bounds.poisson_sf(lam, N) == pytest.approx(sps.poisson.sf(N, lam), rel=1e-9)
    for n, p, k in [(10, 0.3, 3), (50, 0.01, 0), (100, 0.5, 70)]:
        assert bounds.binomial_sf(n, p, k) == pytest.approx(sps.binom.sf(k, n, p), rel=1e-9)


def test_tail_bound_rejects_bad_arguments():
    with pytest.raises(ValueError):
        bounds.tail_bound(-1, 0.3, 1, 10)
    with pytest.raises(ValueError):
        bounds.tail_bound(1, 0.3, 11, 10)
