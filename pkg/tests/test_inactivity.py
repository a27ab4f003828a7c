import math
from fractions import Fraction
from itertools import combinations, product

import mpmath
import pytest
from hypothesis import given, strategies as st

from cachesim.inactivity import (
    RobustConfig,
    monte_carlo_outage,
    outage_probability,
    robust_place_and_deliver,
    tradeoff_curve_inactivity,
)
from cachesim.placement import ScenarioError


def test_counts_and_factor():
    cfg = RobustConfig(2, 4, 2, 1)
    assert (cfg.m, cfg.n) == (2 * 3 + 2 * 2, 12)
    assert cfg.factor == Fraction(6, 5) == cfg.factor_closed_form()


@given(st.integers(2, 30), st.data())
def test_factor_identity(K, data):
    t = data.draw(st.integers(1, K))
    a = data.draw(st.integers(0, K - 1))
    cfg = RobustConfig(3, K, t, a)
    assert cfg.factor == cfg.factor_closed_form() >= 1
    assert cfg.m <= cfg.n
    if a == 0:
        assert cfg.factor == 1


@pytest.mark.parametrize("K,t,a", [(1, 1, 0), (4, 0, 0), (4, 5, 0), (4, 2, 4), (4, 2, -1)])
def test_invalid_config(K, t, a):
    with pytest.raises(ScenarioError):
        RobustConfig(2, K, t, a)


def test_invalid_probability():
    with pytest.raises(ScenarioError):
        RobustConfig(2, 4, 2, 1, Fraction(3, 2))


def test_example_user_3_inactive():
    res = robust_place_and_deliver(RobustConfig(2, 4, 2, 1), (1, 2, 1, 1), [3])
    assert {k: o.status for k, o in res.outcomes.items()} == {1: "ok", 2: "ok", 3: "inactive", 4: "ok"}
    cfg = res.config
    for k in (1, 2, 4):
        # t C(K-1,t-1) cached + (K-1-|I|) C(K-2,t-1) received
        assert res.outcomes[k].pieces_collected == 2 * 3 + 2 * 2 == cfg.m


def test_memory_scales_by_factor():
    cfg = RobustConfig(2, 4, 2, 1)
    res = robust_place_and_deliver(cfg, (1, 2, 1, 1), [])
    assert Fraction(res.cached_bits, res.F) == cfg.base_M * cfg.factor


def test_a0_matches_baseline_load():
    from cachesim.bounds import d2d_per_demand

    for d in [(1, 2, 1, 1), (1, 2, 2, 1)]:
        res = robust_place_and_deliver(RobustConfig(2, 4, 2, 0), d, [])
        assert res.load == d2d_per_demand(4, 2, d)
        assert res.all_active_decoded()


def test_too_many_inactive_is_reported():
    res = robust_place_and_deliver(RobustConfig(2, 4, 2, 1), (1, 2, 1, 1), [2, 3])
    assert {res.outcomes[k].status for k in (1, 4)} == {"decode-infeasible"}


def test_bad_F():
    with pytest.raises(ScenarioError):
        robust_place_and_deliver(RobustConfig(2, 4, 2, 1), (1, 2, 1, 1), [], F=12)


@pytest.mark.parametrize("K,t", [(3, 1), (3, 2), (4, 1), (4, 2), (4, 3)])
def test_decode_iff_within_tolerance(K, t):
    d = tuple((k % 2) + 1 for k in range(K))
    for a in range(K):
        cfg = RobustConfig(2, K, t, a)
        for r in range(K):
            for inactive in combinations(range(1, K + 1), r):
                res = robust_place_and_deliver(cfg, d, inactive, seed=a)
                assert res.all_active_decoded() == (r <= a)


def test_outage_exhaustive_oracle():
    # K=4, p=1/2, a=1: count the 16 activity patterns directly
    hits = sum(1 for pattern in product((0, 1), repeat=4) if sum(pattern) > 1)
    assert outage_probability(4, Fraction(1, 2), 1) == Fraction(hits, 16) == Fraction(11, 16)


@pytest.mark.parametrize("a,legend", [(32, 3.2e-10), (24, 1.3e-5)])
def test_outage_legend_values(a, legend):
    exact = outage_probability(100, "0.1", a)
    assert float(format(float(exact), ".1e")) == legend
    mpmath.mp.dps = 60
    tail = mpmath.fsum(mpmath.binomial(100, i) * mpmath.mpf("0.1") ** i * mpmath.mpf("0.9") ** (100 - i) for i in range(a + 1, 101))
    assert abs(mpmath.mpf(exact.numerator) / exact.denominator - tail) < mpmath.mpf(10) ** -50


def test_outage_edges():
    assert outage_probability(10, 0, 3) == 0
    assert outage_probability(7, Fraction(1, 3), 6) == Fraction(1, 3) ** 7


@given(st.integers(2, 15), st.fractions(0, 1), st.fractions(0, 1))
def test_outage_monotone(K, p, q):
    lo, hi = sorted((p, q))
    vals = [outage_probability(K, p, a) for a in range(K)]
    assert all(x >= y for x, y in zip(vals, vals[1:]))
    a = K // 2
    assert outage_probability(K, lo, a) <= outage_probability(K, hi, a)


def test_monte_carlo_deterministic_and_close():
    est, half = monte_carlo_outage(20, "0.3", 9, 100_000, seed=5)
    again = monte_carlo_outage(20, "0.3", 9, 100_000, seed=5)
    assert (est, half) == again
    exact = float(outage_probability(20, Fraction(3, 10), 9))
    sigma = math.sqrt(exact * (1 - exact) / 100_000)
    assert abs(est - exact) <= 3 * sigma
    assert monte_carlo_outage(20, 0, 3, 1000)[0] == 0


def test_monte_carlo_thread_independent(monkeypatch):
    base = monte_carlo_outage(10, "0.4", 4, 50_000, seed=2)
    monkeypatch.setenv("CACHESIM_THREADS", "4")
    assert monte_carlo_outage(10, "0.4", 4, 50_000, seed=2) == base


def test_monte_carlo_needs_trials():
    with pytest.raises(ValueError):
        monte_carlo_outage(5, "0.1", 1, 0)


def test_fig3_points():
    (a24,) = tradeoff_curve_inactivity(50, 100, "0.1", [24], "proposed_worst", [5])
    pt = a24.points[0]
    assert float(pt.M) == pytest.approx(3.24803149606295, rel=1e-12)
    (ji,) = tradeoff_curve_inactivity(50, 100, "0.1", [24], "ji_worst", [5])
    assert float(ji.points[0].R) == pytest.approx(24.6850393700784, rel=1e-12)
    (ji32,) = tradeoff_curve_inactivity(50, 100, "0.1", [32], "ji_worst", [4])
    assert float(ji32.points[0].M) == pytest.approx(2.89982425307554, rel=1e-12)
    assert float(ji32.points[0].R) == pytest.approx(34.7978910369064, rel=1e-12)


def test_a0_curve_is_baseline():
    from cachesim.bounds import d2d_worst_optimal

    (c,) = tradeoff_curve_inactivity(2, 6, "0.2", [0], "proposed_worst")
    for pt in c.points:
        assert pt.M == Fraction(2 * pt.t, 6)
        assert pt.R == d2d_worst_optimal(2, 6, pt.t)
    assert c.envelope.m_min == Fraction(1, 3)
