"""Closed-form load expressions, converse bounds and trade-off curves.

Evaluators take the system size (N, K) plus either the integer cache
parameter ``t`` or the memory ``M``; all return exact Fractions.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

from .combinatorics import (
    Envelope,
    as_fraction,
    binom,
    composition_profile,
    demand_profile_counts,
    enumerate_compositions,
    lower_convex_envelope,
    n_distinct,
    unique_demanders,
)


def _check_t(K: int, t: int) -> None:
    if not 1 <= t <= K:
        raise ValueError(f"t={t} outside [1, {K}]")


# --------------------------------------------------------------------------
# Prior D2D results


def ji_load(K: int, t: int, ne: int) -> Fraction:
    _check_t(K, t)
    return min(Fraction(K - t, t), Fraction(ne))


def cutset_bound(N: int, K: int, M) -> Fraction:
    M = as_fraction(M)
    t = Fraction(K) * M / N
    best = max(ell - ell * M / (N // ell) for ell in range(1, min(K, N) + 1))
    if K > 1 and N > 1:
        best = max(best, (K - t) / (K - 1))
    return best


def sengupta_bound(N: int, K: int, M) -> Fraction:
    M = as_fraction(M)
    best = None
    for s in range(1, K + 1):
        for ell in range(1, -(-N // s) + 1):
            den = Fraction(ell * (K - s), K)
            if den <= 0:
                continue
            mu = min(-(-N // ell), K) - s
            num = N - s * M - Fraction(mu, s + mu) * max(N - ell * s, 0)
            value = num / den
            if best is None or value > best:
                best = value
    return best if best is not None else Fraction(0)


# --------------------------------------------------------------------------
# Shared-link (server) results


def shared_link_per_demand(K: int, t: int, ne: int) -> Fraction:
    _check_t(K, t)
    return Fraction(binom(K, t + 1) - binom(K - ne, t + 1), binom(K, t))


@lru_cache(maxsize=None)
def _profile(N: int, K: int) -> tuple[tuple[int, int, int], ...]:
    return tuple((ne, u, c) for (ne, u), c in sorted(demand_profile_counts(N, K).items()))


def expectation(N: int, K: int, f: Callable[[int, int], Fraction]) -> Fraction:
    """E over uniform demands of f(N_e, unique demanders)."""
    total = Fraction(0)
    for ne, u, count in _profile(N, K):
        total += count * f(ne, u)
    return total / N**K


def shared_link_average(N: int, K: int, t: int) -> Fraction:
    return expectation(N, K, lambda ne, u: shared_link_per_demand(K, t, ne))


def shared_link_worst(N: int, K: int, t: int) -> Fraction:
    return shared_link_per_demand(K, t, min(K, N))


# --------------------------------------------------------------------------
# One-shot D2D scheme


def d2d_load_from_profile(K: int, t: int, ne: int, u: int) -> Fraction:
    """Per-demand load given N_e(d) and the number of unique demanders."""
    _check_t(K, t)
    # unique demanders see N_e - 1 other files, everyone else sees N_e
    missing = u * binom(K - ne, t) + (K - u) * binom(K - 1 - ne, t)
    return Fraction(K * binom(K - 1, t) - missing, K * binom(K - 1, t - 1))


def d2d_per_demand(K: int, t: int, d: Sequence[int]) -> Fraction:
    return d2d_load_from_profile(K, t, n_distinct(d), unique_demanders(d))


def d2d_per_demand_direct(K: int, t: int, d: Sequence[int]) -> Fraction:
    """Same load, summing over users one by one (reference form)."""
    _check_t(K, t)
    s = sum(binom(K - 1 - n_distinct(d, exclude=i), t) for i in range(1, K + 1))
    return (binom(K - 1, t) - Fraction(s, K)) / binom(K - 1, t - 1)


def d2d_average_optimal(N: int, K: int, t: int) -> Fraction:
    return expectation(N, K, lambda ne, u: d2d_load_from_profile(K, t, ne, u))


def d2d_worst_optimal(N: int, K: int, t: int) -> Fraction:
    _check_t(K, t)
    den = binom(K - 1, t - 1)
    if K <= N:
        return Fraction(binom(K - 1, t), den)
    if K >= 2 * N:
        return Fraction(binom(K - 1, t) - binom(K - 1 - N, t), den)
    # K-N files requested twice, 2N-K requested once
    num = (
        binom(K - 1, t)
        - Fraction(2 * N - K, K) * binom(K - N, t)
        - Fraction(2 * (K - N), K) * binom(K - 1 - N, t)
    )
    return num / den


def d2d_worst_exhaustive(N: int, K: int, t: int) -> Fraction:
    """Max of the per-demand load over all compositions."""
    return max(
        d2d_load_from_profile(K, t, *composition_profile(s))
        for s, _ in enumerate_compositions(N, K)
    )


def ji_average(N: int, K: int, t: int) -> Fraction:
    return expectation(N, K, lambda ne, u: ji_load(K, t, ne))


def ji_worst(N: int, K: int, t: int) -> Fraction:
    return ji_load(K, t, min(N, K))


def order_optimality_margin(N: int, K: int, t: int) -> tuple[Fraction, Fraction]:
    """(shared-link average, t/(t+1) times the D2D one-shot average)."""
    return shared_link_average(N, K, t), Fraction(t, t + 1) * d2d_average_optimal(N, K, t)


# --------------------------------------------------------------------------
# Curves


@dataclass(frozen=True)
class TradeoffCurve:
    label: str
    points: tuple[tuple[Fraction, Fraction], ...]
    # True when points are corner points to be joined by memory sharing
    shared: bool = True

    @property
    def envelope(self) -> Envelope:
        return lower_convex_envelope(self.points)

    def evaluate(self, M) -> Fraction:
        M = as_fraction(M)
        if self.shared:
            return self.envelope.evaluate(M)
        for m, r in self.points:
            if m == M:
                return r
        raise ValueError(f"{self.label} has no point at M={M}")


# load at integer t; converse bounds are functions of M instead
SCHEME_CURVES: dict[str, Callable[[int, int, int], Fraction]] = {
    "ji_worst": ji_worst,
    "proposed_worst": d2d_worst_optimal,
    "shared_link_worst": shared_link_worst,
    "ji_average": ji_average,
    "proposed_average": d2d_average_optimal,
    "shared_link_average": shared_link_average,
}

BOUND_CURVES: dict[str, Callable[[int, int, Fraction], Fraction]] = {
    "sengupta_converse": sengupta_bound,
    "cutset_converse": cutset_bound,
}


def scheme_curve(label: str, N: int, K: int, t_values=None) -> TradeoffCurve:
    f = SCHEME_CURVES[label]
    ts = range(1, K + 1) if t_values is None else t_values
    pts = tuple((Fraction(N * t, K), f(N, K, t)) for t in ts)
    return TradeoffCurve(label, pts, shared=True)


def bound_curve(label: str, N: int, K: int, M_values) -> TradeoffCurve:
    f = BOUND_CURVES[label]
    pts = tuple((as_fraction(M), f(N, K, as_fraction(M))) for M in M_values)
    return TradeoffCurve(label, pts, shared=False)


def all_curves(N: int, K: int, M_values) -> list[TradeoffCurve]:
    curves = [scheme_curve(label, N, K) for label in SCHEME_CURVES]
    curves += [bound_curve(label, N, K, M_values) for label in BOUND_CURVES]
    return curves


def parse_grid(spec: str) -> list[Fraction]:
    """``start:step:stop`` with exact rationals, inclusive of stop."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise ValueError("grid must be start:step:stop")
    start, step, stop = (as_fraction(p) for p in parts)
    if step <= 0:
        raise ValueError("grid step must be positive")
    out = []
    m = start
    while m <= stop:
        out.append(m)
        m += step
    return out


def fmt_float(x) -> str:
    return format(float(x), ".15g")


def curves_csv_rows(N: int, K: int, M_values) -> list[list[str]]:
    """Rows ``curve,M_num,M_den,R_num,R_den,R_float``.

    Scheme curves emit their corner points followed by envelope samples on
    the grid (labelled ``<curve>@grid``); bounds are emitted on the grid.
    """
    rows = []
    for curve in all_curves(N, K, M_values):
        if curve.shared:
            for m, r in curve.points:
                rows.append([curve.label, m, r])
            env = curve.envelope
            for m in M_values:
                if env.m_min <= m <= env.m_max:
                    rows.append([curve.label + "@grid", m, env.evaluate(m)])
        else:
            for m, r in curve.points:
                rows.append([curve.label, m, r])
    return [
        [label, str(m.numerator), str(m.denominator), str(r.numerator), str(r.denominator), fmt_float(r)]
        for label, m, r in rows
    ]


def worst_case_demand(N: int, K: int) -> tuple[int, ...]:
    """A demand achieving the worst-case load (files reused as evenly as possible)."""
    if K <= N:
        return tuple(range(1, K + 1))
    return tuple((k % N) + 1 for k in range(K))
