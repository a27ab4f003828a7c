"""MDS-precoded one-shot scheme robust to unannounced user inactivity."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import bounds
from .combinatorics import as_fraction, lower_convex_envelope
from .delivery import check_demand, recover_pieces, transmit_all
from .mds import ErasureCode, int_to_symbols, symbols_to_int
from .placement import (
    Scenario,
    ScenarioError,
    canonical_piece_ids,
    file_bits,
    man_placement,
    store_from_files,
)


def thread_cap() -> int:
    """Worker cap from CACHESIM_THREADS (default 1)."""
    try:
        return max(1, int(os.environ.get("CACHESIM_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class RobustConfig:
    N: int
    K: int
    t: int
    a: int
    p: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        if self.K < 2 or not 1 <= self.t <= self.K:
            raise ScenarioError(f"need K >= 2 and 1 <= t <= K (K={self.K}, t={self.t})")
        if not 0 <= self.a <= self.K - 1:
            raise ScenarioError(f"a={self.a} outside [0, K-1]")
        object.__setattr__(self, "p", as_fraction(self.p))
        if not 0 <= self.p <= 1:
            raise ScenarioError("p must lie in [0, 1]")

    # plain counts of sets here, so math.comb (comb(0, 0) == 1) is the right tool
    @property
    def m(self) -> int:
        K, t = self.K, self.t
        return t * math.comb(K - 1, t - 1) + (K - 1 - self.a) * math.comb(K - 2, t - 1)

    @property
    def n(self) -> int:
        return self.t * math.comb(self.K, self.t)

    @property
    def factor(self) -> Fraction:
        return Fraction(self.n, self.m)

    def factor_closed_form(self) -> Fraction:
        K, t, a = self.K, self.t, self.a
        return K / (t + Fraction((K - 1 - a) * (K - t), K - 1))

    @property
    def base_M(self) -> Fraction:
        return Fraction(self.N * self.t, self.K)

    def code(self, width: int | None = None) -> ErasureCode:
        return ErasureCode.create(self.m, self.n, width)

    def smallest_F(self) -> int:
        return self.m * self.code().symbol_bits

    def outage(self) -> Fraction:
        return outage_probability(self.K, self.p, self.a)


# --------------------------------------------------------------------------
# End-to-end simulation


@dataclass
class UserOutcome:
    user: int
    active: bool
    pieces_collected: int
    decoded: bool
    correct: bool

    @property
    def status(self) -> str:
        if not self.active:
            return "inactive"
        if not self.decoded:
            return "decode-infeasible"
        return "ok" if self.correct else "corrupt"


@dataclass
class RobustResult:
    config: RobustConfig
    F: int
    inactive: tuple[int, ...]
    outcomes: dict[int, UserOutcome]
    load: Fraction
    cached_bits: int

    def all_active_decoded(self) -> bool:
        return all(o.decoded and o.correct for o in self.outcomes.values() if o.active)


def robust_place_and_deliver(
    config: RobustConfig,
    d: Sequence[int],
    inactive: Iterable[int] = (),
    seed: int = 0,
    F: int | None = None,
) -> RobustResult:
    """Encode, place and deliver with the given users silent; decode at active users."""
    N, K, t = config.N, config.K, config.t
    d = check_demand(d, N, K)
    inactive = tuple(sorted(set(inactive)))
    if any(not 1 <= k <= K for k in inactive):
        raise ValueError("inactive users must lie in [1, K]")
    code = config.code()
    F = config.smallest_F() if F is None else F
    if F % config.m or (F // config.m) % code.symbol_bits:
        raise ScenarioError(
            f"F={F} must be a multiple of m * symbol width = {config.m * code.symbol_bits}"
        )
    L = F // config.m
    originals = [file_bits(seed, q, F) for q in range(1, N + 1)]
    coded_files = []
    for bits in originals:
        parts = [int_to_symbols((bits >> (j * L)) & ((1 << L) - 1), L, code.symbol_bits) for j in range(config.m)]
        blocks = code.encode(parts)
        coded = 0
        for p, block in enumerate(blocks):
            coded |= symbols_to_int(block, code.symbol_bits) << (p * L)
        coded_files.append(coded)

    # the coded file of n blocks runs through the plain one-shot pipeline
    coded_scenario = Scenario(N, K, Fraction(N * t, K), config.n * L, t)
    store = store_from_files(coded_scenario, coded_files)
    cache = man_placement(coded_scenario, store)
    active = [k for k in range(1, K + 1) if k not in inactive]
    log = transmit_all(coded_scenario, d, store, active=active)

    outcomes = {}
    for k in range(1, K + 1):
        if k in inactive:
            outcomes[k] = UserOutcome(k, False, 0, False, False)
            continue
        got, _ = recover_pieces(k, log, cache, d)
        q = d[k - 1]
        order = {key: p for p, key in enumerate(canonical_piece_ids(coded_scenario, q))}
        received = {order[key]: int_to_symbols(bits, L, code.symbol_bits) for key, bits in got.items()}
        if len(received) < config.m:
            outcomes[k] = UserOutcome(k, True, len(received), False, False)
            continue
        parts = code.decode(received)
        rebuilt = 0
        for j, block in enumerate(parts):
            rebuilt |= symbols_to_int(block, code.symbol_bits) << (j * L)
        outcomes[k] = UserOutcome(k, True, len(received), True, rebuilt == originals[q - 1])
    return RobustResult(config, F, inactive, outcomes, log.load, cache.bits_cached(1))


# --------------------------------------------------------------------------
# Outage


def outage_probability(K: int, p, a: int) -> Fraction:
    """P(more than a of K users inactive), exact for rational p."""
    p = as_fraction(p)
    q = 1 - p
    return sum(
        (math.comb(K, i) * p**i * q ** (K - i) for i in range(a + 1, K + 1)),
        Fraction(0),
    )


def _mc_chunk(seed: int, chunk: int, size: int, K: int, p: float, a: int) -> int:
    rng = np.random.Generator(np.random.Philox(key=[seed & ((1 << 64) - 1), chunk]))
    inactive = (rng.random((size, K)) < p).sum(axis=1)
    return int((inactive > a).sum())


def monte_carlo_outage(
    K: int, p, a: int, trials: int, seed: int = 0, z: float = 1.96, chunk_size: int = 20000
) -> tuple[float, float]:
    """(outage estimate, z * standard error); deterministic given seed."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    p = float(as_fraction(p))
    sizes = [min(chunk_size, trials - s) for s in range(0, trials, chunk_size)]
    with ThreadPoolExecutor(max_workers=thread_cap()) as pool:
        hits = sum(pool.map(lambda c: _mc_chunk(seed, c, sizes[c], K, p, a), range(len(sizes))))
    est = hits / trials
    return est, z * math.sqrt(est * (1 - est) / trials)


# --------------------------------------------------------------------------
# Trade-off curves


@dataclass(frozen=True)
class InactivityPoint:
    a: int
    t: int
    M: Fraction
    R: Fraction
    p_out: Fraction


@dataclass(frozen=True)
class InactivityCurve:
    label: str
    a: int
    points: tuple[InactivityPoint, ...]

    @property
    def envelope(self):
        return lower_convex_envelope((pt.M, pt.R) for pt in self.points)


def tradeoff_curve_inactivity(
    N: int,
    K: int,
    p,
    a_values: Iterable[int],
    curve: str = "proposed_worst",
    t_values: Iterable[int] | None = None,
) -> list[InactivityCurve]:
    """Corner points (M n/m, R n/m) per a, R taken from the named scheme curve."""
    f = bounds.SCHEME_CURVES[curve]
    ts = list(range(1, K + 1) if t_values is None else t_values)
    base = {t: f(N, K, t) for t in ts}
    out = []
    for a in a_values:
        p_out = outage_probability(K, p, a)
        pts = []
        for t in ts:
            cfg = RobustConfig(N, K, t, a, p)
            pts.append(InactivityPoint(a, t, cfg.base_M * cfg.factor, base[t] * cfg.factor, p_out))
        out.append(InactivityCurve(curve, a, tuple(pts)))
    return out
