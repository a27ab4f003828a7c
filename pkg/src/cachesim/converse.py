"""Brute-force verifier for the one-shot converse at small K.

Everything here enumerates permutations explicitly, so it is meant for
K <= 6. The closed forms it is checked against live in :mod:`bounds`.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from graphlib import CycleError, TopologicalSorter
from itertools import combinations, permutations
from typing import Callable, Iterable, Sequence

from .combinatorics import (
    Composition,
    as_fraction,
    binom,
    composition_profile,
    composition_size,
    demands_of_type,
    lower_convex_envelope,
    n_distinct,
)
from .placement import SubPieceId

MAX_BRUTE_K = 6

SizeMap = Callable[[int, int, tuple[int, ...]], Fraction]


class InfeasibleError(ValueError):
    pass


@dataclass(frozen=True)
class PrunedPermutation:
    source: tuple[int, ...]
    pruned: tuple[int, ...]


def prune(u: Sequence[int], d: Sequence[int]) -> PrunedPermutation:
    """Keep, for every requested file, only its leftmost requester in ``u``."""
    seen = set()
    kept = []
    for k in u:
        f = d[k - 1]
        if f not in seen:
            seen.add(f)
            kept.append(k)
    return PrunedPermutation(tuple(u), tuple(kept))


def uniform_sizes(K: int, t: int) -> SizeMap:
    """Sub-piece sizes (file units) of the one-shot scheme: 1/(t C(K,t)) when |V| = t."""
    size = Fraction(1, t * math.comb(K, t))

    def sizes(k: int, i: int, V: tuple[int, ...]) -> Fraction:
        return size if len(V) == t else Fraction(0)

    sizes.levels = (t,)  # type: ignore[attr-defined]
    return sizes


def _level_sets(K: int, i: int, excluded: Iterable[int], levels) -> list[tuple[int, ...]]:
    pool = [x for x in range(1, K + 1) if x != i and x not in set(excluded)]
    out = []
    sizes = range(1, len(pool) + 2) if levels is None else levels
    for size in sizes:
        if size < 1 or size - 1 > len(pool):
            continue
        for rest in combinations(pool, size - 1):
            out.append(tuple(sorted(rest + (i,))))
    return out


def acyclic_levels(i: int, u: Sequence[int], d: Sequence[int], K: int, levels=None):
    """(demander, holder set) pairs of the level construction for sender i."""
    f = prune(u, d).pruned
    out = []
    for j in range(len(f)):
        for V in _level_sets(K, i, f[: j + 1], levels):
            out.append((f[j], V))
    return out


def acyclic_rhs(i: int, u: Sequence[int], d: Sequence[int], sizes: SizeMap, K: int | None = None) -> Fraction:
    """Right-hand side of the acyclic bound on |X_i| for permutation ``u``."""
    K = len(d) if K is None else K
    levels = getattr(sizes, "levels", None)
    return sum(
        (sizes(k, i, V) for k, V in acyclic_levels(i, u, d, K, levels)),
        Fraction(0),
    )


def acyclicity_audit(
    i: int,
    u: Sequence[int],
    d: Sequence[int],
    K: int,
    t: int,
    extra_nodes: Iterable[tuple[int, tuple[int, ...]]] = (),
) -> bool:
    """True iff the side-information digraph over the chosen nodes has no cycle.

    A node is (demanding user, holder set V); there is an edge a -> b when
    the user demanding b caches a, i.e. demander(b) is in V(a).
    """
    nodes = [(k, SubPieceId(d[k - 1], V, i)) for k, V in acyclic_levels(i, u, d, K, (t,))]
    nodes += [(k, SubPieceId(d[k - 1], tuple(V), i)) for k, V in extra_nodes]
    graph: dict[int, set[int]] = {n: set() for n in range(len(nodes))}
    for b, (kb, _) in enumerate(nodes):
        for a, (_, pa) in enumerate(nodes):
            if kb in pa.holders:
                graph[b].add(a)
    try:
        tuple(TopologicalSorter(graph).static_order())
    except CycleError:
        return False
    return True


def cycle_inducing_node(i: int, u: Sequence[int], d: Sequence[int], K: int, t: int):
    """A node that breaks acyclicity: level-2 demand cached by the level-1 user.

    Returns None when no such node exists (t < 2 or fewer than two levels).
    """
    f = prune(u, d).pruned
    if t < 2 or len(f) < 2:
        return None
    f1, f2 = f[0], f[1]
    pool = [x for x in range(1, K + 1) if x not in (i, f1, f2)]
    for V1 in _level_sets(K, i, [f1], (t,)):
        if f2 not in V1:
            continue
        for rest in combinations(pool, t - 2):
            return (f2, tuple(sorted(rest + (i, f1))))
    return None


def acyclicity_sweep(K: int, t: int, d: Sequence[int]) -> tuple[bool, bool]:
    """(every pruned-level node set is acyclic, every negative control is cyclic).

    Runs over all senders and all permutations of the remaining users.
    """
    all_acyclic = True
    controls_caught = True
    for i in range(1, K + 1):
        others = [x for x in range(1, K + 1) if x != i]
        for u in permutations(others):
            all_acyclic &= acyclicity_audit(i, u, d, K, t)
            bad = cycle_inducing_node(i, u, d, K, t)
            if bad is not None:
                controls_caught &= not acyclicity_audit(i, u, d, K, t, [bad])
    return all_acyclic, controls_caught


# --------------------------------------------------------------------------
# Coefficient ledger


@dataclass
class CoefficientLedger:
    """Counts a^{k,i}_V over all senders and all permutations of the others."""

    K: int
    demand: tuple[int, ...]
    counts: dict[tuple[int, int, tuple[int, ...]], int] = field(default_factory=dict)

    @property
    def permutations_per_sender(self) -> int:
        return math.factorial(self.K - 1)

    def coefficient(self, k: int, i: int, V: tuple[int, ...]) -> int:
        return self.counts.get((k, i, V), 0)

    def asymmetries(self) -> list[tuple[int, tuple[int, ...]]]:
        """(k, V) pairs whose coefficient differs between owners i in V."""
        bad = []
        K = self.K
        for k in range(1, K + 1):
            others = [x for x in range(1, K + 1) if x != k]
            for size in range(1, K):
                for V in combinations(others, size):
                    vals = {self.coefficient(k, i, V) for i in V}
                    if len(vals) > 1:
                        bad.append((k, V))
        return bad

    def symmetric(self) -> bool:
        return not self.asymmetries()

    def normalized(self, k: int, V: tuple[int, ...]) -> Fraction:
        """a^k_V = a^{k,i}_V / (K-1)!, using the smallest owner in V."""
        return Fraction(self.coefficient(k, V[0], V), self.permutations_per_sender)

    def terms_known_by(self, size: int) -> Fraction:
        """Sub-piece terms of holder-set size ``size`` per sender-averaged inequality."""
        total = sum(c for (k, i, V), c in self.counts.items() if len(V) == size)
        return Fraction(total, self.permutations_per_sender)

    def expected_terms_known_by(self, size: int) -> int:
        K, d = self.K, self.demand
        return sum(
            binom(K - 1, size) - binom(K - 1 - n_distinct(d, exclude=i), size)
            for i in range(1, K + 1)
        )

    def bound_for_placement(self, subfile_size: Callable[[int, tuple[int, ...]], Fraction]) -> Fraction:
        """Sum over k, V of a^k_V |W_{d_k,V}| (file units) for a given placement."""
        K = self.K
        total = Fraction(0)
        for k in range(1, K + 1):
            others = [x for x in range(1, K + 1) if x != k]
            for size in range(1, K):
                for V in combinations(others, size):
                    w = subfile_size(self.demand[k - 1], V)
                    if w:
                        total += self.normalized(k, V) * w
        return total


def ledger_build(K: int, d: Sequence[int]) -> CoefficientLedger:
    """Brute-force a^{k,i}_V over every sender and every permutation."""
    if K > MAX_BRUTE_K:
        raise InfeasibleError(f"K={K} too large for brute force (max {MAX_BRUTE_K})")
    d = tuple(d)
    if len(d) != K:
        raise ValueError("demand length must equal K")
    counts: dict[tuple[int, int, tuple[int, ...]], int] = defaultdict(int)
    for i in range(1, K + 1):
        others = [x for x in range(1, K + 1) if x != i]
        for u in permutations(others):
            for k, V in acyclic_levels(i, u, d, K):
                counts[(k, i, V)] += 1
    return CoefficientLedger(K, d, dict(counts))


def man_subfile_size(K: int, t: int) -> Callable[[int, tuple[int, ...]], Fraction]:
    size = Fraction(1, math.comb(K, t))
    return lambda q, V: size if len(V) == t else Fraction(0)


@dataclass
class TypeLedger:
    """Coefficients b_{q,V} summed over every demand of one type."""

    N: int
    K: int
    composition: Composition
    b: dict[tuple[int, tuple[int, ...]], Fraction]
    # demands of this type whose own ledger is not owner-symmetric
    asymmetric_demands: tuple[tuple[int, ...], ...] = ()

    def b_t(self, size: int) -> set[Fraction]:
        return {v for (q, V), v in self.b.items() if len(V) == size}

    def symmetric(self) -> bool:
        for size in range(1, self.K):
            vals = self.b_t(size)
            # every (q, V) of this size must be present with one common value
            expected = self.N * math.comb(self.K, size)
            if len(vals) > 1 or sum(1 for (q, V) in self.b if len(V) == size) != expected:
                return False
        return True

    def closed_form_holds(self) -> bool:
        """t N C(K,t) b_t == |D_s| sum_i [C(K-1,t) - C(K-1-N_e(d_-i),t)] for all t."""
        d = demands_of_type(self.composition)[0]
        count = composition_size(self.composition)
        K = self.K
        for size in range(1, K):
            (bt,) = self.b_t(size) or {Fraction(0)}
            rhs = count * sum(
                binom(K - 1, size) - binom(K - 1 - n_distinct(d, exclude=i), size)
                for i in range(1, K + 1)
            )
            if size * self.N * math.comb(K, size) * bt != rhs:
                return False
        return True


def type_ledger(N: int, composition: Composition) -> TypeLedger:
    composition = tuple(composition)
    K = sum(composition)
    b: dict[tuple[int, tuple[int, ...]], Fraction] = defaultdict(Fraction)
    asym = []
    for d in demands_of_type(composition):
        led = ledger_build(K, d)
        if not led.symmetric():
            asym.append(d)
        for k in range(1, K + 1):
            others = [x for x in range(1, K + 1) if x != k]
            for size in range(1, K):
                for V in combinations(others, size):
                    b[(d[k - 1], V)] += led.normalized(k, V)
    return TypeLedger(N, K, composition, dict(b), tuple(asym))


# --------------------------------------------------------------------------
# Converse value for a type


def r_values(K: int, composition: Composition) -> dict[int, Fraction]:
    """r_{t,s} for t in [1, K] (normalised per file unit)."""
    from .bounds import d2d_load_from_profile

    ne, u = composition_profile(composition)
    return {t: d2d_load_from_profile(K, t, ne, u) for t in range(1, K + 1)}


def converse_value(N: int, K: int, M, composition: Composition) -> Fraction:
    """min sum_t r_t x_t over distributions x on [1, K] with sum_t t x_t <= KM/N.

    Solved exactly by enumerating LP vertices (at most two non-zero x_t),
    which does not presuppose convexity of r_t.
    """
    M = as_fraction(M)
    budget = Fraction(K) * M / N
    if budget < 1:
        raise ValueError("KM/N must be at least 1 (every bit cached somewhere)")
    r = r_values(K, composition)
    best = min(r[t] for t in r if t <= budget)
    for t1 in r:
        for t2 in r:
            if t1 < budget < t2:
                w2 = (budget - t1) / (t2 - t1)
                best = min(best, (1 - w2) * r[t1] + w2 * r[t2])
    return best


def converse_envelope(N: int, K: int, composition: Composition):
    r = r_values(K, composition)
    return lower_convex_envelope((Fraction(N * t, K), v) for t, v in r.items())
