"""Exact combinatorial primitives shared by the rest of the package.

All load values are carried as :class:`fractions.Fraction`; floats only
appear when results are written out.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Sequence

Rational = Fraction


def binom(x: int, y: int) -> int:
    """Binomial coefficient with the zero convention used for load formulas.

    Returns 0 whenever ``x < y`` or ``x <= 0`` (so ``binom(0, 0) == 0``),
    and also for negative ``y``.
    """
    if x < y or x <= 0 or y < 0:
        return 0
    return math.comb(x, y)


def as_fraction(value) -> Fraction:
    """Parse ints, Fractions, ``"p/q"`` strings and decimal strings exactly."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(str(value))
    return Fraction(str(value).strip())


# --------------------------------------------------------------------------
# Demands and compositions


def n_distinct(d: Sequence[int], exclude: int | None = None) -> int:
    """Number of distinct files in ``d``; ``exclude`` drops one user (1-based)."""
    if exclude is None:
        return len(set(d))
    return len({f for k, f in enumerate(d, start=1) if k != exclude})


def unique_demanders(d: Sequence[int]) -> int:
    """Number of users that are the only requester of their file."""
    counts = Counter(d)
    return sum(1 for f in d if counts[f] == 1)


Composition = tuple


def composition_of(d: Sequence[int], N: int) -> Composition:
    """Request multiplicities sorted descending, zero-padded to length ``N``."""
    counts = sorted(Counter(d).values(), reverse=True)
    if len(counts) > N:
        raise ValueError(f"demand uses {len(counts)} files but N={N}")
    return tuple(counts + [0] * (N - len(counts)))


def _partitions(K: int, max_parts: int, max_part: int) -> Iterable[tuple[int, ...]]:
    if K == 0:
        yield ()
        return
    if max_parts == 0:
        return
    for first in range(min(K, max_part), 0, -1):
        for rest in _partitions(K - first, max_parts - 1, first):
            yield (first,) + rest


def composition_size(s: Composition) -> int:
    """|D_s|: number of demand vectors whose composition is ``s``."""
    K = sum(s)
    N = len(s)
    users = math.factorial(K)
    for c in s:
        users //= math.factorial(c)
    # files onto the multiplicity pattern: N! / prod(mult of each count value)!
    files = math.factorial(N)
    for mult in Counter(s).values():
        files //= math.factorial(mult)
    return users * files


def enumerate_compositions(N: int, K: int) -> list[tuple[Composition, int]]:
    """All compositions of ``K`` requests over ``N`` files with their type sizes."""
    if N < 1 or K < 1:
        raise ValueError("N and K must be positive")
    out = []
    for parts in _partitions(K, N, K):
        s = parts + (0,) * (N - len(parts))
        out.append((s, composition_size(s)))
    return out


def representative_demand(s: Composition) -> tuple[int, ...]:
    """A demand vector of type ``s``: file 1 requested s_1 times, and so on."""
    d: list[int] = []
    for f, c in enumerate(s, start=1):
        d.extend([f] * c)
    return tuple(d)


def demands_of_type(s: Composition) -> list[tuple[int, ...]]:
    """Every demand vector with composition ``s`` (small cases only)."""
    from itertools import product

    N, K = len(s), sum(s)
    return [d for d in product(range(1, N + 1), repeat=K) if composition_of(d, N) == s]


def composition_profile(s: Composition) -> tuple[int, int]:
    """(N_e, number of unique demanders) for any demand of type ``s``."""
    return sum(1 for c in s if c > 0), sum(1 for c in s if c == 1)


@lru_cache(maxsize=None)
def _blocks_at_least_two(n: int, k: int) -> int:
    # set partitions of n labelled items into k blocks, each of size >= 2
    if n == 0 and k == 0:
        return 1
    if n <= 0 or k <= 0:
        return 0
    return k * _blocks_at_least_two(n - 1, k) + (n - 1) * _blocks_at_least_two(n - 2, k - 1)


def demand_profile_counts(N: int, K: int) -> dict[tuple[int, int], int]:
    """Number of demand vectors in [N]^K per (N_e, unique-demander count).

    Every load formula depends on a demand only through these two numbers,
    so this aggregates the composition sum without listing partitions of K
    (which is hopeless at K=100).
    """
    out: dict[tuple[int, int], int] = {}
    for ne in range(1, min(N, K) + 1):
        choose_files = math.comb(N, ne)
        for u in range(ne + 1):
            rest = _blocks_at_least_two(K - u, ne - u)
            if rest == 0:
                continue
            count = (
                choose_files
                * math.comb(ne, u)
                * math.perm(K, u)
                * math.factorial(ne - u)
                * rest
            )
            out[(ne, u)] = count
    return out


# --------------------------------------------------------------------------
# Subsets


def colex_key(subset: Sequence[int]) -> tuple[int, ...]:
    return tuple(sorted(subset, reverse=True))


def subsets_colex(universe: Iterable[int], size: int) -> list[tuple[int, ...]]:
    """``size``-subsets of ``universe`` as sorted tuples, colexicographic order."""
    items = sorted(universe)
    return sorted(combinations(items, size), key=colex_key)


def subset_mask(subset: Iterable[int]) -> int:
    """Bitmap with bit ``k-1`` set for each (1-based) user ``k``."""
    mask = 0
    for k in subset:
        mask |= 1 << (k - 1)
    return mask


# --------------------------------------------------------------------------
# Lower convex envelope


@dataclass(frozen=True)
class Envelope:
    """Piecewise-linear lower convex hull over the input M-range."""

    vertices: tuple[tuple[Fraction, Fraction], ...]

    @property
    def m_min(self) -> Fraction:
        return self.vertices[0][0]

    @property
    def m_max(self) -> Fraction:
        return self.vertices[-1][0]

    def __call__(self, m) -> Fraction:
        return self.evaluate(m)

    def evaluate(self, m) -> Fraction:
        m = as_fraction(m)
        if m < self.m_min or m > self.m_max:
            raise ValueError(f"M={m} outside envelope range [{self.m_min}, {self.m_max}]")
        xs = [v[0] for v in self.vertices]
        j = bisect_right(xs, m)
        if j == len(xs):
            return self.vertices[-1][1]
        (x0, y0), (x1, y1) = self.vertices[j - 1], self.vertices[j]
        return y0 + (y1 - y0) * (m - x0) / (x1 - x0)

    def slopes(self) -> list[Fraction]:
        v = self.vertices
        return [(v[i + 1][1] - v[i][1]) / (v[i + 1][0] - v[i][0]) for i in range(len(v) - 1)]


def lower_convex_envelope(points: Iterable[tuple]) -> Envelope:
    """Lower convex hull of (M, R) points; collinear points are kept."""
    pts = sorted((as_fraction(m), as_fraction(r)) for m, r in points)
    if not pts:
        raise ValueError("need at least one point")
    for a, b in zip(pts, pts[1:]):
        if a[0] == b[0]:
            raise ValueError(f"duplicate M value {a[0]}")
    hull: list[tuple[Fraction, Fraction]] = []
    for p in pts:
        while len(hull) >= 2:
            (x0, y0), (x1, y1) = hull[-2], hull[-1]
            # drop hull[-1] only if it lies strictly above the chord hull[-2] -> p
            cross = (x1 - x0) * (p[1] - y0) - (y1 - y0) * (p[0] - x0)
            if cross < 0:
                hull.pop()
            else:
                break
        hull.append(p)
    return Envelope(tuple(hull))
