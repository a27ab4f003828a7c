"""Synthetic file database and MAN uncoded cache placement."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .combinatorics import as_fraction, subsets_colex

_MASK64 = (1 << 64) - 1


class ScenarioError(ValueError):
    """Raised for parameter sets violating the system invariants."""


@dataclass(frozen=True)
class Scenario:
    """System parameters: N files of F bits, K users with memory M (file units)."""

    N: int
    K: int
    M: Fraction
    F: int
    t: int

    @classmethod
    def create(cls, N: int, K: int, M, F: int) -> "Scenario":
        M = as_fraction(M)
        t = Fraction(K) * M / N
        if t.denominator != 1:
            raise ScenarioError(f"t = KM/N = {t} is not an integer; use memory sharing")
        scenario = cls(N, K, M, F, int(t))
        scenario.validate()
        return scenario

    @classmethod
    def from_t(cls, N: int, K: int, t: int, F: int | None = None) -> "Scenario":
        if F is None:
            F = t * math.comb(K, t) if 1 <= t <= K else 1
        scenario = cls(N, K, Fraction(N * t, K), F, t)
        scenario.validate()
        return scenario

    def validate(self) -> None:
        if self.N < 1:
            raise ScenarioError("N must be >= 1")
        if self.K < 2:
            raise ScenarioError("D2D delivery needs K >= 2")
        if Fraction(self.K) * self.M / self.N != self.t:
            raise ScenarioError("t must equal KM/N")
        if not 1 <= self.t <= self.K:
            raise ScenarioError(f"t={self.t} outside [1, K]; MK >= N and M <= N are required")
        if self.F < 1 or self.F % self.pieces_per_file:
            raise ScenarioError(
                f"F={self.F} must be a positive multiple of t*C(K,t)={self.pieces_per_file}"
            )

    @property
    def pieces_per_file(self) -> int:
        return self.t * math.comb(self.K, self.t)

    @property
    def piece_bits(self) -> int:
        return self.F // self.pieces_per_file

    @property
    def users(self) -> range:
        return range(1, self.K + 1)


class SubPieceId(NamedTuple):
    file: int
    holders: tuple[int, ...]
    owner: int


def canonical_piece_ids(scenario: Scenario, file: int) -> list[SubPieceId]:
    """Sub-piece ids of one file in canonical (colex holders, ascending owner) order."""
    return [
        SubPieceId(file, V, i)
        for V in subsets_colex(scenario.users, scenario.t)
        for i in V
    ]


def file_bits(seed: int, file: int, F: int) -> int:
    """F pseudo-random bits for ``file`` from a counter-based generator."""
    rng = np.random.Generator(np.random.Philox(key=[seed & _MASK64, file]))
    raw = rng.bytes((F + 7) // 8)
    return int.from_bytes(raw, "little") & ((1 << F) - 1)


@dataclass(frozen=True)
class SubPieceStore:
    """All sub-pieces W_{q,V,i} of the database, each ``piece_bits`` long.

    Bits are held as Python ints: bit j of a block is ``(block >> j) & 1``.
    """

    scenario: Scenario
    files: tuple[int, ...]
    pieces: dict[SubPieceId, int] = field(repr=False)

    @property
    def piece_bits(self) -> int:
        return self.scenario.piece_bits

    def __getitem__(self, key: SubPieceId) -> int:
        return self.pieces[key]

    def __len__(self) -> int:
        return len(self.pieces)

    def reassemble(self, file: int) -> int:
        L = self.piece_bits
        out = 0
        for p, key in enumerate(canonical_piece_ids(self.scenario, file)):
            out |= self.pieces[key] << (p * L)
        return out


def store_from_files(scenario: Scenario, files) -> SubPieceStore:
    """Split given F-bit file contents into the canonical sub-pieces."""
    scenario.validate()
    files = tuple(files)
    if len(files) != scenario.N:
        raise ScenarioError(f"expected {scenario.N} files, got {len(files)}")
    L = scenario.piece_bits
    mask = (1 << L) - 1
    pieces: dict[SubPieceId, int] = {}
    for q, bits in enumerate(files, start=1):
        for p, key in enumerate(canonical_piece_ids(scenario, q)):
            pieces[key] = (bits >> (p * L)) & mask
    return SubPieceStore(scenario, files, pieces)


def generate_database(scenario: Scenario, seed: int) -> SubPieceStore:
    """Deterministic database: identical for identical (scenario, seed)."""
    scenario.validate()
    files = [file_bits(seed, q, scenario.F) for q in range(1, scenario.N + 1)]
    return store_from_files(scenario, files)


@dataclass(frozen=True)
class CacheState:
    """Per-user cache contents; ``caches[k]`` maps SubPieceId to bits for user k."""

    scenario: Scenario
    caches: dict[int, dict[SubPieceId, int]]

    def held(self, k: int) -> set[SubPieceId]:
        return set(self.caches[k])

    def bits_cached(self, k: int) -> int:
        return len(self.caches[k]) * self.scenario.piece_bits


def man_placement(scenario: Scenario, store: SubPieceStore) -> CacheState:
    """User k caches every W_{q,V,i} with k in V."""
    caches: dict[int, dict[SubPieceId, int]] = {k: {} for k in scenario.users}
    for key, bits in store.pieces.items():
        for k in key.holders:
            caches[k][key] = bits
    return CacheState(scenario, caches)


# --------------------------------------------------------------------------
# Two-level memory sharing for non-integer t


@dataclass(frozen=True)
class SharingPart:
    scenario: Scenario
    bit_offset: int
    weight: Fraction


def memory_sharing_parts(N: int, K: int, M, F: int) -> list[SharingPart]:
    """Split each file across t_low = floor(t) and t_high = ceil(t) placements.

    A fraction ``t_high - t`` of every file is placed with t_low, the rest
    with t_high, so each user stores exactly MF bits in total.
    """
    M = as_fraction(M)
    t = Fraction(K) * M / N
    if t < 1 or t > K:
        raise ScenarioError(f"t = KM/N = {t} outside [1, K]")
    if t.denominator == 1:
        return [SharingPart(Scenario.create(N, K, M, F), 0, Fraction(1))]
    t_low = math.floor(t)
    t_high = t_low + 1
    alpha = t_high - t
    f_low = alpha * F
    if f_low.denominator != 1:
        raise ScenarioError(f"F={F} cannot be split with ratio {alpha}")
    f_low = int(f_low)
    low = Scenario(N, K, Fraction(N * t_low, K), f_low, t_low)
    high = Scenario(N, K, Fraction(N * t_high, K), F - f_low, t_high)
    low.validate()
    high.validate()
    return [SharingPart(low, 0, alpha), SharingPart(high, f_low, 1 - alpha)]


def smallest_sharing_F(N: int, K: int, M) -> int:
    """Smallest F for which :func:`memory_sharing_parts` succeeds."""
    M = as_fraction(M)
    t = Fraction(K) * M / N
    if t.denominator == 1:
        return int(t) * math.comb(K, int(t))
    t_low = math.floor(t)
    alpha = t_low + 1 - t
    a = t_low * math.comb(K, t_low)
    b = (t_low + 1) * math.comb(K, t_low + 1)
    F = 1
    while True:
        f_low = alpha * F
        if f_low.denominator == 1 and int(f_low) % a == 0 and (F - int(f_low)) % b == 0:
            return F
        F += 1
