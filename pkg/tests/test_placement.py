import math
from fractions import Fraction

import pytest

from cachesim.placement import (
    Scenario,
    ScenarioError,
    canonical_piece_ids,
    file_bits,
    generate_database,
    man_placement,
    memory_sharing_parts,
    smallest_sharing_F,
)


def test_create_worked_example():
    s = Scenario.create(2, 4, 1, 12)
    assert (s.t, s.pieces_per_file, s.piece_bits) == (2, 12, 1)


@pytest.mark.parametrize(
    "N,K,M,F",
    [
        (2, 4, Fraction(3, 4), 12),  # t = 3/2
        (2, 4, 1, 10),  # F not a multiple of t C(K,t)
        (4, 2, 1, 4),  # MK < N
        (2, 1, 1, 2),  # single user
    ],
)
def test_invalid_scenarios(N, K, M, F):
    with pytest.raises(ScenarioError):
        Scenario.create(N, K, M, F)


def test_canonical_ids_complete():
    s = Scenario.from_t(3, 5, 2)
    ids = canonical_piece_ids(s, 1)
    assert len(ids) == len(set(ids)) == 2 * math.comb(5, 2)
    assert all(i.owner in i.holders and len(i.holders) == 2 for i in ids)


def test_database_deterministic_and_reassembles():
    s = Scenario.from_t(2, 4, 2, F=24)
    a, b = generate_database(s, 7), generate_database(s, 7)
    assert a.files == b.files
    assert generate_database(s, 8).files != a.files
    for q in (1, 2):
        assert a.reassemble(q) == a.files[q - 1] == file_bits(7, q, 24)


@pytest.mark.parametrize("N,K,t", [(2, 4, 1), (2, 4, 2), (3, 5, 3), (1, 3, 1)])
def test_cache_holds_exactly_MF_bits(N, K, t):
    s = Scenario.from_t(N, K, t)
    cache = man_placement(s, generate_database(s, 0))
    for k in s.users:
        assert Fraction(cache.bits_cached(k)) == s.M * s.F
        assert all(k in key.holders for key in cache.held(k))


@pytest.mark.parametrize("N,K,M", [(2, 4, Fraction(3, 4)), (3, 5, Fraction(7, 5)), (2, 3, Fraction(5, 6))])
def test_memory_sharing_total_memory(N, K, M):
    F = smallest_sharing_F(N, K, M)
    parts = memory_sharing_parts(N, K, M, F)
    assert sum(p.scenario.F for p in parts) == F
    assert sum(p.weight for p in parts) == 1
    stored = sum(p.scenario.M * p.scenario.F for p in parts)
    assert stored == M * F
