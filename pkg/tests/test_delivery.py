from fractions import Fraction
from itertools import combinations, product

import pytest

from cachesim.bounds import d2d_per_demand, d2d_per_demand_direct
from cachesim.delivery import (
    DecodeError,
    build_codeword,
    decode_all,
    expected_codeword_count,
    lemma1_null_check,
    parse_log,
    select_leaders,
    serialize_log,
    transmit_all,
)
from cachesim.placement import Scenario, SubPieceId, generate_database, man_placement


def run(N, K, t, d, seed=0, F=None):
    s = Scenario.from_t(N, K, t, F)
    store = generate_database(s, seed)
    cache = man_placement(s, store)
    return s, store, cache, transmit_all(s, d, store)


def test_worked_example():
    s, store, cache, log = run(2, 4, 2, (1, 2, 1, 1), F=12)
    assert log.load == Fraction(11, 12)
    assert log.counts() == {1: 3, 2: 2, 3: 3, 4: 3}
    for k in s.users:
        res = decode_all(k, log, cache)
        assert res.bits == store.files[(1, 2, 1, 1)[k - 1] - 1]
        assert res.one_shot()


def test_worked_example_codeword_contents():
    # U^1 = {2, 3} meets every pair from {2, 3, 4}, so user 1 sends all three
    s, store, cache, log = run(2, 4, 2, (1, 2, 1, 1), F=12)
    assert select_leaders(1, (1, 2, 1, 1)) == (2, 3)
    assert [cw.targets for cw in log.sent[1]] == [(2, 3), (2, 4), (3, 4)]
    # Y^1_{3,4} = W_{1,{1,4},1} xor W_{1,{1,3},1}
    p = store.pieces
    assert log.sent[1][2].payload == p[SubPieceId(1, (1, 4), 1)] ^ p[SubPieceId(1, (1, 3), 1)]


@pytest.mark.parametrize("rule", ["lowest", "highest"])
def test_leader_rule_does_not_change_load(rule):
    s = Scenario.from_t(2, 4, 1)
    store = generate_database(s, 0)
    log = transmit_all(s, (1, 2, 1, 1), store, leader_rule=rule)
    assert log.load == d2d_per_demand(4, 1, (1, 2, 1, 1))
    cache = man_placement(s, store)
    assert all(decode_all(k, log, cache).bits == store.files[(1, 2, 1, 1)[k - 1] - 1] for k in s.users)


def test_sender_cannot_target_itself():
    s = Scenario.from_t(2, 3, 1)
    with pytest.raises(ValueError):
        build_codeword(1, (1,), (1, 2, 1), generate_database(s, 0))


def test_missing_sender_is_reported():
    s = Scenario.from_t(2, 4, 2)
    store = generate_database(s, 0)
    log = transmit_all(s, (1, 2, 1, 1), store, active=[1, 2, 4])
    with pytest.raises(DecodeError):
        decode_all(1, log, man_placement(s, store))


@pytest.mark.parametrize("N,K,t,d", [(2, 3, 1, (1, 1, 2)), (1, 2, 2, (1, 1)), (3, 5, 2, (1, 2, 3, 1, 1))])
def test_small_cases(N, K, t, d):
    s, store, cache, log = run(N, K, t, d)
    assert log.load == d2d_per_demand(K, t, d) == d2d_per_demand_direct(K, t, d)
    for i in s.users:
        assert len(log.sent[i]) == expected_codeword_count(s, d, i)


def test_n1_k2_full_caching_is_free():
    s, store, cache, log = run(1, 2, 2, (1, 1), F=2)
    assert log.load == 0


def test_serialization_round_trip():
    s, store, cache, log = run(3, 5, 2, (1, 2, 3, 1, 1), F=60)
    raw = serialize_log(log)
    parsed = parse_log(raw, s.K, s.piece_bits)
    assert parsed == [cw for i in sorted(log.sent) for cw in log.sent[i]]
    step = 4 + 1 + 1  # header, 5-bit bitmap, 3-bit payload
    assert len(raw) == step * sum(log.counts().values())
    with pytest.raises(ValueError):
        parse_log(raw[:-1], s.K, s.piece_bits)


def grid():
    for N in (1, 2, 3):
        for K in (2, 3, 4):
            for t in range(1, K):
                yield N, K, t


@pytest.mark.parametrize("N,K,t", list(grid()))
def test_all_demands_decode_and_match_formula(N, K, t):
    s = Scenario.from_t(N, K, t)
    store = generate_database(s, 1)
    cache = man_placement(s, store)
    for d in product(range(1, N + 1), repeat=K):
        log = transmit_all(s, d, store)
        assert log.load == d2d_per_demand_direct(K, t, d)
        for k in s.users:
            res = decode_all(k, log, cache)
            assert res.bits == store.files[d[k - 1] - 1]
            assert res.one_shot()


@pytest.mark.parametrize("N,K,t", list(grid()))
def test_lemma1_nullity(N, K, t):
    s = Scenario.from_t(N, K, t)
    store = generate_database(s, 2)
    for d in product(range(1, N + 1), repeat=K):
        for i in s.users:
            U = set(select_leaders(i, d))
            rest = [k for k in s.users if k != i and k not in U]
            for r in range(len(rest) + 1):
                for extra in combinations(rest, r):
                    assert lemma1_null_check(i, d, sorted(U | set(extra)), store)
