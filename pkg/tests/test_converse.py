import math
from fractions import Fraction
from itertools import permutations, product

import networkx as nx
import pytest

from cachesim import converse
from cachesim.bounds import d2d_per_demand
from cachesim.combinatorics import binom, demands_of_type, enumerate_compositions
from cachesim.converse import (
    InfeasibleError,
    acyclic_levels,
    acyclic_rhs,
    acyclicity_audit,
    converse_value,
    cycle_inducing_node,
    ledger_build,
    prune,
    r_values,
    type_ledger,
    uniform_sizes,
)
from cachesim.delivery import transmit_all
from cachesim.placement import Scenario, generate_database


@pytest.mark.parametrize(
    "u,d,expected",
    [
        ((2, 3, 5, 4), (1, 2, 2, 3, 3), (2, 5)),
        ((3, 1, 2), (1, 2, 3, 4), (3, 1, 2)),
        ((3, 4, 1), (1, 2, 1, 1), (3,)),
    ],
)
def test_prune(u, d, expected):
    assert prune(u, d).pruned == expected


def test_acyclic_rhs_worked_example():
    sizes = uniform_sizes(4, 2)
    for u in permutations((2, 3, 4)):
        assert acyclic_rhs(1, u, (1, 2, 1, 1), sizes) == Fraction(3, 12)


def side_info_graph_is_dag(i, u, d, K, t, extra=()):
    """Oracle built with networkx from the node-set definition."""
    nodes = [(k, V) for k, V in acyclic_levels(i, u, d, K, (t,))] + list(extra)
    g = nx.DiGraph()
    g.add_nodes_from(range(len(nodes)))
    for a, (_, Va) in enumerate(nodes):
        for b, (kb, _) in enumerate(nodes):
            if kb in Va:
                g.add_edge(a, b)
    return nx.is_directed_acyclic_graph(g)


def grid():
    for N in (1, 2, 3):
        for K in (2, 3, 4):
            for t in range(1, K):
                yield N, K, t


@pytest.mark.parametrize("N,K,t", list(grid()))
def test_rhs_bounds_codeword_count_and_is_tight(N, K, t):
    s = Scenario.from_t(N, K, t)
    store = generate_database(s, 0)
    sizes = uniform_sizes(K, t)
    for d in product(range(1, N + 1), repeat=K):
        log = transmit_all(s, d, store)
        total = Fraction(0)
        for i in s.users:
            sent = Fraction(len(log.sent[i]), s.pieces_per_file)
            rhs = [acyclic_rhs(i, u, d, sizes) for u in permutations([x for x in s.users if x != i])]
            assert max(rhs) <= sent
            total += max(rhs)
        assert total == log.load


@pytest.mark.parametrize("N,K,t", list(grid()))
def test_acyclicity_audit_matches_oracle(N, K, t):
    for d in product(range(1, N + 1), repeat=K):
        for i in range(1, K + 1):
            for u in permutations([x for x in range(1, K + 1) if x != i]):
                assert acyclicity_audit(i, u, d, K, t)
                assert side_info_graph_is_dag(i, u, d, K, t)
                bad = cycle_inducing_node(i, u, d, K, t)
                if bad is not None:
                    assert not acyclicity_audit(i, u, d, K, t, [bad])
                    assert not side_info_graph_is_dag(i, u, d, K, t, [bad])


def test_negative_control_exists_when_two_levels():
    assert cycle_inducing_node(1, (2, 3, 4), (1, 2, 1, 1), 4, 2) is not None
    assert cycle_inducing_node(1, (2, 3, 4), (1, 2, 1, 1), 4, 1) is None


def test_single_node_acyclic():
    # K=2: one sender, one level, one node
    assert acyclicity_audit(1, (2,), (1, 1), 2, 1)


def test_ledger_symmetric_on_worked_example():
    led = ledger_build(4, (1, 2, 1, 1))
    assert led.symmetric()
    for size in range(1, 4):
        assert led.terms_known_by(size) == led.expected_terms_known_by(size)


def test_ledger_k2_trivial():
    assert ledger_build(2, (1, 2)).symmetric()


def test_ledger_owner_asymmetry_counterexample():
    # d=(1,1,2,2), k=1, V={2,3}: sender 2 sees W^{1,2} unless 3 heads its permutation
    # of {1,3,4} (4 of 6); sender 3 needs 1 before 2 in a permutation of {1,2,4} (3 of 6)
    led = ledger_build(4, (1, 1, 2, 2))
    assert led.coefficient(1, 2, (2, 3)) == 4
    assert led.coefficient(1, 3, (2, 3)) == 3
    assert not led.symmetric()


@pytest.mark.parametrize("N,K", [(N, K) for N in (1, 2, 3) for K in (2, 3, 4, 5)])
def test_type_aggregated_coefficients(N, K):
    for s, _ in enumerate_compositions(N, K):
        tl = type_ledger(N, s)
        assert tl.symmetric()
        assert tl.closed_form_holds()


def test_ledger_too_large():
    with pytest.raises(InfeasibleError):
        ledger_build(7, (1,) * 7)


def test_converse_value_examples():
    assert converse_value(2, 4, 1, (3, 1)) == Fraction(11, 12)
    assert converse_value(2, 3, Fraction(2, 3), (2, 1)) == Fraction(5, 3)
    for K in (3, 4, 5):
        for t in range(1, K):
            expected = Fraction(binom(K - 1, t) - binom(K - 2, t), binom(K - 1, t - 1))
            assert converse_value(2, K, Fraction(2 * t, K), (K, 0)) == expected


@pytest.mark.parametrize("N,K", [(N, K) for N in (1, 2, 3) for K in (2, 3, 4, 5)])
def test_converse_equals_type_average(N, K):
    for s, _ in enumerate_compositions(N, K):
        ds = demands_of_type(s)
        for t in range(1, K + 1):
            achievable = sum((d2d_per_demand(K, t, d) for d in ds), Fraction(0)) / len(ds)
            assert converse_value(N, K, Fraction(N * t, K), s) == achievable


@pytest.mark.parametrize("N,K", [(N, K) for N in (1, 2, 3) for K in (2, 3, 4, 5, 6)])
def test_r_convex_non_increasing(N, K):
    for s, _ in enumerate_compositions(N, K):
        r = r_values(K, s)
        diffs = [r[t + 1] - r[t] for t in range(1, K)]
        assert all(x <= 0 for x in diffs)
        assert all(a <= b for a, b in zip(diffs, diffs[1:]))


def test_man_subfile_size_sums_to_file():
    size = converse.man_subfile_size(4, 2)
    assert sum(size(1, V) for V in [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]) == 1
    assert math.comb(4, 2) * size(1, (1, 2)) == 1
