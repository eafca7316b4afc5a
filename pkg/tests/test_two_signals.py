import pytest

from conftest import random_ratios
from ivauction._rat import ONE, rat
from ivauction.core import (
    GOOD,
    Ratios,
    orderings_from_instance,
    profile_index,
    profile_vector,
    ratios_from_values,
    total_increasing_ordering,
    values_from_ratios,
)
from ivauction.errors import WrongArity
from ivauction.two_agents import optimal_ratios
from ivauction.two_signals import (
    MatchGraph,
    build_match_graph,
    feasible_at,
    hopcroft_karp,
    solve_det_k2,
)


def fig3_instance(fig3_ratios):
    return values_from_ratios(fig3_ratios, GOOD)


def test_wrong_arity():
    rho = random_ratios(2, 3, 0)
    with pytest.raises(WrongArity):
        build_match_graph(rho, total_increasing_ordering(2, 3), rat(2))


def test_fig3_must_match_and_edges(fig3_ratios):
    inst = fig3_instance(fig3_ratios)
    rho = ratios_from_values(inst)
    ord = orderings_from_instance(inst)
    g = build_match_graph(rho, ord, rat(2))
    mm = {profile_vector(p, 3, 2) for p in g.must_match}
    assert mm == {(1, 1, 1), (1, 2, 1), (1, 1, 2), (2, 1, 2)}
    edges = {
        (profile_vector(p, 3, 2), profile_vector(q, 3, 2), i)
        for p, q, i in g.edges
    }
    assert edges == {
        ((1, 1, 1), (2, 1, 1), 0),
        ((1, 2, 1), (2, 2, 1), 0),
        ((1, 2, 1), (1, 2, 2), 2),
        ((1, 1, 2), (1, 2, 2), 1),
        ((2, 1, 2), (2, 2, 2), 1),
    }


def test_all_ones_graph_is_empty():
    # constant values: all-ones ratios with empty line orders
    from conftest import table_from_fn
    from ivauction.core import Instance, orderings_from_instance

    n = 3
    inst = Instance(n, 2, GOOD, table_from_fn(n, 2, lambda i, s: rat(3)))
    rho = ratios_from_values(inst)
    g = build_match_graph(rho, orderings_from_instance(inst), ONE)
    assert g.singleton_ok == frozenset(range(8))
    assert not g.edges and not g.must_match


def test_gamma_one_hand_construction():
    # n = 2, k = 2: a unique top agent per profile, alternating, with the
    # constrained agent's selection forced across one line
    entries = {
        (0, (1, 1)): rat(1, 2),  # winner must be agent 1 at (1,1)
        (1, (2, 1)): rat(1, 2),  # winner must be agent 0 at (2,1)
        (1, (1, 2)): rat(1, 2),
        (0, (2, 2)): rat(1, 2),
    }
    from ivauction.generators import ratios_from_table

    rho = ratios_from_table(2, 2, entries)
    ord = total_increasing_ordering(2, 2)
    g = build_match_graph(rho, ord, ONE)
    # only monotonicity-constrained acceptable selections produce edges
    for p, q, i in g.edges:
        assert ord.constrained(i, p) or ord.constrained(i, q)


def test_hopcroft_karp_empty_and_complete():
    empty = MatchGraph(
        2, ONE, frozenset(range(4)), frozenset(), (), ((0,),) * 4, ((),) * 4
    )
    assert hopcroft_karp(empty) == {}
    # complete bipartite 2x2 over the k=2, n=2 parity classes
    full = MatchGraph(
        2,
        ONE,
        frozenset(),
        frozenset(range(4)),
        ((0, 1, 0), (0, 2, 1), (3, 1, 1), (3, 2, 0)),
        ((0, 1),) * 4,
        ((0, 1),) * 4,
    )
    pairing = hopcroft_karp(full)
    assert len(pairing) // 2 == 2


def test_fig3_matching_covers_must_match(fig3_ratios):
    inst = fig3_instance(fig3_ratios)
    rho = ratios_from_values(inst)
    ord = orderings_from_instance(inst)
    ok, x, g, pairing = feasible_at(rho, ord, rat(2))
    assert ok
    assert all(p in pairing for p in g.must_match)


def test_solve_det_k2_fig3(fig3_ratios):
    # frozen expected value: brute force over 3^8 rules gives 2
    inst = fig3_instance(fig3_ratios)
    rep = solve_det_k2(inst)
    assert rep.ratio == 2
    assert rep.path == "binary"
    from ivauction.oracle import brute_force_det

    assert brute_force_det(inst)[0] == 2


def test_solve_det_k2_all_ones():
    rho = Ratios(3, 2, tuple((ONE,) * 8 for _ in range(3)))
    inst = values_from_ratios(rho, GOOD)
    assert solve_det_k2(inst).ratio == 1


def test_solve_det_k2_agrees_with_duo():
    for seed in range(30):
        rho = random_ratios(2, 2, seed)
        inst = values_from_ratios(rho, GOOD)
        assert solve_det_k2(inst).ratio == optimal_ratios(inst).det


def test_any_maximum_matching_extraction_is_truthful(fig3_ratios):
    from ivauction.core import eval_ratio, is_truthful

    inst = fig3_instance(fig3_ratios)
    rho = ratios_from_values(inst)
    ord = orderings_from_instance(inst)
    ok, x, g, pairing = feasible_at(rho, ord, rat(2))
    assert ok
    assert is_truthful(x, ord)
    assert eval_ratio(rho, x, "value") <= 2
