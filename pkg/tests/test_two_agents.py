import random

import pytest

from conftest import random_ratios, table_from_fn
from ivauction._rat import ONE, rat
from ivauction.core import (
    CHORE,
    GOOD,
    Instance,
    Ratios,
    eval_ratio,
    is_truthful,
    orderings_from_instance,
    profile_index,
    ratios_from_values,
    values_from_ratios,
)
from ivauction.errors import NotMonotone, PreconditionViolation, WrongArity
from ivauction.generators import ratios_from_table
from ivauction.lp import solve_cst, solve_det_lp, solve_val
from ivauction.two_agents import (
    build_dg,
    condense,
    conflict_function,
    is_single_crossing,
    optimal_ratios,
    reachable,
    sap_c,
    sap_v,
    solve_duo,
    twosat_feasible,
    zap,
)


def all_ones_instance(k=2):
    rho = Ratios(2, k, ((ONE,) * k**2, (ONE,) * k**2))
    return values_from_ratios(rho, GOOD)


def red_chain_instance():
    # k = 3 analogue of the blocking-chain picture: forced selection at the
    # source (1,2) flows to the forced non-selection at the sink (3,1)
    rho = ratios_from_table(
        2, 3, {(1, (1, 2)): rat(2, 5), (0, (3, 1)): rat(3, 10)}
    )
    return values_from_ratios(rho, GOOD)


def test_wrong_arity():
    rho = random_ratios(3, 2, 0)
    inst = values_from_ratios(rho, GOOD)
    with pytest.raises(WrongArity):
        build_dg(inst)
    with pytest.raises(WrongArity):
        twosat_feasible(inst, rat(2))


def test_build_dg_constant_values():
    inst = Instance(2, 2, GOOD, table_from_fn(2, 2, lambda i, s: rat(5)))
    dg = build_dg(inst)
    assert dg.num_vertices == 4  # no dummies
    assert all(not a for a in dg.adj)


def test_build_dg_increasing_reachability():
    inst = values_from_ratios(random_ratios(2, 2, 3), GOOD)  # strictly increasing
    dg = build_dg(inst)
    k = 2
    src = profile_index((1, 2), k)
    for s in ((1, 1), (2, 2), (2, 1)):
        assert reachable(dg, src, profile_index(s, k))
    snk = profile_index((2, 1), k)
    assert reachable(dg, profile_index((1, 1), k), snk)
    assert reachable(dg, profile_index((2, 2), k), snk)
    assert not reachable(dg, snk, src)
    assert not reachable(dg, profile_index((1, 1), k), profile_index((2, 2), k))


def test_build_dg_tied_line_blocks():
    # agent 0's line has values (3, 1, 3): blocks {2} < {1, 3}
    def fn(i, s):
        return rat([3, 1, 3][s[0] - 1]) if i == 0 else rat(1)

    inst = Instance(2, 3, GOOD, table_from_fn(2, 3, fn))
    dg = build_dg(inst)
    for s2 in (1, 2, 3):
        lo = profile_index((2, s2), 3)
        for s1 in (1, 3):
            assert reachable(dg, lo, profile_index((s1, s2), 3))
            assert not reachable(dg, profile_index((s1, s2), 3), lo)


def test_condense_acyclic_singletons(fig5):
    dg = build_dg(fig5)
    cdag = condense(dg)
    assert all(len(c) == 1 for c in cdag.comps)
    # topological order respects edges
    for c, succs in enumerate(cdag.succs):
        assert all(c < s for s in succs)


def test_condense_cycle_merges():
    # opposite per-line directions force a 4-cycle among all profiles
    v1 = {(1, 1): 1, (2, 1): 2, (1, 2): 2, (2, 2): 1}
    v2 = {(1, 1): 1, (1, 2): 2, (2, 1): 2, (2, 2): 1}

    def fn(i, s):
        return rat((v1 if i == 0 else v2)[tuple(s)])

    inst = Instance(2, 2, GOOD, table_from_fn(2, 2, fn))
    dg = build_dg(inst)
    cdag = condense(dg)
    comps = {cdag.comp_of[p] for p in range(4)}
    assert len(comps) == 1  # shared x_0 on all four profiles


def test_conflict_function_values():
    assert conflict_function(ONE, ONE) == 1
    assert conflict_function(rat(2, 5), rat(1, 2)) == rat(8, 11)
    for v in (rat(1, 3), rat(9, 10), rat(4)):
        assert conflict_function(ONE, v) == 1


def test_conflict_inequality_chain_seeded():
    rng = random.Random("ineq-conflict")
    for _ in range(2000):
        u = rat(rng.randint(1, 40), 40)
        v = rat(rng.randint(1, 40), 40)
        lhs = ONE / conflict_function(u, v)
        mid = conflict_function(ONE / u, ONE / v)
        rhs = min(ONE / u, ONE / v)
        assert lhs <= mid <= rhs


def test_optimal_ratios_fig5(fig5):
    opt = optimal_ratios(fig5)
    assert (opt.value, opt.cost, opt.det) == (rat(11, 8), rat(8, 5), rat(2))
    for kind in ("value", "cost", "det"):
        pair = opt.pairs[kind]
        assert pair.source == (1, 2) and pair.sink == (2, 1)


def test_optimal_ratios_trivial_cases(intro_good):
    opt = optimal_ratios(all_ones_instance())
    assert (opt.value, opt.cost, opt.det) == (ONE, ONE, ONE)
    assert all(p is None for p in opt.pairs.values())
    opt2 = optimal_ratios(intro_good)
    assert (opt2.value, opt2.cost, opt2.det) == (ONE, ONE, ONE)


def test_zap_fig5(fig5):
    x = zap(fig5, rat(2))
    assert all(x.x[0][p] == 1 for p in range(4))
    rho = ratios_from_values(fig5)
    assert eval_ratio(rho, x, "value") == 2
    assert is_truthful(x, orderings_from_instance(fig5))


def test_zap_all_ones():
    x = zap(all_ones_instance(), ONE)
    assert all(x.x[0][p] == 0 for p in range(4))


def test_zap_precondition(fig5):
    with pytest.raises(PreconditionViolation) as exc:
        zap(fig5, rat(3, 2))
    assert exc.value.certificate.bound == 2


def test_sap_v_fig5(fig5):
    x = sap_v(fig5, rat(11, 8))
    src = profile_index((1, 2), 2)
    snk = profile_index((2, 1), 2)
    assert x.x[0][src] == rat(6, 11)
    assert x.x[0][snk] == rat(6, 11)
    rho = ratios_from_values(fig5)
    assert eval_ratio(rho, x, "value") == rat(11, 8)
    with pytest.raises(PreconditionViolation):
        sap_v(fig5, rat(5, 4))


def test_sap_v_all_ones():
    x = sap_v(all_ones_instance(), ONE)
    assert all(v == 0 for v in x.x[0])


def test_sap_c_fig5(fig5):
    x = sap_c(fig5, rat(8, 5))
    assert all(v == rat(3, 5) for v in x.x[0])
    rho = ratios_from_values(fig5)
    assert eval_ratio(rho, x, "cost") == rat(8, 5)
    with pytest.raises(PreconditionViolation):
        sap_c(fig5, rat(3, 2))


def test_sap_c_all_ones():
    x = sap_c(all_ones_instance(), ONE)
    assert all(v == 0 for v in x.x[0])


def test_twosat_fig5(fig5):
    ok, x = twosat_feasible(fig5, rat(2))
    assert ok
    rho = ratios_from_values(fig5)
    assert is_truthful(x, orderings_from_instance(fig5))
    assert eval_ratio(rho, x, "value") <= 2
    ok2, x2 = twosat_feasible(fig5, rat(3, 2))
    assert not ok2 and x2 is None


def test_twosat_red_chain():
    inst = red_chain_instance()
    # the blocking chain exists exactly for gamma < 5/2
    assert not twosat_feasible(inst, rat(2))[0]
    assert not twosat_feasible(inst, rat(12, 5))[0]
    ok, x = twosat_feasible(inst, rat(5, 2))
    assert ok
    assert optimal_ratios(inst).det == rat(5, 2)


def single_crossing_counterexample():
    v1 = {(1, 1): rat(1, 2), (1, 2): ONE, (2, 1): rat(1, 2), (2, 2): ONE}
    v2 = {(1, 1): rat(1, 4), (1, 2): rat(1, 4), (2, 1): rat(1, 2), (2, 2): ONE}

    def fn(i, s):
        return (v1 if i == 0 else v2)[tuple(s)]

    return Instance(2, 2, GOOD, table_from_fn(2, 2, fn))


def test_single_crossing_counterexample():
    inst = single_crossing_counterexample()
    assert not is_single_crossing(inst, rat(2))
    # yet no 2-deterministic conflict pair: the greedy rule succeeds
    assert optimal_ratios(inst).det <= 2
    x = zap(inst, rat(2))
    assert is_truthful(x, orderings_from_instance(inst))


def test_single_crossing_identical_values():
    inst = Instance(2, 2, GOOD, table_from_fn(2, 2, lambda i, s: rat(s[0] + s[1])))
    for a in (ONE, rat(3, 2), rat(7)):
        assert is_single_crossing(inst, a)


def test_single_crossing_requires_monotone(fig5):
    def fn(i, s):
        return rat(3 - s[0]) if i == 0 else rat(1)

    inst = Instance(2, 2, GOOD, table_from_fn(2, 2, fn))
    with pytest.raises(NotMonotone):
        is_single_crossing(inst, rat(2))


def test_single_crossing_implies_det_bound():
    # monotone + alpha-single-crossing ==> deterministic ratio <= alpha
    rng = random.Random("sc-implication")
    found = 0
    for trial in range(60):
        k = rng.choice([2, 3])
        w = [[rat(rng.randint(0, 4)) for _ in range(2)] for _ in range(2)]
        b = [rat(rng.randint(1, 3)) for _ in range(2)]

        def fn(i, s):
            return b[i] + w[i][0] * s[0] + w[i][1] * s[1]

        inst = Instance(2, k, GOOD, table_from_fn(2, k, fn))
        for a in (ONE, rat(3, 2), rat(2), rat(3)):
            if is_single_crossing(inst, a):
                found += 1
                assert optimal_ratios(inst).det <= a
    assert found > 10


def test_duo_agrees_with_lp_random():
    for seed in range(25):
        rho = random_ratios(2, 3, seed)
        mode = GOOD if seed % 2 == 0 else CHORE
        inst = values_from_ratios(rho, mode)
        ord = orderings_from_instance(inst)
        opt = optimal_ratios(inst)
        assert solve_val(rho, ord).ratio == opt.value
        assert solve_cst(rho, ord).ratio == opt.cost
        assert solve_det_lp(rho, ord).ratio == opt.det
        assert ONE <= opt.value <= opt.cost <= opt.det


def test_solve_duo_reports(fig5):
    for objective, expect in (("value", rat(11, 8)), ("cost", rat(8, 5)), ("det", rat(2))):
        rep = solve_duo(fig5, objective)
        assert rep.ratio == expect
        assert rep.path == "duo"
        assert rep.certificate["source"] == [1, 2]


def test_zap_sap_outputs_truthful_random():
    for seed in range(20):
        rho = random_ratios(2, 4, seed, hi=12)
        inst = values_from_ratios(rho, GOOD)
        ord = orderings_from_instance(inst)
        opt = optimal_ratios(inst)
        for x, obj, bound in (
            (zap(inst, opt.det), "value", opt.det),
            (sap_v(inst, opt.value), "value", opt.value),
            (sap_c(inst, opt.cost), "cost", opt.cost),
        ):
            assert is_truthful(x, ord)
            assert eval_ratio(rho, x, obj) <= bound
