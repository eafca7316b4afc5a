import random

import pytest

from conftest import random_ratios, table_from_fn
from ivauction._rat import ZERO, rat
from ivauction.core import (
    CHORE,
    GOOD,
    Instance,
    line_bases,
    orderings_from_instance,
    profile_index,
    rule_from_winners,
    values_from_ratios,
)
from ivauction.errors import NotMonotone
from ivauction.payments import (
    PaymentRule,
    _tau_order,
    delta_allocation,
    synthesize_payments,
    verify_ic_ir,
)


def staircase_rule(n, k, seed):
    """Random truthful deterministic rule for strictly increasing values,
    n = 2: agent 0 wins iff s1 >= theta(s2), theta non-decreasing."""
    assert n == 2
    rng = random.Random(f"stair:{k}:{seed}")
    theta = sorted(rng.randint(1, k + 1) for _ in range(k))
    winners = []
    for p in range(k**n):
        s1 = p % k + 1
        s2 = (p // k) % k + 1
        winners.append(0 if s1 >= theta[s2 - 1] else 1)
    return rule_from_winners(winners, n, k)


def test_zero_allocation_zero_payment():
    inst = Instance(2, 2, GOOD, table_from_fn(2, 2, lambda i, s: rat(1 + s[i])))
    x = rule_from_winners([1] * 4, 2, 2)  # agent 0 never selected
    p = synthesize_payments(inst, x)
    assert all(v == 0 for v in p.p[0])
    assert verify_ic_ir(inst, x, p).ok


def test_argmax_two_signal_example():
    # v1 = own signal (1 or 2), v2 flat 3/2; argmax selects agent 0 iff s1 = 2
    def fn(i, s):
        return rat(s[0]) if i == 0 else rat(3, 2)

    inst = Instance(2, 2, GOOD, table_from_fn(2, 2, fn))
    winners = [0 if p % 2 + 1 == 2 else 1 for p in range(4)]
    x = rule_from_winners(winners, 2, 2)
    pay = synthesize_payments(inst, x)
    for s2 in (1, 2):
        assert pay.p[0][profile_index((2, s2), 2)] == 2
        assert pay.p[0][profile_index((1, s2), 2)] == 0
    assert verify_ic_ir(inst, x, pay).ok


def test_always_selected_pays_minimal_value():
    # agent 0 always wins a line with strictly increasing values:
    # payment equals the value at the tau-minimal signal, all along the line
    def fn(i, s):
        return rat(s[0] + 1) if i == 0 else rat(1, 3)

    inst = Instance(2, 3, GOOD, table_from_fn(2, 3, fn))
    x = rule_from_winners([0] * 9, 2, 3)
    pay = synthesize_payments(inst, x)
    for s1 in (1, 2, 3):
        for s2 in (1, 2, 3):
            assert pay.p[0][profile_index((s1, s2), 3)] == 2  # v1 at s1 = 1


def test_not_monotone_raises():
    def fn(i, s):
        return rat(s[0]) if i == 0 else rat(3, 2)

    inst = Instance(2, 2, GOOD, table_from_fn(2, 2, fn))
    x = rule_from_winners([0 if p % 2 == 0 else 1 for p in range(4)], 2, 2)
    with pytest.raises(NotMonotone):
        synthesize_payments(inst, x)


def test_second_price_style_manipulation_fails_ic(intro_good):
    # Naive second-price payments on the introduction example: the winner pays
    # the other bid.  Bob profits by reporting a low signal at s = (1, 2).
    inst = intro_good
    winners = []
    for p in range(4):
        winners.append(0 if inst.values(0, p) >= inst.values(1, p) else 1)
    x = rule_from_winners(winners, 2, 2)
    pay = [[ZERO] * 4 for _ in range(2)]
    for p in range(4):
        w = winners[p]
        pay[w][p] = inst.values(1 - w, p)
    rep = verify_ic_ir(inst, x, PaymentRule(2, 2, tuple(tuple(r) for r in pay)))
    assert not rep.ok
    kind, s_idx, agent, bid = rep.violation
    assert kind == "IC"
    # Bob (agent 1) deviates to the low signal at a profile with s2 = 2
    assert agent == 1
    assert (s_idx // 2) % 2 + 1 == 2 and bid == 1


def test_unpaid_chore_fails_ir(intro_chore):
    x = rule_from_winners([0] * 4, 2, 2)
    zero = PaymentRule(2, 2, ((ZERO,) * 4, (ZERO,) * 4))
    rep = verify_ic_ir(intro_chore, x, zero)
    assert not rep.ok and rep.violation[0] == "IR"


def test_delta_reconstruction_identity():
    for seed in range(10):
        for mode in (GOOD, CHORE):
            rho = random_ratios(2, 3, seed)
            inst = values_from_ratios(rho, mode)
            ord = orderings_from_instance(inst)
            x = staircase_rule(2, 3, seed)
            d = delta_allocation(inst, x)
            # x_i(s) equals the sum of deltas over the tau-prefix of s
            for i in range(2):
                step = 3**i
                for base in line_bases(i, 2, 3):
                    profs = {s: base + (s - 1) * step for s in range(1, 4)}
                    x_line = {s: x.x[i][profs[s]] for s in profs}
                    tau = _tau_order(x_line, ord.blocks[(i, base)])
                    acc = ZERO
                    for s in tau:
                        acc += d[i][profs[s]]
                        assert acc == x_line[s]


@pytest.mark.parametrize("mode", [GOOD, CHORE])
def test_synthesized_payments_pass_ic_ir_on_staircase_rules(mode):
    for seed in range(15):
        rho = random_ratios(2, 3, seed)
        inst = values_from_ratios(rho, mode)
        x = staircase_rule(2, 3, seed)
        pay = synthesize_payments(inst, x)
        assert verify_ic_ir(inst, x, pay).ok
