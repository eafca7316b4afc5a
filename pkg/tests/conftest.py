import random

import pytest

from ivauction._rat import ONE, rat
from ivauction.core import CHORE, GOOD, AllocationRule, Instance, Ratios, profile_index
from ivauction.generators import gen_fig5_pair


def random_ratios(n, k, seed, lo=1, hi=24):
    """Random Ratios: sample positive rationals, normalize per profile."""
    rng = random.Random(f"ratios:{n}:{k}:{seed}")
    raw = [[rat(rng.randint(lo, hi), rng.randint(1, 4)) for _ in range(k**n)] for _ in range(n)]
    rho = [[None] * (k**n) for _ in range(n)]
    for p in range(k**n):
        best = max(raw[i][p] for i in range(n))
        for i in range(n):
            rho[i][p] = raw[i][p] / best
    return Ratios(n, k, tuple(tuple(r) for r in rho))


def random_rule(n, k, seed):
    """Random feasible allocation: rational simplex sample per profile."""
    rng = random.Random(f"rule:{n}:{k}:{seed}")
    x = [[None] * (k**n) for _ in range(n)]
    for p in range(k**n):
        weights = [rat(rng.randint(0, 8)) for _ in range(n)]
        total = sum(weights)
        if total == 0:
            weights[rng.randrange(n)] = ONE
            total = ONE
        for i in range(n):
            x[i][p] = weights[i] / total
    return AllocationRule(n, k, tuple(tuple(r) for r in x))


def table_from_fn(n, k, fn):
    """Build an n-agent table from fn(agent, signal vector) -> rational."""
    from ivauction.core import profile_vector

    rows = []
    for i in range(n):
        rows.append(tuple(fn(i, profile_vector(p, n, k)) for p in range(k**n)))
    return tuple(rows)


@pytest.fixture(scope="session")
def fig5():
    return gen_fig5_pair()


@pytest.fixture(scope="session")
def intro_good():
    # Alice values the house at 1 + 99*(s2 - 1), Bob at a flat 10.
    def v(i, s):
        return rat(1 + 99 * (s[1] - 1)) if i == 0 else rat(10)

    return Instance(2, 2, GOOD, table_from_fn(2, 2, v))


@pytest.fixture(scope="session")
def intro_chore():
    # Alice renovates at cost 1 + 99*(2 - s2), Bob rebuilds at a flat 10.
    def c(i, s):
        return rat(1 + 99 * (2 - s[1])) if i == 0 else rat(10)

    return Instance(2, 2, CHORE, table_from_fn(2, 2, c))


FIG3_RHO = {
    (1, 1, 1): ("4/5", "1", "1/5"),
    (2, 1, 1): ("7/10", "1", "9/10"),
    (1, 2, 1): ("1/2", "2/5", "1"),
    (1, 1, 2): ("1", "9/10", "3/10"),
    (2, 2, 1): ("7/10", "1", "1"),
    (2, 1, 2): ("1/5", "1", "1/10"),
    (1, 2, 2): ("7/10", "3/5", "1"),
    (2, 2, 2): ("1", "3/5", "1/5"),
}


@pytest.fixture(scope="session")
def fig3_ratios():
    from ivauction.core import Ratios

    n, k = 3, 2
    rho = [[None] * (k**n) for _ in range(n)]
    for s, row in FIG3_RHO.items():
        p = profile_index(s, k)
        for i in range(n):
            rho[i][p] = rat(row[i])
    return Ratios(n, k, tuple(tuple(r) for r in rho))
