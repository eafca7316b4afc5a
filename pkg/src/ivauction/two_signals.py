"""Deterministic solver for binary signals via bipartite matching.

With k = 2 the deterministic gamma-feasibility question becomes: can every
profile pick an acceptable agent so that constrained picks extend along
their line?  Profiles where every acceptable agent is monotonicity-
constrained ("must-match") have to be paired, through such an agent, with
the adjacent profile of the line; all other profiles can stand alone.  The
pairing exists iff a bipartite matching (sides = parity of the signal sum)
covers every must-match vertex, and a binary search over candidate ratios
then yields the optimum.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from ._rat import ONE, Rat, fmt_rat
from .core import (
    AllocationRule,
    Instance,
    LineOrdering,
    Ratios,
    candidate_gammas,
    eval_ratio,
    orderings_from_instance,
    profile_vector,
    ratios_from_values,
    rule_from_winners,
)
from .errors import WrongArity
from .report import SolveReport


@dataclass(frozen=True)
class MatchGraph:
    """Bipartite feasibility graph for one candidate ratio.

    ``edges`` are (profile, profile, agent) full-line hyperedges that
    survived pruning; ``singleton_ok`` are profiles with an acceptable
    unconstrained agent; ``must_match`` is its complement.
    """

    n: int
    gamma: Rat
    singleton_ok: frozenset
    must_match: frozenset
    edges: tuple
    acceptable: tuple  # per profile: tuple of acceptable agents
    constrained: tuple  # per profile: tuple of constrained agents


def build_match_graph(rho: Ratios, ord: LineOrdering, gamma: Rat) -> MatchGraph:
    n, k = rho.n, rho.k
    if k != 2:
        raise WrongArity(f"matching path requires k = 2, got k = {k}")
    P = 2**n
    inv = ONE / gamma
    acceptable = [
        tuple(i for i in range(n) if rho.rho[i][p] >= inv) for p in range(P)
    ]
    constrained = [
        tuple(i for i in range(n) if ord.constrained(i, p)) for p in range(P)
    ]
    singleton_ok = frozenset(
        p
        for p in range(P)
        if any(i not in constrained[p] for i in acceptable[p])
    )
    must_match = frozenset(range(P)) - singleton_ok
    edges = []
    for i in range(n):
        step = 2**i
        for p in range(P):
            if (p // step) % 2 == 0:
                q = p + step
                if rho.rho[i][p] >= inv and rho.rho[i][q] >= inv:
                    if p in singleton_ok and q in singleton_ok:
                        continue
                    edges.append((p, q, i))
    g = MatchGraph(
        n,
        gamma,
        singleton_ok,
        must_match,
        tuple(edges),
        tuple(acceptable),
        tuple(constrained),
    )
    for p, q, _ in g.edges:  # each edge covers exactly one must-match vertex
        assert (p in must_match) != (q in must_match)
        assert _parity(p, n) != _parity(q, n)
    return g


def _parity(p: int, n: int) -> int:
    return bin(p).count("1") & 1  # signal sum parity == popcount parity


def hopcroft_karp(g: MatchGraph) -> dict:
    """Maximum-cardinality matching, returned as a profile -> profile map
    (both directions present)."""
    left = [p for p in range(2**g.n) if _parity(p, g.n) == 0]
    adj = {p: [] for p in left}
    for p, q, _ in g.edges:
        a, b = (p, q) if _parity(p, g.n) == 0 else (q, p)
        adj[a].append(b)
    INF = float("inf")
    match_l: dict = {}
    match_r: dict = {}
    dist: dict = {}

    def bfs() -> bool:
        queue = deque()
        for u in left:
            if u not in match_l:
                dist[u] = 0
                queue.append(u)
            else:
                dist[u] = INF
        found = False
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                w = match_r.get(v)
                if w is None:
                    found = True
                elif dist[w] == INF:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        return found

    def dfs(u) -> bool:
        for v in adj[u]:
            w = match_r.get(v)
            if w is None or (dist[w] == dist[u] + 1 and dfs(w)):
                match_l[u] = v
                match_r[v] = u
                return True
        dist[u] = INF
        return False

    while bfs():
        for u in left:
            if u not in match_l:
                dfs(u)
    pairing = {}
    for u, v in match_l.items():
        pairing[u] = v
        pairing[v] = u
    return pairing


def _extract_rule(g: MatchGraph, pairing: dict) -> AllocationRule:
    n = g.n
    P = 2**n
    edge_agent = {}
    for p, q, i in g.edges:
        edge_agent[(p, q)] = i
        edge_agent[(q, p)] = i
    winners = [None] * P
    for p in range(P):
        if p in pairing:
            winners[p] = edge_agent[(p, pairing[p])]
        else:
            assert p in g.singleton_ok
            free = [i for i in g.acceptable[p] if i not in g.constrained[p]]
            winners[p] = min(free)
    return rule_from_winners(winners, n, 2)


def feasible_at(rho: Ratios, ord: LineOrdering, gamma: Rat):
    """Deterministic gamma-feasibility; returns (ok, rule-or-None, graph,
    matching)."""
    g = build_match_graph(rho, ord, gamma)
    pairing = hopcroft_karp(g)
    size = len(pairing) // 2
    target = 2**rho.n - len(g.singleton_ok)
    if size < target:
        return False, None, g, pairing
    return True, _extract_rule(g, pairing), g, pairing


def solve_det_k2(inst: Instance) -> SolveReport:
    """Optimal deterministic ratio for k = 2 by binary search over the
    candidate grid, answering each query with a maximum matching."""
    rho = ratios_from_values(inst)
    ord = orderings_from_instance(inst)
    cands = candidate_gammas(rho)
    lo, hi = 0, len(cands) - 1
    best = None
    while lo <= hi:
        mid = (lo + hi) // 2
        ok, x, g, pairing = feasible_at(rho, ord, cands[mid])
        if ok:
            best = (cands[mid], x, g, pairing)
            hi = mid - 1
        else:
            lo = mid + 1
    assert best is not None  # a constant-winner rule is always feasible
    gamma, x, g, pairing = best
    ratio = eval_ratio(rho, x, "value")
    assert ratio == gamma
    edges = sorted(
        (min(p, q), max(p, q)) for p, q in pairing.items() if p < q
    )
    cert = {
        "type": "matching",
        "gamma": fmt_rat(gamma),
        "edges": [
            [list(profile_vector(p, inst.n, 2)), list(profile_vector(q, inst.n, 2))]
            for p, q in edges
        ],
        "must_match": [
            list(profile_vector(p, inst.n, 2)) for p in sorted(g.must_match)
        ],
    }
    return SolveReport("det", ratio, x, cert, path="binary")
