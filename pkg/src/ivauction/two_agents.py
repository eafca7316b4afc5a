"""Quasi-linear solver for two agents.

Monotonicity constraints of a two-agent instance reduce to a directed graph
over the k*k signal profiles (plus per-block dummy vertices): an edge u -> v
forces x_0(u) <= x_0(v), where x_0 is the first agent's selection
probability.  Condensing the graph and sweeping its components in
topological order yields, in near-linear time:

* closed forms for the three optimal ratios via conflict pairs,
* greedy constructions of optimal rules (ZaP for deterministic, SaP for the
  value and cost objectives),
* a 2-SAT feasibility check for deterministic target ratios.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ._rat import ONE, Rat, ZERO, fmt_rat
from .core import (
    GOOD,
    AllocationRule,
    Instance,
    Ratios,
    eval_ratio,
    is_monotone_instance,
    line_bases,
    orderings_from_instance,
    profile_vector,
    ratios_from_values,
    rule_from_winners,
)
from .errors import NotMonotone, PreconditionViolation, WrongArity
from .report import SolveReport

VALUE, COST, DET = "value", "cost", "det"


@dataclass(frozen=True)
class DirectedGraph:
    """Monotonicity graph: vertices 0..k*k-1 are profiles, the rest dummies."""

    k: int
    num_vertices: int
    adj: tuple


@dataclass(frozen=True)
class ConflictPair:
    source: tuple  # 1-based signal vector
    sink: tuple
    kind: str
    bound: Rat


@dataclass(frozen=True)
class CondensedDag:
    """SCC condensation of the monotonicity graph, topologically ordered."""

    k: int
    comps: tuple  # vertex ids per component
    comp_of: tuple
    succs: tuple
    preds: tuple
    # per-component minima over member profiles (dummies carry None)
    rho1_min: Optional[tuple] = None
    rho2_min: Optional[tuple] = None
    rho1_arg: Optional[tuple] = None
    rho2_arg: Optional[tuple] = None


@dataclass(frozen=True)
class OptimalRatios:
    value: Rat
    cost: Rat
    det: Rat
    pairs: dict  # kind -> ConflictPair or None


def conflict_function(u: Rat, v: Rat) -> Rat:
    """f(u, v) = (uv - 1)/(u + v - 2), with f(1, 1) = 1.

    Well defined when both arguments are in (0, 1] or both at least 1.
    """
    if u == 1 and v == 1:
        return ONE
    return (u * v - ONE) / (u + v - 2)


def _require_two_agents(inst_or_rho) -> None:
    if inst_or_rho.n != 2:
        raise WrongArity(f"two-agent path requires n = 2, got n = {inst_or_rho.n}")


def build_dg(inst: Instance) -> DirectedGraph:
    """Monotonicity graph with dummy vertices between adjacent blocks.

    Agent 0's blocks chain upward (x_0 grows with its value); agent 1's
    chain downward (x_0 = 1 - x_1 shrinks as agent 1's value grows).
    """
    _require_two_agents(inst)
    k = inst.k
    ord = orderings_from_instance(inst)
    adj = [[] for _ in range(k * k)]

    def fresh():
        adj.append([])
        return len(adj) - 1

    for agent in (0, 1):
        step = k**agent
        for base in line_bases(agent, 2, k):
            blks = ord.blocks[(agent, base)]
            for j in range(len(blks) - 1):
                d = fresh()
                lo = [base + (s - 1) * step for s in blks[j]]
                hi = [base + (s - 1) * step for s in blks[j + 1]]
                if agent == 0:
                    for p in lo:
                        adj[p].append(d)
                    for p in hi:
                        adj[d].append(p)
                else:
                    for p in hi:
                        adj[p].append(d)
                    for p in lo:
                        adj[d].append(p)
    return DirectedGraph(k, len(adj), tuple(tuple(a) for a in adj))


def _tarjan_sccs(adj) -> list:
    """SCCs in topological order (iterative Tarjan)."""
    n = len(adj)
    index = [0] * n
    low = [0] * n
    on_stack = [False] * n
    stack = []
    sccs = []
    counter = [1]

    for root in range(n):
        if index[root]:
            continue
        work = [(root, 0)]
        while work:
            v, pi = work[-1]
            if pi == 0:
                index[v] = low[v] = counter[0]
                counter[0] += 1
                stack.append(v)
                on_stack[v] = True
            recursed = False
            for i in range(pi, len(adj[v])):
                w = adj[v][i]
                if not index[w]:
                    work[-1] = (v, i + 1)
                    work.append((w, 0))
                    recursed = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if recursed:
                continue
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                sccs.append(comp)
            work.pop()
            if work:
                u, _ = work[-1]
                low[u] = min(low[u], low[v])
    sccs.reverse()
    return sccs


def condense(dg: DirectedGraph, rho: Optional[Ratios] = None) -> CondensedDag:
    """SCC condensation with topological numbering; when ratios are supplied,
    per-component minima of each agent's ratio (over real profiles)."""
    sccs = _tarjan_sccs(dg.adj)
    comp_of = [0] * dg.num_vertices
    for ci, comp in enumerate(sccs):
        for v in comp:
            comp_of[v] = ci
    m = len(sccs)
    succs = [set() for _ in range(m)]
    preds = [set() for _ in range(m)]
    for v in range(dg.num_vertices):
        cv = comp_of[v]
        for w in dg.adj[v]:
            cw = comp_of[w]
            if cv != cw:
                succs[cv].add(cw)
                preds[cw].add(cv)
    r1m = r2m = r1a = r2a = None
    if rho is not None:
        P = dg.k * dg.k
        r1m, r2m, r1a, r2a = [], [], [], []
        for comp in sccs:
            best1 = best2 = None
            arg1 = arg2 = None
            for v in comp:
                if v >= P:
                    continue
                if best1 is None or rho.rho[0][v] < best1:
                    best1, arg1 = rho.rho[0][v], v
                if best2 is None or rho.rho[1][v] < best2:
                    best2, arg2 = rho.rho[1][v], v
            r1m.append(best1)
            r2m.append(best2)
            r1a.append(arg1)
            r2a.append(arg2)
        r1m, r2m, r1a, r2a = tuple(r1m), tuple(r2m), tuple(r1a), tuple(r2a)
    return CondensedDag(
        dg.k,
        tuple(tuple(c) for c in sccs),
        tuple(comp_of),
        tuple(tuple(sorted(s)) for s in succs),
        tuple(tuple(sorted(p)) for p in preds),
        r1m,
        r2m,
        r1a,
        r2a,
    )


def reachable(dg: DirectedGraph, src: int, dst: int) -> bool:
    """Path src -> dst (profiles precede iff reachable and distinct, or in a
    common cycle)."""
    if src == dst:
        return True
    seen = [False] * dg.num_vertices
    seen[src] = True
    frontier = [src]
    while frontier:
        v = frontier.pop()
        for w in dg.adj[v]:
            if w == dst:
                return True
            if not seen[w]:
                seen[w] = True
                frontier.append(w)
    return False


def _prepare(inst: Instance):
    rho = ratios_from_values(inst)
    dg = build_dg(inst)
    cdag = condense(dg, rho)
    return rho, dg, cdag


def optimal_ratios(inst: Instance) -> OptimalRatios:
    """Exact optimal ratios for value, cost and deterministic objectives,
    with the extremal conflict pair certifying each bound above 1.

    Sweeps components in topological order, carrying the minimum of agent 1's
    ratio over each component and its ancestors; pairing that minimum with
    the component's own minimum of agent 0's ratio realizes the closed-form
    maxima.  A same-profile pairing is harmless: one of its two ratios is 1,
    so every bound degenerates to 1.
    """
    rho, dg, cdag = _prepare(inst)
    m = len(cdag.comps)
    dp = [None] * m  # min rho_2 over the component and its ancestors
    dp_arg = [None] * m
    best = {VALUE: None, COST: None, DET: None}
    for c in range(m):
        cur, arg = cdag.rho2_min[c], cdag.rho2_arg[c]
        for pred in cdag.preds[c]:
            if dp[pred] is not None and (cur is None or dp[pred] < cur):
                cur, arg = dp[pred], dp_arg[pred]
        dp[c], dp_arg[c] = cur, arg
        r1, snk = cdag.rho1_min[c], cdag.rho1_arg[c]
        if cur is None or r1 is None:
            continue
        cand = {
            VALUE: ONE / conflict_function(cur, r1),
            COST: conflict_function(ONE / cur, ONE / r1),
            DET: min(ONE / cur, ONE / r1),
        }
        for kind, bound in cand.items():
            if best[kind] is None or bound > best[kind][0]:
                best[kind] = (bound, arg, snk)
    out = {}
    pairs = {}
    for kind in (VALUE, COST, DET):
        if best[kind] is None or best[kind][0] <= 1:
            out[kind] = ONE
            pairs[kind] = None
        else:
            bound, src, snk = best[kind]
            out[kind] = bound
            pairs[kind] = ConflictPair(
                profile_vector(src, 2, inst.k),
                profile_vector(snk, 2, inst.k),
                kind,
                bound,
            )
    return OptimalRatios(out[VALUE], out[COST], out[DET], pairs)


def _check_precondition(inst: Instance, alpha: Rat, kind: str) -> OptimalRatios:
    opt = optimal_ratios(inst)
    got = {VALUE: opt.value, COST: opt.cost, DET: opt.det}[kind]
    if got > alpha:
        pair = opt.pairs[kind]
        raise PreconditionViolation(
            f"instance admits a {kind} conflict pair with bound "
            f"{fmt_rat(pair.bound)} > alpha = {fmt_rat(alpha)}",
            certificate=pair,
        )
    return opt


def zap(inst: Instance, alpha: Rat) -> AllocationRule:
    """Zero-as-Possible: deterministic rule of ratio <= alpha.

    Selects agent 0 on a component only when forced -- by a member profile
    where agent 1 is unacceptable, or by a selecting predecessor.
    """
    _check_precondition(inst, alpha, DET)
    rho, dg, cdag = _prepare(inst)
    inv = ONE / alpha
    P = inst.k * inst.k
    m = len(cdag.comps)
    take = [False] * m
    for c in range(m):
        forced = cdag.rho2_min[c] is not None and cdag.rho2_min[c] < inv
        forced = forced or any(take[p] for p in cdag.preds[c])
        take[c] = forced
        if forced and cdag.rho1_min[c] is not None and cdag.rho1_min[c] < inv:
            raise AssertionError("ZaP reached its ERROR line despite no conflict pair")
    winners = [0 if take[cdag.comp_of[p]] else 1 for p in range(P)]
    return rule_from_winners(winners, 2, inst.k)


def _sap(inst: Instance, alpha: Rat, kind: str) -> AllocationRule:
    """Shared Small-as-Possible sweep for the value and cost objectives.

    Each profile contributes an interval for the component's x_0; the
    component takes the smallest point of the intersection, floored by its
    predecessors.  Infinite endpoints stay None sentinels.
    """
    _check_precondition(inst, alpha, kind)
    rho, dg, cdag = _prepare(inst)
    P = inst.k * inst.k
    m = len(cdag.comps)
    xval = [ZERO] * m

    def lo_hi(p):
        r1, r2 = rho.rho[0][p], rho.rho[1][p]
        if kind == VALUE:
            # x*r1 + (1-x)*r2 >= 1/alpha
            lo = None if r2 == 1 else (ONE / alpha - r2) / (ONE - r2)
            hi = None if r1 == 1 else (ONE - ONE / alpha) / (ONE - r1)
        else:
            # x/r1 + (1-x)/r2 <= alpha
            lo = None if r2 == 1 else (ONE - alpha * r2) / (ONE - r2)
            hi = None if r1 == 1 else r1 * (alpha - ONE) / (ONE - r1)
        return lo, hi

    for c in range(m):
        lo = ZERO
        hi = ONE
        for p in cdag.preds[c]:
            lo = max(lo, xval[p])
        for v in cdag.comps[c]:
            if v >= P:
                continue
            plo, phi = lo_hi(v)
            if plo is not None:
                lo = max(lo, plo)
            if phi is not None:
                hi = min(hi, phi)
        if lo > hi:
            raise AssertionError("SaP reached its ERROR line despite no conflict pair")
        xval[c] = lo
    x0 = tuple(xval[cdag.comp_of[p]] for p in range(P))
    x1 = tuple(ONE - v for v in x0)
    return AllocationRule(2, inst.k, (x0, x1))


def sap_v(inst: Instance, alpha: Rat) -> AllocationRule:
    return _sap(inst, alpha, VALUE)


def sap_c(inst: Instance, alpha: Rat) -> AllocationRule:
    return _sap(inst, alpha, COST)


def twosat_feasible(inst: Instance, alpha: Rat):
    """Deterministic alpha-feasibility as 2-SAT over the monotonicity graph.

    Literal 2v is "agent 0 selected at v", 2v+1 its negation; graph edges
    become implications both ways, unacceptable ratios become unit clauses.
    Returns (satisfiable, rule-or-None) with the rule read off the profile
    vertices of a satisfying assignment.
    """
    _require_two_agents(inst)
    rho, dg, cdag = _prepare(inst)
    inv = ONE / alpha
    P = inst.k * inst.k
    nlits = 2 * dg.num_vertices
    adj = [[] for _ in range(nlits)]
    for v in range(dg.num_vertices):
        for w in dg.adj[v]:
            adj[2 * v].append(2 * w)
            adj[2 * w + 1].append(2 * v + 1)
    for p in range(P):
        if rho.rho[0][p] < inv:  # agent 0 unacceptable: force negation
            adj[2 * p].append(2 * p + 1)
        if rho.rho[1][p] < inv:  # agent 1 unacceptable: force selection
            adj[2 * p + 1].append(2 * p)
    sccs = _tarjan_sccs(adj)
    comp = [0] * nlits
    for ci, c in enumerate(sccs):
        for v in c:
            comp[v] = ci
    for v in range(dg.num_vertices):
        if comp[2 * v] == comp[2 * v + 1]:
            return False, None
    winners = [0 if comp[2 * p] > comp[2 * p + 1] else 1 for p in range(P)]
    return True, rule_from_winners(winners, 2, inst.k)


def is_single_crossing(inst: Instance, alpha: Rat) -> bool:
    """Does raising any agent's own signal change their value (cost) at
    least 1/alpha as fast as anyone else's?

    Requires a monotone instance; sufficient for an alpha-approximate
    deterministic rule when n = 2, but not necessary.
    """
    if not is_monotone_instance(inst):
        raise NotMonotone("single-crossing is defined for monotone instances only")
    n, k = inst.n, inst.k
    good = inst.mode == GOOD
    for i in range(n):
        step = k**i
        for base in line_bases(i, n, k):
            for s in range(k - 1):
                for t in range(s + 1, k):
                    p_lo = base + s * step
                    p_hi = base + t * step
                    own = (
                        inst.values(i, p_hi) - inst.values(i, p_lo)
                        if good
                        else inst.costs(i, p_hi) - inst.costs(i, p_lo)
                    )
                    for j in range(n):
                        if j == i:
                            continue
                        other = (
                            inst.values(j, p_hi) - inst.values(j, p_lo)
                            if good
                            else inst.costs(j, p_hi) - inst.costs(j, p_lo)
                        )
                        if good and alpha * own < other:
                            return False
                        if not good and alpha * own > other:
                            return False
    return True


def solve_duo(inst: Instance, objective: str) -> SolveReport:
    """One-call optimal solve along the two-agent fast path."""
    opt = optimal_ratios(inst)
    ratio = {VALUE: opt.value, COST: opt.cost, DET: opt.det}[objective]
    if objective == DET:
        x = zap(inst, ratio)
    elif objective == VALUE:
        x = sap_v(inst, ratio)
    else:
        x = sap_c(inst, ratio)
    rho = ratios_from_values(inst)
    got = eval_ratio(rho, x, VALUE if objective == VALUE else COST)
    assert got == ratio
    pair = opt.pairs[objective]
    if pair is None:
        cert = {"type": "conflict_pair", "pair": None}
    else:
        cert = {
            "type": "conflict_pair",
            "source": list(pair.source),
            "sink": list(pair.sink),
            "kind": pair.kind,
            "bound": fmt_rat(pair.bound),
        }
    return SolveReport(objective, ratio, x, cert, path="duo")
