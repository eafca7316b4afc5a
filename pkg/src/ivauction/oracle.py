"""Brute-force ground truth and report verification.

Two independent deterministic solvers live here so every fast path has a
second opinion: exhaustive winner enumeration with monotonicity pruning,
and a propagation-based backtracking search over per-profile winner
choices.  Neither shares code with the LP, graph, or matching paths.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ._rat import ONE, Rat, fmt_rat, parse_rat
from .core import (
    AllocationRule,
    Instance,
    eval_ratio,
    is_truthful,
    orderings_from_instance,
    profile_index,
    ratios_from_values,
    rule_from_winners,
)
from .errors import PropagationTimeout, TooLarge
from .report import SolveReport


def brute_force_det(inst: Instance, size_cap: int = 10**7, backtracking: bool = False):
    """Exact minimum ratio over all monotone deterministic rules.

    Depth-first enumeration of winners in canonical profile order, pruning
    both monotonicity conflicts with already-placed winners and branches
    whose partial worst ratio already matches the incumbent.  Returns
    (ratio, rule).  Refuses spaces beyond ``size_cap`` unless the caller
    opts into open-ended backtracking.
    """
    n, k = inst.n, inst.k
    P = inst.num_profiles
    if n**P > size_cap and not backtracking:
        raise TooLarge(
            f"{n}**{P} deterministic rules exceed the cap {size_cap}; "
            "pass backtracking=True to search anyway"
        )
    rho = ratios_from_values(inst)
    ord = orderings_from_instance(inst)
    block_of = ord.block_of
    # per profile: agents sorted by descending ratio so good incumbents come early
    choice_order = [
        sorted(range(n), key=lambda i: (-rho.rho[i][p], i)) for p in range(P)
    ]
    inv_rho = [[ONE / rho.rho[i][p] for p in range(P)] for i in range(n)]
    lines = [
        [
            [q for q in _line(p, j, n, k) if q != p]
            for j in range(n)
        ]
        for p in range(P)
    ]
    winners = [None] * P
    best: list = [None, None]  # ratio, winners

    def consistent(p: int, i: int) -> bool:
        for j in range(n):
            bj = block_of[j]
            for q in lines[p][j]:
                w = winners[q]
                if w is None:
                    continue
                if w == j and j != i and bj[q] < bj[p]:
                    return False
                if i == j and w != j and bj[p] < bj[q]:
                    return False
        return True

    def dfs(p: int, worst: Rat) -> None:
        if best[0] is not None and worst >= best[0]:
            return
        if p == P:
            best[0] = worst
            best[1] = list(winners)
            return
        for i in choice_order[p]:
            cand = inv_rho[i][p]
            cur = worst if worst >= cand else cand
            if best[0] is not None and cur >= best[0]:
                continue
            if not consistent(p, i):
                continue
            winners[p] = i
            dfs(p + 1, cur)
            winners[p] = None

    dfs(0, ONE)
    assert best[0] is not None
    return best[0], rule_from_winners(best[1], n, k)


def _line(p: int, agent: int, n: int, k: int) -> list:
    step = k**agent
    base = p - ((p // step) % k) * step
    return [base + t * step for t in range(k)]


class _Propagator:
    """Winner-choice CSP over profiles with trail-based undo.

    Selecting agent j at a profile forces j upward along j's line; ruling j
    out anywhere rules it out downward.  These two rules are exactly the
    monotonicity clauses, so propagation to a fixpoint plus exhaustive
    branching is sound and complete for deterministic gamma-feasibility.
    """

    def __init__(self, inst: Instance, gamma: Rat, pins: Optional[dict] = None):
        n, k = inst.n, inst.k
        self.n, self.k = n, k
        self.P = inst.num_profiles
        rho = ratios_from_values(inst)
        block_of = orderings_from_instance(inst).block_of
        inv = ONE / gamma
        self.domains = []
        self.contradiction = False
        for p in range(self.P):
            dom = {i for i in range(n) if rho.rho[i][p] >= inv}
            if pins and p in pins:
                dom &= {pins[p]}
            if not dom:
                self.contradiction = True
            self.domains.append(dom)
        self.above = [
            [
                tuple(
                    q
                    for q in _line(p, j, n, k)
                    if block_of[j][q] > block_of[j][p]
                )
                for j in range(n)
            ]
            for p in range(self.P)
        ]
        self.below = [
            [
                tuple(
                    q
                    for q in _line(p, j, n, k)
                    if block_of[j][q] < block_of[j][p]
                )
                for j in range(n)
            ]
            for p in range(self.P)
        ]
        self.trail = []  # (profile, removed agent)

    def _remove(self, p: int, j: int, dirty) -> bool:
        dom = self.domains[p]
        if j not in dom:
            return True
        dom.discard(j)
        self.trail.append((p, j))
        if not dom:
            return False
        dirty.append(p)
        return True

    def propagate(self, dirty) -> bool:
        """Run removals to a fixpoint; False on an emptied domain."""
        while dirty:
            p = dirty.pop()
            dom = self.domains[p]
            if not dom:
                return False
            if len(dom) == 1:
                (j,) = dom
                for q in self.above[p][j]:
                    qdom = self.domains[q]
                    if j not in qdom:
                        return False
                    for other in [a for a in qdom if a != j]:
                        if not self._remove(q, other, dirty):
                            return False
            for j in range(self.n):
                if j in dom:
                    continue
                for q in self.below[p][j]:
                    if not self._remove(q, j, dirty):
                        return False
        return True

    def rewind(self, mark: int) -> None:
        while len(self.trail) > mark:
            p, j = self.trail.pop()
            self.domains[p].add(j)

    def fixpoint(self) -> bool:
        return not self.contradiction and self.propagate(list(range(self.P)))

    def search(self, max_nodes: int):
        """Iterative DFS over undecided profiles; None when exhausted."""
        if not self.fixpoint():
            return None
        nodes = 0
        stack = []  # (profile, remaining values, trail mark)

        def pick():
            best = None
            for p in range(self.P):
                size = len(self.domains[p])
                if size > 1 and (best is None or size < len(self.domains[best])):
                    best = p
                    if size == 2:
                        break
            return best

        target = pick()
        if target is None:
            return [next(iter(d)) for d in self.domains]
        stack.append((target, sorted(self.domains[target], reverse=True), len(self.trail)))
        while stack:
            nodes += 1
            if nodes > max_nodes:
                raise PropagationTimeout(f"budget of {max_nodes} nodes exhausted")
            p, values, mark = stack[-1]
            if not values:
                stack.pop()
                self.rewind(mark)
                continue
            j = values.pop(0)
            self.rewind(mark)
            dirty = []
            ok = True
            for other in [a for a in self.domains[p] if a != j]:
                if not self._remove(p, other, dirty):
                    ok = False
                    break
            if ok and self.propagate(dirty):
                target = pick()
                if target is None:
                    return [next(iter(d)) for d in self.domains]
                stack.append(
                    (target, sorted(self.domains[target], reverse=True), len(self.trail))
                )
        return None


def propagation_fixpoint(inst: Instance, gamma: Rat, pins: Optional[dict] = None):
    """Domains after unit propagation only (no search); None on contradiction.

    Exposes exactly which selections are forced by a set of pins, which the
    adversarial generators use to enumerate forcing single-entry edits.
    """
    prop = _Propagator(inst, gamma, pins)
    if not prop.fixpoint():
        return None
    return [frozenset(d) for d in prop.domains]


def propagate_feasible(
    inst: Instance,
    gamma: Rat,
    pins: Optional[dict] = None,
    max_nodes: int = 200_000,
):
    """Deterministic gamma-feasibility by unit propagation plus backtracking.

    ``pins`` maps profile index -> forced winner.  Sound and complete;
    raises PropagationTimeout when the node budget runs out (no verdict).
    Returns (feasible, rule-or-None).
    """
    prop = _Propagator(inst, gamma, pins)
    winners = prop.search(max_nodes)
    if winners is None:
        return False, None
    return True, rule_from_winners(winners, prop.n, prop.k)


def solve_det_search(inst: Instance, max_nodes: int = 200_000) -> SolveReport:
    """Optimal deterministic ratio via binary search over candidates,
    answering queries with the propagation engine."""
    from .core import candidate_gammas

    rho = ratios_from_values(inst)
    cands = candidate_gammas(rho)
    lo, hi = 0, len(cands) - 1
    best = None
    while lo <= hi:
        mid = (lo + hi) // 2
        ok, x = propagate_feasible(inst, cands[mid], max_nodes=max_nodes)
        if ok:
            best = (cands[mid], x)
            hi = mid - 1
        else:
            lo = mid + 1
    assert best is not None
    gamma, x = best
    ratio = eval_ratio(rho, x, "value")
    assert ratio == gamma
    return SolveReport("det", ratio, x, {"type": "exhaustive"}, path="propagate")


@dataclass
class VerifyResult:
    ok: bool
    reasons: list = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def verify_report(inst: Instance, report: SolveReport) -> VerifyResult:
    """Re-derive everything a report claims: witness feasibility and
    truthfulness, exact ratio, and certificate validity."""
    reasons = []
    x = report.allocation
    rho = ratios_from_values(inst)
    ord = orderings_from_instance(inst)
    if (x.n, x.k) != (inst.n, inst.k):
        return VerifyResult(False, ["dimension-mismatch"])
    check = is_truthful(x, ord)
    if not check:
        reasons.append(f"not-truthful: violation {check.violation}")
    if report.objective == "det":
        if not x.deterministic:
            reasons.append("witness-not-deterministic")
        else:
            got = eval_ratio(rho, x, "value")
            if got != report.ratio:
                reasons.append(f"ratio-mismatch: {got} != {report.ratio}")
    else:
        got = eval_ratio(rho, x, report.objective)
        if got != report.ratio:
            reasons.append(f"ratio-mismatch: {got} != {report.ratio}")
    reasons.extend(_verify_certificate(inst, rho, report))
    return VerifyResult(not reasons, reasons)


def _verify_certificate(inst, rho, report) -> list:
    cert = report.certificate or {}
    kind = cert.get("type")
    if kind == "conflict_pair":
        return _verify_conflict_pair(inst, rho, report, cert)
    if kind == "matching":
        return _verify_matching(inst, rho, report, cert)
    if kind == "lp_basis":
        out = []
        if "objective_value" in cert:
            beta = parse_rat(cert["objective_value"])
            expect = ONE / beta if report.objective == "value" else beta
            if expect != report.ratio:
                out.append("certificate-objective-mismatch")
        return out
    if kind in (None, "exhaustive"):
        return []
    return [f"unknown-certificate-type: {kind}"]


def _verify_conflict_pair(inst, rho, report, cert) -> list:
    from .two_agents import build_dg, conflict_function, reachable

    if cert.get("pair", "present") is None:
        return [] if report.ratio == 1 else ["missing-pair-for-nontrivial-ratio"]
    src = profile_index(cert["source"], inst.k)
    snk = profile_index(cert["sink"], inst.k)
    out = []
    dg = build_dg(inst)
    if src == snk or not reachable(dg, src, snk):
        out.append("pair-not-reachable")
    r2 = rho.rho[1][src]
    r1 = rho.rho[0][snk]
    bound = {
        "value": ONE / conflict_function(r2, r1),
        "cost": conflict_function(ONE / r2, ONE / r1),
        "det": min(ONE / r2, ONE / r1),
    }[cert["kind"]]
    if bound != parse_rat(cert["bound"]) or bound != report.ratio:
        out.append("pair-bound-mismatch")
    return out


def _verify_matching(inst, rho, report, cert) -> list:
    from .core import profile_vector
    from .two_signals import build_match_graph

    ord = orderings_from_instance(inst)
    g = build_match_graph(rho, ord, parse_rat(cert["gamma"]))
    graph_edges = {frozenset((p, q)) for p, q, _ in g.edges}
    out = []
    used = set()
    for a, b in cert["edges"]:
        pa, pb = profile_index(a, inst.k), profile_index(b, inst.k)
        if frozenset((pa, pb)) not in graph_edges:
            out.append(f"edge-not-in-graph: {a}-{b}")
        if pa in used or pb in used:
            out.append(f"vertices-reused: {a}-{b}")
        used.update((pa, pb))
    target = 2**inst.n - len(g.singleton_ok)
    if len(cert["edges"]) != target:
        out.append("matching-size-mismatch")
    expect = {tuple(profile_vector(p, inst.n, 2)) for p in g.must_match}
    if set(map(tuple, cert.get("must_match", []))) != expect:
        out.append("must-match-set-mismatch")
    return out
