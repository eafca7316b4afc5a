"""Exact rational linear programming: two-phase simplex with Bland's rule,
encodings of the truthful polytope, and the integral-LP deterministic path.

All variables are implicitly non-negative.  Coefficients, right-hand sides
and solutions are exact rationals throughout; a returned optimal point is a
basic feasible solution, hence a vertex of the feasible region.  Bland's
pivoting rule makes termination unconditional at the price of speed, which
is acceptable at the instance sizes this package targets.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from ._rat import ONE, Rat, ZERO, fmt_rat, is_integral, rat
from .core import (
    AllocationRule,
    LineOrdering,
    Ratios,
    candidate_gammas,
    eval_ratio,
    line_bases,
)
from .errors import IntegralityNotGuaranteed, NotFeasible
from .report import SolveReport

LE, EQ, GE = "<=", "=", ">="


@dataclass
class RationalLP:
    """min/max c.x subject to rows (a, rel, b), x >= 0, everything rational."""

    num_vars: int
    rows: list  # [(coeffs, rel, rhs)]
    objective: tuple  # (sense, coeffs); sense in {"min", "max"}
    var_names: Optional[list] = None

    def validate(self) -> None:
        sense, c = self.objective
        if sense not in ("min", "max"):
            raise ValueError(f"bad objective sense {sense!r}")
        if len(c) != self.num_vars:
            raise ValueError("objective length != num_vars")
        for coeffs, rel, _ in self.rows:
            if len(coeffs) != self.num_vars:
                raise ValueError("row length != num_vars")
            if rel not in (LE, EQ, GE):
                raise ValueError(f"bad relation {rel!r}")


@dataclass
class LPSolution:
    status: str  # "optimal" | "infeasible" | "unbounded"
    objective_value: Optional[Rat] = None
    point: Optional[tuple] = None
    basis: Optional[tuple] = None  # standard-form column indices


def _pivot(rows, basis, r, c):
    piv = rows[r][c]
    if piv != 1:
        inv = ONE / piv
        rows[r] = [v * inv for v in rows[r]]
    prow = rows[r]
    for i in range(len(rows)):
        if i == r:
            continue
        f = rows[i][c]
        if f != 0:
            row = rows[i]
            rows[i] = [a - f * b for a, b in zip(row, prow)]
    basis[r] = c


def _bland_min(rows, cost, basis):
    """Run simplex to optimality on min problem; cost is the reduced-cost row
    (last entry = -objective).  Returns "optimal" or "unbounded"."""
    m = len(rows)
    width = len(cost) - 1
    while True:
        enter = -1
        for j in range(width):
            if cost[j] < 0:
                enter = j
                break
        if enter < 0:
            return "optimal"
        leave = -1
        best = None
        for i in range(m):
            a = rows[i][enter]
            if a > 0:
                ratio = rows[i][-1] / a
                if best is None or ratio < best or (
                    ratio == best and basis[i] < basis[leave]
                ):
                    best = ratio
                    leave = i
        if leave < 0:
            return "unbounded"
        _pivot(rows, basis, leave, enter)
        f = cost[enter]
        if f != 0:
            prow = rows[leave]
            for j in range(len(cost)):
                cost[j] -= f * prow[j]


def simplex_solve(lp: RationalLP) -> LPSolution:
    """Exact two-phase simplex.  Infeasible/unbounded are statuses, not errors."""
    lp.validate()
    n = lp.num_vars
    sense, obj = lp.objective

    # Standard form: rhs >= 0, then slack / surplus+artificial / artificial.
    norm = []
    for coeffs, rel, rhs in lp.rows:
        if rhs < 0:
            coeffs = [-v for v in coeffs]
            rhs = -rhs
            rel = {LE: GE, GE: LE, EQ: EQ}[rel]
        norm.append((list(coeffs), rel, rhs))

    m = len(norm)
    n_slack = sum(1 for _, rel, _ in norm if rel in (LE, GE))
    n_art = sum(1 for _, rel, _ in norm if rel in (GE, EQ))
    width = n + n_slack + n_art
    art_cols = []
    rows = []
    basis = []
    s_at = n
    a_at = n + n_slack
    for coeffs, rel, rhs in norm:
        row = coeffs + [ZERO] * (n_slack + n_art) + [rhs]
        if rel == LE:
            row[s_at] = ONE
            basis.append(s_at)
            s_at += 1
        elif rel == GE:
            row[s_at] = -ONE
            s_at += 1
            row[a_at] = ONE
            basis.append(a_at)
            art_cols.append(a_at)
            a_at += 1
        else:
            row[a_at] = ONE
            basis.append(a_at)
            art_cols.append(a_at)
            a_at += 1
        rows.append(row)

    art_set = set(art_cols)
    if art_cols:
        # phase 1: minimize the sum of artificials
        cost = [ZERO] * (width + 1)
        for j in art_cols:
            cost[j] = ONE
        for i, bv in enumerate(basis):
            if bv in art_set:
                cost = [a - b for a, b in zip(cost, rows[i])]
        status = _bland_min(rows, cost, basis)
        assert status == "optimal"  # phase 1 is bounded below by zero
        if -cost[-1] != 0:
            return LPSolution(status="infeasible")
        # drive remaining artificials out of the basis
        drop = []
        for i in range(m):
            if basis[i] in art_set:
                enter = next(
                    (
                        j
                        for j in range(n + n_slack)
                        if rows[i][j] != 0
                    ),
                    -1,
                )
                if enter < 0:
                    drop.append(i)  # redundant row
                else:
                    _pivot(rows, basis, i, enter)
        for i in reversed(drop):
            del rows[i]
            del basis[i]
        m = len(rows)
        # artificial columns are the trailing block and none is basic now;
        # delete them so they can never re-enter
        width = n + n_slack
        rows = [row[:width] + [row[-1]] for row in rows]
        assert all(bv < width for bv in basis)

    # phase 2 on the original objective (maximization negated)
    c_full = [ZERO] * (width + 1)
    for j, v in enumerate(obj):
        c_full[j] = -v if sense == "max" else Rat(v)
    cost = list(c_full)
    for i, bv in enumerate(basis):
        f = c_full[bv]
        if f != 0:
            cost = [a - f * b for a, b in zip(cost, rows[i])]

    status = _bland_min(rows, cost, basis)
    if status == "unbounded":
        return LPSolution(status="unbounded")

    full = [ZERO] * width
    for i, bv in enumerate(basis):
        full[bv] = rows[i][-1]
    value = sum(obj[j] * full[j] for j in range(n))
    for coeffs, rel, rhs in lp.rows:  # zero-residual exactness guarantee
        lhs = sum(c * v for c, v in zip(coeffs, full[:n]) if c != 0)
        ok = lhs <= rhs if rel == LE else lhs >= rhs if rel == GE else lhs == rhs
        assert ok, "internal simplex error: optimal point violates a row"
    return LPSolution(
        status="optimal",
        objective_value=value,
        point=tuple(full[:n]),
        basis=tuple(sorted(basis)),
    )


# ---------------------------------------------------------------------------
# Truthful-polytope encodings


def var_index(agent: int, p: int, num_profiles: int) -> int:
    return agent * num_profiles + p


def truthful_region(ord: LineOrdering) -> tuple[int, list]:
    """Rows of the truthful polytope over variables x[agent][profile].

    One equality per profile (probabilities sum to one) and one <= row per
    pair of signals in adjacent blocks of every line; adjacent pairs imply
    the rest by transitivity.  Variables are non-negative implicitly.
    """
    n, k = ord.n, ord.k
    P = k**n
    nv = n * P
    rows = []
    for p in range(P):
        coeffs = [ZERO] * nv
        for i in range(n):
            coeffs[var_index(i, p, P)] = ONE
        rows.append((coeffs, EQ, ONE))
    for i in range(n):
        step = k**i
        for base in line_bases(i, n, k):
            blks = ord.blocks[(i, base)]
            for j in range(len(blks) - 1):
                for s in blks[j]:
                    for t in blks[j + 1]:
                        coeffs = [ZERO] * nv
                        coeffs[var_index(i, base + (s - 1) * step, P)] = ONE
                        coeffs[var_index(i, base + (t - 1) * step, P)] = -ONE
                        rows.append((coeffs, LE, ZERO))
    return nv, rows


def _allocation_from_point(point, n: int, P: int, k: int) -> AllocationRule:
    x = tuple(
        tuple(point[var_index(i, p, P)] for p in range(P)) for i in range(n)
    )
    return AllocationRule(n, k, x)


def solve_val(rho: Ratios, ord: LineOrdering) -> SolveReport:
    """Optimal randomized value ratio: maximize the worst expected ratio b
    subject to b <= <x(s), rho(s)> on every profile; the ratio is 1/b*."""
    n, k, P = rho.n, rho.k, rho.num_profiles
    nv, rows = truthful_region(ord)
    b_var = nv
    ext = [(coeffs + [ZERO], rel, rhs) for coeffs, rel, rhs in rows]
    for p in range(P):
        coeffs = [ZERO] * (nv + 1)
        for i in range(n):
            coeffs[var_index(i, p, P)] = -rho.rho[i][p]
        coeffs[b_var] = ONE
        ext.append((coeffs, LE, ZERO))
    obj = [ZERO] * (nv + 1)
    obj[b_var] = ONE
    sol = simplex_solve(RationalLP(nv + 1, ext, ("max", obj)))
    assert sol.status == "optimal"
    x = _allocation_from_point(sol.point, n, P, k)
    ratio = ONE / sol.objective_value
    assert eval_ratio(rho, x, "value") == ratio
    cert = {
        "type": "lp_basis",
        "basis": list(sol.basis),
        "objective_value": fmt_rat(sol.objective_value),
    }
    return SolveReport("value", ratio, x, cert, path="lp")


def solve_cst(rho: Ratios, ord: LineOrdering) -> SolveReport:
    """Optimal randomized cost ratio: minimize a subject to
    <x(s), 1/rho(s)> <= a on every profile."""
    n, k, P = rho.n, rho.k, rho.num_profiles
    nv, rows = truthful_region(ord)
    a_var = nv
    ext = [(coeffs + [ZERO], rel, rhs) for coeffs, rel, rhs in rows]
    for p in range(P):
        coeffs = [ZERO] * (nv + 1)
        for i in range(n):
            coeffs[var_index(i, p, P)] = ONE / rho.rho[i][p]
        coeffs[a_var] = -ONE
        ext.append((coeffs, LE, ZERO))
    obj = [ZERO] * (nv + 1)
    obj[a_var] = ONE
    sol = simplex_solve(RationalLP(nv + 1, ext, ("min", obj)))
    assert sol.status == "optimal"
    x = _allocation_from_point(sol.point, n, P, k)
    ratio = sol.objective_value
    assert eval_ratio(rho, x, "cost") == ratio
    cert = {
        "type": "lp_basis",
        "basis": list(sol.basis),
        "objective_value": fmt_rat(sol.objective_value),
    }
    return SolveReport("cost", ratio, x, cert, path="lp")


def solve_det_integral(rho: Ratios, ord: LineOrdering, gamma: Rat):
    """Feasibility of a deterministic gamma-approximate truthful rule via the
    integral-vertex LP: maximize the total weight of acceptable selections.

    Only valid where the truthful polytope is integral (n = 2 or k = 2);
    the optimum equals k**n iff a rule exists, and the optimal vertex is
    that rule.  Returns (feasible, rule-or-None).
    """
    n, k, P = rho.n, rho.k, rho.num_profiles
    if n >= 3 and k >= 3:
        raise IntegralityNotGuaranteed(
            f"integral-LP path needs n = 2 or k = 2, got n = {n}, k = {k}"
        )
    nv, rows = truthful_region(ord)
    inv_gamma = ONE / gamma
    obj = [ZERO] * nv
    for i in range(n):
        for p in range(P):
            if rho.rho[i][p] >= inv_gamma:
                obj[var_index(i, p, P)] = ONE
    sol = simplex_solve(RationalLP(nv, rows, ("max", obj)))
    assert sol.status == "optimal"
    if not all(is_integral(v) for v in sol.point):
        raise AssertionError(
            "non-integral vertex in the guaranteed-integrality regime"
        )
    if sol.objective_value != P:
        return False, None
    return True, _allocation_from_point(sol.point, n, P, k)


def solve_det_lp(rho: Ratios, ord: LineOrdering) -> SolveReport:
    """Optimal deterministic ratio by binary search over candidate ratios,
    answering each feasibility query with the integral LP."""
    cands = candidate_gammas(rho)
    lo, hi = 0, len(cands) - 1
    best = None
    while lo <= hi:
        mid = (lo + hi) // 2
        ok, x = solve_det_integral(rho, ord, cands[mid])
        if ok:
            best = (cands[mid], x)
            hi = mid - 1
        else:
            lo = mid + 1
    assert best is not None  # selecting a fixed agent is always feasible
    gamma, x = best
    ratio = eval_ratio(rho, x, "value")
    assert ratio == eval_ratio(rho, x, "cost") == gamma
    cert = {"type": "lp_basis", "gamma": fmt_rat(gamma)}
    return SolveReport("det", ratio, x, cert, path="lp")


def verify_vertex(num_vars: int, rows, point) -> bool:
    """Is a feasible point a vertex of {rows, x >= 0}?

    True iff the normals of the constraints active at the point span the
    full variable space (rank computed by rational Gaussian elimination).
    Raises NotFeasible when the point violates the region.
    """
    if len(point) != num_vars:
        raise ValueError("point length != num_vars")
    active = []
    for coeffs, rel, rhs in rows:
        lhs = sum(c * v for c, v in zip(coeffs, point) if c != 0)
        if rel == EQ:
            if lhs != rhs:
                raise NotFeasible(f"equality row violated: {lhs} != {rhs}")
            active.append(coeffs)
        elif rel == LE:
            if lhs > rhs:
                raise NotFeasible(f"<= row violated: {lhs} > {rhs}")
            if lhs == rhs:
                active.append(coeffs)
        else:
            if lhs < rhs:
                raise NotFeasible(f">= row violated: {lhs} < {rhs}")
            if lhs == rhs:
                active.append(coeffs)
    for j, v in enumerate(point):
        if v < 0:
            raise NotFeasible(f"negative coordinate {j}")
        if v == 0:
            bound = [ZERO] * num_vars
            bound[j] = ONE
            active.append(bound)
    return _rank(active) == num_vars


def _rank(vectors) -> int:
    mat = [list(v) for v in vectors]
    rank = 0
    cols = len(mat[0]) if mat else 0
    for col in range(cols):
        piv = next((i for i in range(rank, len(mat)) if mat[i][col] != 0), -1)
        if piv < 0:
            continue
        mat[rank], mat[piv] = mat[piv], mat[rank]
        prow = mat[rank]
        inv = ONE / prow[col]
        mat[rank] = prow = [v * inv for v in prow]
        for i in range(len(mat)):
            if i != rank and mat[i][col] != 0:
                f = mat[i][col]
                mat[i] = [a - f * b for a, b in zip(mat[i], prow)]
        rank += 1
        if rank == len(mat):
            break
    return rank


def lp_text(lp: RationalLP) -> str:
    """Human-readable dump, CPLEX-LP-like with exact p/q coefficients.

    Grammar: an objective section ("maximize"/"minimize") with one `obj:`
    line, a "subject to" section with one `c<i>:` line per row, and a
    "bounds" section declaring every variable non-negative.  Terms are
    `p/q x<j>` joined by ` + ` / ` - `; rationals never become decimals.
    """
    names = lp.var_names or [f"x{j}" for j in range(lp.num_vars)]

    def terms(coeffs):
        parts = []
        for j, c in enumerate(coeffs):
            if c == 0:
                continue
            mag = fmt_rat(abs(c))
            op = "-" if c < 0 else "+"
            parts.append((op, f"{mag} {names[j]}"))
        if not parts:
            return "0"
        first_op, first = parts[0]
        out = ("-" if first_op == "-" else "") + first
        for op, t in parts[1:]:
            out += f" {op} {t}"
        return out

    sense, obj = lp.objective
    lines = ["maximize" if sense == "max" else "minimize"]
    lines.append(f"  obj: {terms(obj)}")
    lines.append("subject to")
    for i, (coeffs, rel, rhs) in enumerate(lp.rows):
        lines.append(f"  c{i}: {terms(coeffs)} {rel} {fmt_rat(rhs)}")
    lines.append("bounds")
    for name in names:
        lines.append(f"  {name} >= 0")
    lines.append("end")
    return "\n".join(lines) + "\n"
