"""Instance generators: the two-profile conflict family, 1-in-3-SAT hardness
gadgets, query-lower-bound adversaries, fractional-vertex hunting, and seeded
random instances.

The hardness and adversary families are ratio tables with entries in
{1, epsilon} realized as strictly increasing value instances, so their line
orders are total and the forced-winner structure is exactly the one the
constructions rely on.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional, Sequence

from ._rat import ONE, Rat, ZERO, rat
from .core import (
    GOOD,
    AllocationRule,
    Instance,
    Ratios,
    line_bases,
    profile_index,
    profile_vector,
    total_increasing_ordering,
    values_from_ratios,
)
from .errors import MalformedFormula, PreconditionViolation


def ratios_from_table(n: int, k: int, entries: dict) -> Ratios:
    """Ratios that are 1 everywhere except the listed (agent, profile) entries.

    ``entries`` maps (agent, signal vector) to a rational in (0, 1].
    """
    rho = [[ONE] * (k**n) for _ in range(n)]
    for (agent, s), v in entries.items():
        rho[agent][profile_index(s, k)] = v
    return Ratios(n, k, tuple(tuple(row) for row in rho))


def gen_fig5_pair() -> Instance:
    """n=2, k=2 increasing-value instance with one binding conflict pair.

    Ratios are (1, 2/5) at the source (1,2) and (1/2, 1) at the sink (2,1).
    With increasing values the allocation of agent 0 can only grow from
    (1,2) towards (2,1), so the pair binds and pins the three optimal
    ratios at 11/8 (value), 8/5 (cost) and 2 (deterministic).
    """
    rho = ratios_from_table(
        2, 2, {(1, (1, 2)): rat(2, 5), (0, (2, 1)): rat(1, 2)}
    )
    return values_from_ratios(rho, GOOD)


def gen_random(n: int, k: int, mode: str, seed: int, tie_prob: float = 0.0) -> Instance:
    """Reproducible random positive-rational instance.

    ``tie_prob`` is the per-entry chance of duplicating an earlier value on
    the same line, exercising merged blocks; 1.0 yields constant lines.
    """
    rng = random.Random(f"ivauction:{n}:{k}:{mode}:{seed}")
    table = [[None] * (k**n) for _ in range(n)]
    for i in range(n):
        step = k**i
        for base in line_bases(i, n, k):
            line = []
            for t in range(k):
                if line and rng.random() < tie_prob:
                    v = rng.choice(line)
                else:
                    v = rat(rng.randint(1, 36), rng.randint(1, 6))
                line.append(v)
                table[i][base + t * step] = v
    return Instance(n, k, mode, tuple(tuple(row) for row in table))


# ---------------------------------------------------------------------------
# 1-in-3 formulas


@dataclass(frozen=True)
class Formula1in3:
    """CNF with exactly three literals per clause, satisfied when exactly one
    literal per clause is true.  Literals are signed 1-based variables."""

    num_vars: int
    clauses: tuple

    def __post_init__(self):
        for clause in self.clauses:
            if len(clause) != 3:
                raise MalformedFormula(f"clause {clause} must have three literals")
            for lit in clause:
                if lit == 0 or abs(lit) > self.num_vars:
                    raise MalformedFormula(f"literal {lit} out of range")

    def satisfied_1in3(self, assignment: Sequence[bool]) -> bool:
        for clause in self.clauses:
            trues = sum(
                1
                for lit in clause
                if assignment[abs(lit) - 1] == (lit > 0)
            )
            if trues != 1:
                return False
        return True


def parse_formula(text: str) -> Formula1in3:
    """DIMACS-like format: comment lines "c ...", a header
    "p 1in3 <vars> <clauses>", then one clause of three signed ints per line.
    """
    num_vars = None
    expect = None
    clauses = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "1in3":
                raise MalformedFormula(f"bad header {line!r}")
            num_vars, expect = int(parts[2]), int(parts[3])
            continue
        if num_vars is None:
            raise MalformedFormula("clause before header")
        lits = tuple(int(t) for t in line.split())
        clauses.append(lits)
    if num_vars is None:
        raise MalformedFormula("missing header")
    if expect != len(clauses):
        raise MalformedFormula(f"header announced {expect} clauses, got {len(clauses)}")
    return Formula1in3(num_vars, tuple(clauses))


def format_formula(phi: Formula1in3) -> str:
    lines = [f"p 1in3 {phi.num_vars} {len(phi.clauses)}"]
    for clause in phi.clauses:
        lines.append(" ".join(str(lit) for lit in clause))
    return "\n".join(lines) + "\n"


def solve_1in3(phi: Formula1in3) -> Optional[list]:
    """Brute-force satisfying assignment (desk scale; None if unsatisfiable)."""
    for mask in range(2**phi.num_vars):
        assignment = [(mask >> v) & 1 == 1 for v in range(phi.num_vars)]
        if phi.satisfied_1in3(assignment):
            return assignment
    return None


# ---------------------------------------------------------------------------
# NP-hardness gadgets (n = 4)
#
# Horizontal "lines" are s1-rows; a line is active when agent 0 is selected
# along it.  A variable is a hexagonal cycle whose two states activate
# either its a-line or its not-a-line; a clause is three such cycles meeting
# at one profile whose winner picks the true literal; a XOR connector is a
# unit-size hexagon tying a clause row to a variable line so exactly one of
# the two is active.
#
# Placement discipline (load-bearing): a profile forced to winner j radiates
# j upward along its s_j line, and every profile of that ray excludes each
# other agent i downward along i's line -- a quarter-plane shadow inside the
# 2D plane spanned by axes i and j through the source.  Shadows therefore
# live at one exact column, or one exact s2, or one exact s3 value.  Keeping
# (a) every gadget in private s2/s3 windows with clause windows at low s2 /
# high s3 and variable windows at high s2 / low s3 (which also orients every
# connector), (b) gadget corner pins on private columns (variable right
# corners above all connector heights, clause anchors on columns 2 and 3,
# line starts on column 1, clause right corners on column k), and (c)
# windows stacked diagonally within each band, makes every shadow land
# either on free space or exactly on the pin it is supposed to force.


@dataclass
class VariableGadget:
    base: tuple  # (s2, s3) of the gadget corner row
    a_line: tuple  # (s2, s3) of the row that is active when the variable is true
    nota_line: tuple
    start: tuple  # (1, *a_line): pin whose winner encodes the assignment
    corner_col: int  # private column of the {1,2} corner pin


@dataclass
class ClauseGadget:
    center: tuple  # (s1, s2, s3); winner t-1 makes literal t true
    rows: tuple  # unique-coordinate row per literal position, (s2, s3)
    row_signs: tuple  # +1: row active iff literal true; -1: iff false


@dataclass
class Connector:
    height: int
    clause_row: tuple
    var_line: tuple


@dataclass
class HardnessInstance:
    """Hardness reduction output plus everything needed to audit it."""

    phi: Formula1in3
    beta: Rat
    epsilon: Rat
    k: int
    rho: Ratios
    instance: Instance
    variables: list
    clauses: list
    connectors: list

    def witness_pins(self, assignment: Sequence[bool]) -> dict:
        """Forced winners encoding a 1-in-3 satisfying assignment."""
        if len(assignment) != self.phi.num_vars:
            raise ValueError("assignment length mismatch")
        if not self.phi.satisfied_1in3(assignment):
            raise ValueError("assignment does not 1-in-3-satisfy the formula")
        pins = {}
        k = self.k
        for var, gadget in enumerate(self.variables):
            winner = 0 if assignment[var] else 1
            s2, s3 = gadget.a_line
            for s4 in range(1, k + 1):
                pins[profile_index((1, s2, s3, s4), k)] = winner
        for ci, clause in enumerate(self.phi.clauses):
            true_at = [
                t
                for t, lit in enumerate(clause)
                if assignment[abs(lit) - 1] == (lit > 0)
            ]
            (t,) = true_at
            s1, s2, s3 = self.clauses[ci].center
            for s4 in range(1, k + 1):
                pins[profile_index((s1, s2, s3, s4), k)] = t
        return pins

    def witness_rule(self, assignment: Sequence[bool], max_nodes: int = 500_000) -> AllocationRule:
        """Ratio-1 deterministic rule realizing the assignment: pin the
        gadget states, propagate, select the top agent everywhere else."""
        from .oracle import propagate_feasible

        ok, x = propagate_feasible(
            self.instance, ONE, pins=self.witness_pins(assignment), max_nodes=max_nodes
        )
        if not ok:
            raise AssertionError("satisfying assignment did not extend to a rule")
        return x


def gen_hardness(phi: Formula1in3, beta: Rat, epsilon: Optional[Rat] = None) -> HardnessInstance:
    """n = 4 instance whose deterministic ratio is 1 when the formula is
    1-in-3 satisfiable and at least 1/epsilon > beta otherwise.

    Every ratio entry is 1 or epsilon with 0 < epsilon < 1/beta; the fourth
    dimension is broadcast.
    """
    if beta <= 1:
        raise PreconditionViolation(f"beta must exceed 1, got {beta}")
    if epsilon is None:
        epsilon = ONE / (2 * beta)
    if not (0 < epsilon < ONE / beta):
        raise PreconditionViolation(
            f"epsilon {epsilon} outside (0, 1/beta) = (0, {ONE / beta})"
        )
    V = phi.num_vars
    m = len(phi.clauses)
    n = 4
    k = max(4, 6 * m + V + 4, 5 * m + 2 * V)

    pins: dict = {}

    def pin(s1, s2, s3, ones):
        key = (s1, s2, s3)
        if key in pins:
            raise AssertionError(f"gadget collision at {key}")
        pins[key] = frozenset(ones)

    variables = []
    for v in range(V):
        beta2 = 2 * v + 1  # low-s2 band
        gamma3 = 5 * m + 2 * v + 1  # high-s3 band
        corner_col = 6 * m + 3 + (v + 1)  # private, above all heights
        a_line = (beta2, gamma3 + 1)
        nota_line = (beta2 + 1, gamma3)
        pin(1, *a_line, (0, 1))
        pin(1, *nota_line, (0, 2))
        pin(corner_col, beta2, gamma3, (1, 2))
        variables.append(
            VariableGadget(
                (beta2, gamma3), a_line, nota_line, (1, *a_line), corner_col
            )
        )

    clauses = []
    connectors = []
    for c in range(m):
        q = 2 * V + 5 * c  # high-s2 band
        w = 5 * c  # low-s3 band
        center = (3, q + 3, w + 4)
        pin(*center, (0, 1, 2))
        # literal position 1: loop through the center along s1 (agent 0)
        pin(2, q + 3, w + 4, (0, 1))
        pin(k, q + 3, w + 3, (1, 2))
        pin(2, q + 5, w + 3, (0, 2))
        # literal position 2: loop along s2 (agent 1)
        pin(3, q + 2, w + 4, (0, 1))
        pin(3, q + 4, w + 2, (0, 2))
        pin(k, q + 2, w + 2, (1, 2))
        # literal position 3: loop along s3 (agent 2)
        pin(3, q + 3, w + 1, (0, 2))
        pin(3, q + 1, w + 5, (0, 1))
        pin(k, q + 1, w + 1, (1, 2))
        rows = ((q + 5, w + 3), (q + 4, w + 2), (q + 1, w + 5))
        signs = (-1, 1, 1)
        clauses.append(ClauseGadget(center, rows, signs))
        for t, lit in enumerate(phi.clauses[c]):
            gadget = variables[abs(lit) - 1]
            positive = lit > 0
            if (signs[t] > 0) == positive:
                target = gadget.nota_line
            else:
                target = gadget.a_line
            h = 4 + 2 * len(connectors)
            row = rows[t]
            # the variable line has the smaller s2 and larger s3: it plays
            # the upper-left role of the connector hexagon
            pin(h, target[0], target[1], (0, 1))
            pin(h + 1, target[0], row[1], (1, 2))
            pin(h, row[0], row[1], (0, 2))
            connectors.append(Connector(h, row, target))

    rho_rows = [[ONE] * (k**n) for _ in range(n)]
    for (s1, s2, s3), ones in pins.items():
        for i in range(n):
            if i in ones:
                continue
            for s4 in range(1, k + 1):
                rho_rows[i][profile_index((s1, s2, s3, s4), k)] = epsilon
    rho = Ratios(n, k, tuple(tuple(r) for r in rho_rows))
    inst = values_from_ratios(rho, GOOD)
    return HardnessInstance(
        phi, beta, epsilon, k, rho, inst, variables, clauses, connectors
    )


# ---------------------------------------------------------------------------
# Query-complexity adversaries


@dataclass
class QueryAdversary:
    """Base instance plus the single-entry edits that pin the focal winner.

    ``l1_plants`` (resp. ``l2_plants``) are (agent, profile vector) entries
    whose flip to epsilon forces agent 0 (resp. agent 1) to win at ``focal``
    in every ratio-1 rule; any solver must read an entry before it can know
    none of them was flipped.
    """

    n: int
    k: int
    epsilon: Rat
    focal: tuple
    planted: Optional[tuple]
    rho: Ratios
    instance: Instance
    l1_plants: list
    l2_plants: list


def _query_base_rho(n: int, k: int, epsilon: Rat) -> tuple:
    focal = tuple(
        1 + k // 2 if i < 2 else (1 if i % 2 == 0 else k) for i in range(n)
    )
    if n == 2:
        rho = [[ONE] * (k**n) for _ in range(n)]
        return focal, rho
    rho = [[epsilon] * (k**n) for _ in range(n)]
    for p in range(k**n):
        s = profile_vector(p, n, k)
        if all(s[i] == focal[i] for i in range(2, n)):
            if s[0] >= focal[0]:
                rho[1][p] = ONE
            if s[1] >= focal[1]:
                rho[0][p] = ONE
            if s[0] < focal[0] or s[1] < focal[1]:
                rho[2][p] = ONE
        else:
            j = max(i for i in range(2, n) if s[i] != focal[i])
            rho[j][p] = ONE
            if j + 1 < n:
                rho[j + 1][p] = ONE
    return focal, rho


def _forcing_plants(inst: Instance, rho: Ratios, focal_idx: int, pinned: int) -> list:
    """Single-entry flips falsifying some selection forced by pinning
    `pinned` at the focal profile -- each flip forces the other winner."""
    from .oracle import propagation_fixpoint

    n, k = rho.n, rho.k
    base_ones = [
        frozenset(i for i in range(n) if rho.rho[i][p] == 1)
        for p in range(rho.num_profiles)
    ]
    domains = propagation_fixpoint(inst, ONE, pins={focal_idx: pinned})
    assert domains is not None, "base adversary must be feasible for either pin"
    plants = set()
    for p in range(rho.num_profiles):
        if p == focal_idx:
            continue
        forced, ones = domains[p], base_ones[p]
        if forced == ones:
            continue
        if len(forced) == 1:
            (i,) = forced
            if len(ones) >= 2:
                plants.add((i, p))
        for i in ones - forced:
            others = ones - {i}
            if len(others) == 1:
                (j,) = others
                plants.add((j, p))
    return sorted(plants)


def gen_query_adversary(
    n: int,
    k: int,
    planted: Optional[tuple] = None,
    epsilon: Rat = None,
) -> QueryAdversary:
    """Adversarial family for the query lower bound.

    The base instance admits ratio-1 rules selecting either agent 0 or
    agent 1 at the focal profile; each plant flips exactly one ratio entry
    to epsilon and removes one of the two options.  ``planted`` is None,
    ("L1", index) or ("L2", index).
    """
    if n < 2 or k < 2:
        raise ValueError("need n >= 2 and k >= 2")
    if epsilon is None:
        epsilon = rat(1, 2)
    if not (0 < epsilon < 1):
        raise PreconditionViolation(f"epsilon {epsilon} outside (0, 1)")
    focal, rho_rows = _query_base_rho(n, k, epsilon)
    base_rho = Ratios(n, k, tuple(tuple(r) for r in rho_rows))
    base_inst = values_from_ratios(base_rho, GOOD)
    focal_idx = profile_index(focal, k)
    l1 = _forcing_plants(base_inst, base_rho, focal_idx, pinned=1)
    l2 = _forcing_plants(base_inst, base_rho, focal_idx, pinned=0)
    rho_sel = base_rho
    if planted is not None:
        side, idx = planted
        plants = {"L1": l1, "L2": l2}[side]
        if not 0 <= idx < len(plants):
            raise IndexError(f"{side} index {idx} out of range [0, {len(plants)})")
        agent, p = plants[idx]
        rows = [list(r) for r in base_rho.rho]
        rows[agent][p] = epsilon
        rho_sel = Ratios(n, k, tuple(tuple(r) for r in rows))
    inst = values_from_ratios(rho_sel, GOOD) if planted is not None else base_inst
    return QueryAdversary(
        n,
        k,
        epsilon,
        focal,
        planted,
        rho_sel,
        inst,
        [(a, profile_vector(p, n, k)) for a, p in l1],
        [(a, profile_vector(p, n, k)) for a, p in l2],
    )


# ---------------------------------------------------------------------------
# Fractional-vertex hunting


def find_fractional_vertex(trials: int, seed: int, n: int = 3, k: int = 3):
    """Hunt for a non-integral vertex of the truthful polytope with strictly
    increasing values by optimizing random rational objectives.

    Returns the witness AllocationRule, or None when the budget runs out
    (which is the expected outcome in the integral regimes n = 2 / k = 2).
    """
    from .lp import RationalLP, simplex_solve, truthful_region, var_index, verify_vertex

    ord = total_increasing_ordering(n, k)
    nv, rows = truthful_region(ord)
    P = k**n
    rng = random.Random(f"fracvertex:{n}:{k}:{seed}")
    for _ in range(trials):
        obj = [rat(rng.randint(-9, 9)) for _ in range(nv)]
        sol = simplex_solve(RationalLP(nv, rows, ("max", obj)))
        assert sol.status == "optimal"
        if all(v.denominator == 1 for v in sol.point):
            continue
        assert verify_vertex(nv, rows, sol.point)
        x = tuple(
            tuple(sol.point[var_index(i, p, P)] for p in range(P))
            for i in range(n)
        )
        return AllocationRule(n, k, x)
    return None
